#include "semaquery/core/csv.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace semaquery {

std::vector<CsvRecord> ParseCsvRecords(std::string_view text, char delimiter) {
	std::vector<CsvRecord> records;
	if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
	    static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
		text.remove_prefix(3);
	}
	size_t pos = 0;
	size_t line = 1;
	while (pos < text.size()) {
		CsvRecord record;
		record.line = line;
		bool end_of_record = false;
		while (!end_of_record) {
			std::optional<std::string> field;
			if (pos < text.size() && text[pos] == '"') {
				size_t quote_line = line;
				std::string value;
				pos++;
				bool closed = false;
				while (pos < text.size()) {
					char c = text[pos];
					if (c == '"') {
						if (pos + 1 < text.size() && text[pos + 1] == '"') {
							value += '"';
							pos += 2;
							continue;
						}
						pos++;
						closed = true;
						break;
					}
					if (c == '\n') {
						line++;
					}
					value += c;
					pos++;
				}
				if (!closed) {
					throw IOException("unterminated quoted field starting on line " + std::to_string(quote_line));
				}
				field = std::move(value);
				if (pos < text.size() && text[pos] != delimiter && text[pos] != '\n' && text[pos] != '\r') {
					throw IOException("unexpected character after closing quote on line " + std::to_string(line));
				}
			} else {
				size_t start = pos;
				while (pos < text.size() && text[pos] != delimiter && text[pos] != '\n' && text[pos] != '\r') {
					pos++;
				}
				if (pos > start) {
					field = std::string(text.substr(start, pos - start));
				}
			}
			record.fields.push_back(std::move(field));
			if (pos >= text.size()) {
				end_of_record = true;
			} else if (text[pos] == delimiter) {
				pos++;
			} else {
				// \r\n or \n
				if (text[pos] == '\r') {
					pos++;
				}
				if (pos < text.size() && text[pos] == '\n') {
					pos++;
				}
				line++;
				end_of_record = true;
			}
		}
		// skip completely blank lines
		if (record.fields.size() == 1 && !record.fields[0]) {
			continue;
		}
		records.push_back(std::move(record));
	}
	return records;
}

LogicalType InferColumnType(const std::vector<std::optional<std::string>> &values) {
	bool all_int = true, all_double = true, all_bool = true, all_datetime = true;
	bool any = false;
	for (auto &value : values) {
		if (!value) {
			continue;
		}
		any = true;
		auto text = string_util::Trim(*value);
		if (all_int && !string_util::ParseInteger(text)) {
			all_int = false;
		}
		if (all_double && !string_util::ParseDouble(text)) {
			all_double = false;
		}
		if (all_bool) {
			auto lower = string_util::Lower(text);
			all_bool = lower == "true" || lower == "false";
		}
		if (all_datetime && !ParseIsoDatetime(text)) {
			all_datetime = false;
		}
	}
	if (!any) {
		return LogicalType::Varchar;
	}
	if (all_int) {
		return LogicalType::Integer;
	}
	if (all_double) {
		return LogicalType::Double;
	}
	if (all_bool) {
		return LogicalType::Boolean;
	}
	if (all_datetime) {
		return LogicalType::Datetime;
	}
	return LogicalType::Varchar;
}

std::shared_ptr<Table> ReadCsv(std::string_view text, const std::string &table_name, const CsvOptions &options) {
	auto records = ParseCsvRecords(text, options.delimiter);
	std::vector<std::string> names;
	size_t first_data = 0;
	if (options.header) {
		if (records.empty()) {
			throw IOException("CSV input for table " + table_name + " has no header line");
		}
		for (auto &field : records[0].fields) {
			names.push_back(field ? std::string(string_util::Trim(*field)) : std::string());
		}
		first_data = 1;
	} else if (!records.empty()) {
		for (size_t i = 0; i < records[0].fields.size(); i++) {
			names.push_back("column" + std::to_string(i));
		}
	}
	for (size_t i = 0; i < names.size(); i++) {
		if (names[i].empty()) {
			names[i] = "column" + std::to_string(i);
		}
	}
	size_t width = names.size();
	for (size_t r = first_data; r < records.size(); r++) {
		if (records[r].fields.size() != width) {
			throw IOException("ragged CSV row on line " + std::to_string(records[r].line) + ": expected " +
			                  std::to_string(width) + " fields, found " + std::to_string(records[r].fields.size()));
		}
	}
	std::vector<ColumnSchema> schema;
	for (size_t c = 0; c < width; c++) {
		LogicalType type = LogicalType::Varchar;
		if (options.infer_types) {
			std::vector<std::optional<std::string>> column;
			for (size_t r = first_data; r < records.size(); r++) {
				column.push_back(records[r].fields[c]);
			}
			type = InferColumnType(column);
		}
		schema.push_back(ColumnSchema {names[c], type, ColumnOrigin::Stored});
	}
	auto table = std::make_shared<Table>(table_name, schema);
	for (size_t r = first_data; r < records.size(); r++) {
		Row row;
		for (size_t c = 0; c < width; c++) {
			auto &field = records[r].fields[c];
			if (!field) {
				row.push_back(Value::Null());
				continue;
			}
			auto text_value = Value::Varchar(*field);
			if (schema[c].type == LogicalType::Varchar) {
				row.push_back(std::move(text_value));
			} else {
				row.push_back(Value::Varchar(std::string(string_util::Trim(*field))).CastAs(schema[c].type));
			}
		}
		table->AppendRow(row);
	}
	if (options.primary_key) {
		if (!table->ColumnIndex(*options.primary_key)) {
			throw CatalogException("primary key column not found: " + *options.primary_key);
		}
		table->Keys().primary_key = options.primary_key;
	}
	for (auto &fk : options.foreign_keys) {
		if (!table->ColumnIndex(fk.column)) {
			throw CatalogException("foreign key column not found: " + fk.column);
		}
		table->Keys().foreign_keys.push_back(fk);
	}
	return table;
}

std::shared_ptr<Table> ImportCsv(TableCatalog &catalog, const std::filesystem::path &path,
                                 const std::string &table_name, const CsvOptions &options) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw IOException("cannot open CSV file: " + path.string());
	}
	std::stringstream buffer;
	buffer << in.rdbuf();
	auto table = ReadCsv(buffer.str(), table_name, options);
	catalog.CreateTable(table);
	return table;
}

std::string CsvEscape(const Value &value, char delimiter) {
	if (value.IsNull()) {
		return "";
	}
	auto text = value.ToString();
	bool needs_quotes = text.empty() || text.find_first_of(std::string("\"\r\n") + delimiter) != std::string::npos;
	if (!needs_quotes) {
		return text;
	}
	std::string result = "\"";
	for (char c : text) {
		if (c == '"') {
			result += "\"\"";
		} else {
			result += c;
		}
	}
	return result + "\"";
}

void WriteCsv(std::ostream &out, const std::vector<std::string> &column_names, const std::vector<Row> &rows,
              char delimiter) {
	for (size_t i = 0; i < column_names.size(); i++) {
		if (i > 0) {
			out << delimiter;
		}
		out << CsvEscape(Value::Varchar(column_names[i]), delimiter);
	}
	out << "\n";
	for (auto &row : rows) {
		for (size_t i = 0; i < row.size(); i++) {
			if (i > 0) {
				out << delimiter;
			}
			out << CsvEscape(row[i], delimiter);
		}
		out << "\n";
	}
}

} // namespace semaquery
