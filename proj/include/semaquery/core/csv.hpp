#pragma once

#include "semaquery/core/table.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace semaquery {

struct CsvOptions {
	bool header = true;
	bool infer_types = true;
	char delimiter = ',';
	//! Optional key declarations attached to the imported table.
	std::optional<std::string> primary_key;
	std::vector<ForeignKey> foreign_keys;
};

//! Splits RFC-4180 text into records. Quoted fields may contain delimiters, quotes ("") and newlines.
//! Unquoted empty fields are reported as nullopt so they can become NULL.
struct CsvRecord {
	size_t line = 0;
	std::vector<std::optional<std::string>> fields;
};
std::vector<CsvRecord> ParseCsvRecords(std::string_view text, char delimiter = ',');

//! Infers a column type from its non-null textual values: INTEGER, DOUBLE, BOOLEAN, DATETIME, else VARCHAR.
LogicalType InferColumnType(const std::vector<std::optional<std::string>> &values);

std::shared_ptr<Table> ReadCsv(std::string_view text, const std::string &table_name, const CsvOptions &options = {});
//! Reads the file and registers the table in the catalog.
std::shared_ptr<Table> ImportCsv(TableCatalog &catalog, const std::filesystem::path &path,
                                 const std::string &table_name, const CsvOptions &options = {});

std::string CsvEscape(const Value &value, char delimiter = ',');
void WriteCsv(std::ostream &out, const std::vector<std::string> &column_names, const std::vector<Row> &rows,
              char delimiter = ',');

} // namespace semaquery
