#include "semaquery/core/table.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

namespace semaquery {

Table::Table(std::string name, std::vector<ColumnSchema> schema) : name_(std::move(name)), schema_(std::move(schema)) {
	for (size_t i = 0; i < schema_.size(); i++) {
		for (size_t j = 0; j < i; j++) {
			if (string_util::EqualsIgnoreCase(schema_[i].name, schema_[j].name)) {
				throw CatalogException("duplicate column name '" + schema_[i].name + "' in table " + name_);
			}
		}
	}
}

std::optional<size_t> Table::ColumnIndex(std::string_view name) const {
	for (size_t i = 0; i < schema_.size(); i++) {
		if (string_util::EqualsIgnoreCase(schema_[i].name, name)) {
			return i;
		}
	}
	return std::nullopt;
}

void Table::AppendRow(const Row &row) {
	if (row.size() != schema_.size()) {
		throw ExecutionException("row has " + std::to_string(row.size()) + " values, table " + name_ + " has " +
		                         std::to_string(schema_.size()) + " columns");
	}
	if (chunks_.empty() || chunks_.back().RowCount() >= kDefaultChunkCapacity) {
		chunks_.emplace_back(schema_);
	}
	Row converted;
	converted.reserve(row.size());
	for (size_t i = 0; i < row.size(); i++) {
		converted.push_back(row[i].CastAs(schema_[i].type));
	}
	chunks_.back().AppendRow(converted);
	row_count_++;
}

void Table::AppendChunk(const DataChunk &chunk) {
	for (size_t r = 0; r < chunk.RowCount(); r++) {
		AppendRow(chunk.GetRow(r));
	}
}

Row Table::GetRow(size_t index) const {
	for (auto &chunk : chunks_) {
		if (index < chunk.RowCount()) {
			return chunk.GetRow(index);
		}
		index -= chunk.RowCount();
	}
	throw ExecutionException("row index out of range in table " + name_);
}

TableScanner::TableScanner(std::shared_ptr<const Table> table, size_t capacity)
    : table_(std::move(table)), capacity_(capacity == 0 ? 1 : capacity) {
}

bool TableScanner::Next(DataChunk &out) {
	auto &chunks = table_->Chunks();
	out = DataChunk(table_->Schema());
	while (out.RowCount() < capacity_ && chunk_index_ < chunks.size()) {
		auto &source = chunks[chunk_index_];
		if (row_in_chunk_ >= source.RowCount()) {
			chunk_index_++;
			row_in_chunk_ = 0;
			continue;
		}
		out.AppendRow(source.GetRow(row_in_chunk_++));
	}
	return out.RowCount() > 0;
}

std::vector<DataChunk> ScanTable(std::shared_ptr<const Table> table, size_t capacity) {
	TableScanner scanner(std::move(table), capacity);
	std::vector<DataChunk> result;
	DataChunk chunk;
	while (scanner.Next(chunk)) {
		result.push_back(std::move(chunk));
	}
	return result;
}

void TableCatalog::CreateTable(std::shared_ptr<Table> table, bool replace) {
	std::lock_guard<std::mutex> guard(lock_);
	auto key = string_util::Lower(table->Name());
	if (!replace && tables_.count(key)) {
		throw CatalogException("table already exists: " + table->Name());
	}
	tables_[key] = std::move(table);
}

std::shared_ptr<Table> TableCatalog::GetTable(std::string_view name) const {
	auto table = TryGetTable(name);
	if (!table) {
		throw CatalogException("table not found: " + std::string(name));
	}
	return table;
}

std::shared_ptr<Table> TableCatalog::TryGetTable(std::string_view name) const {
	std::lock_guard<std::mutex> guard(lock_);
	auto entry = tables_.find(string_util::Lower(name));
	return entry == tables_.end() ? nullptr : entry->second;
}

void TableCatalog::DropTable(std::string_view name) {
	std::lock_guard<std::mutex> guard(lock_);
	if (!tables_.erase(string_util::Lower(name))) {
		throw CatalogException("table not found: " + std::string(name));
	}
}

std::vector<std::string> TableCatalog::TableNames() const {
	std::lock_guard<std::mutex> guard(lock_);
	std::vector<std::string> names;
	for (auto &entry : tables_) {
		names.push_back(entry.second->Name());
	}
	return names;
}

} // namespace semaquery
