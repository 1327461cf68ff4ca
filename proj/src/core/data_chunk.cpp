#include "semaquery/core/data_chunk.hpp"

#include "semaquery/common/exception.hpp"

namespace semaquery {

DataChunk::DataChunk(std::vector<ColumnSchema> schema) : schema_(std::move(schema)), columns_(schema_.size()) {
}

Row DataChunk::GetRow(size_t row) const {
	Row result;
	result.reserve(columns_.size());
	for (auto &column : columns_) {
		result.push_back(column[row]);
	}
	return result;
}

void DataChunk::AppendRow(const Row &row) {
	if (row.size() != columns_.size()) {
		throw ExecutionException("row width " + std::to_string(row.size()) + " does not match chunk width " +
		                         std::to_string(columns_.size()));
	}
	for (size_t i = 0; i < row.size(); i++) {
		columns_[i].push_back(row[i]);
	}
	row_count_++;
}

void DataChunk::AddColumn(ColumnSchema schema, Vector values) {
	if (!columns_.empty() && values.size() != row_count_) {
		throw ExecutionException("column '" + schema.name + "' has " + std::to_string(values.size()) +
		                         " values, chunk has " + std::to_string(row_count_) + " rows");
	}
	row_count_ = values.size();
	schema_.push_back(std::move(schema));
	columns_.push_back(std::move(values));
}

DataChunk DataChunk::Select(const std::vector<size_t> &rows) const {
	DataChunk result(schema_);
	for (size_t c = 0; c < columns_.size(); c++) {
		auto &target = result.columns_[c];
		target.reserve(rows.size());
		for (auto r : rows) {
			target.push_back(columns_[c][r]);
		}
	}
	result.row_count_ = rows.size();
	return result;
}

void DataChunk::Reset() {
	for (auto &column : columns_) {
		column.clear();
	}
	row_count_ = 0;
}

void DataChunk::Verify() const {
	if (schema_.size() != columns_.size()) {
		throw ExecutionException("chunk schema/column count mismatch");
	}
	for (size_t i = 0; i < columns_.size(); i++) {
		if (columns_[i].size() != row_count_) {
			throw ExecutionException("column '" + schema_[i].name + "' length " + std::to_string(columns_[i].size()) +
			                         " != row count " + std::to_string(row_count_));
		}
	}
}

} // namespace semaquery
