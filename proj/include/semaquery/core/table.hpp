#pragma once

#include "semaquery/core/data_chunk.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace semaquery {

struct ForeignKey {
	std::string column;
	std::string referenced_table;
	std::string referenced_column;
	bool operator==(const ForeignKey &) const = default;
};

//! Key declarations used by the select-vs-join ordering rule. Not enforced on data.
struct KeyInfo {
	std::optional<std::string> primary_key;
	std::vector<ForeignKey> foreign_keys;
};

class Table {
public:
	Table(std::string name, std::vector<ColumnSchema> schema);

	const std::string &Name() const {
		return name_;
	}
	const std::vector<ColumnSchema> &Schema() const {
		return schema_;
	}
	std::optional<size_t> ColumnIndex(std::string_view name) const;
	size_t RowCount() const {
		return row_count_;
	}
	const std::vector<DataChunk> &Chunks() const {
		return chunks_;
	}

	void AppendRow(const Row &row);
	void AppendChunk(const DataChunk &chunk);
	Row GetRow(size_t index) const;

	KeyInfo &Keys() {
		return keys_;
	}
	const KeyInfo &Keys() const {
		return keys_;
	}

private:
	std::string name_;
	std::vector<ColumnSchema> schema_;
	std::vector<DataChunk> chunks_;
	size_t row_count_ = 0;
	KeyInfo keys_;
};

//! Emits every row of a table exactly once, re-chunked at the given capacity.
class TableScanner {
public:
	TableScanner(std::shared_ptr<const Table> table, size_t capacity = kDefaultChunkCapacity);

	//! Returns false when exhausted.
	bool Next(DataChunk &out);

private:
	std::shared_ptr<const Table> table_;
	size_t capacity_;
	size_t chunk_index_ = 0;
	size_t row_in_chunk_ = 0;
};

//! Convenience: scan a whole table into chunks.
std::vector<DataChunk> ScanTable(std::shared_ptr<const Table> table, size_t capacity = kDefaultChunkCapacity);

//! In-memory table registry. Names are case-insensitive.
class TableCatalog {
public:
	void CreateTable(std::shared_ptr<Table> table, bool replace = false);
	std::shared_ptr<Table> GetTable(std::string_view name) const;
	std::shared_ptr<Table> TryGetTable(std::string_view name) const;
	void DropTable(std::string_view name);
	std::vector<std::string> TableNames() const;

private:
	mutable std::mutex lock_;
	std::map<std::string, std::shared_ptr<Table>> tables_;
};

} // namespace semaquery
