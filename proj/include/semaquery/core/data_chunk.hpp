#pragma once

#include "semaquery/common/value.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace semaquery {

constexpr size_t kDefaultChunkCapacity = 2048;

enum class ColumnOrigin : uint8_t { Stored, Predicted };

struct ColumnSchema {
	std::string name;
	LogicalType type = LogicalType::Varchar;
	ColumnOrigin origin = ColumnOrigin::Stored;

	bool operator==(const ColumnSchema &) const = default;
};

using Vector = std::vector<Value>;
using Row = std::vector<Value>;

//! A columnar batch of rows. Every column vector has exactly row_count entries.
class DataChunk {
public:
	DataChunk() = default;
	explicit DataChunk(std::vector<ColumnSchema> schema);

	const std::vector<ColumnSchema> &Schema() const {
		return schema_;
	}
	size_t ColumnCount() const {
		return columns_.size();
	}
	size_t RowCount() const {
		return row_count_;
	}
	bool Empty() const {
		return row_count_ == 0;
	}

	Vector &Column(size_t index) {
		return columns_[index];
	}
	const Vector &Column(size_t index) const {
		return columns_[index];
	}
	const Value &GetValue(size_t column, size_t row) const {
		return columns_[column][row];
	}
	Row GetRow(size_t row) const;

	void AppendRow(const Row &row);
	//! Adds a column; its length must equal RowCount() (or the chunk must have no columns yet).
	void AddColumn(ColumnSchema schema, Vector values);
	//! Keeps the rows whose indices are listed, in that order.
	DataChunk Select(const std::vector<size_t> &rows) const;
	void Reset();

	//! Throws ExecutionException when column lengths disagree with row_count.
	void Verify() const;

private:
	std::vector<ColumnSchema> schema_;
	std::vector<Vector> columns_;
	size_t row_count_ = 0;
};

} // namespace semaquery
