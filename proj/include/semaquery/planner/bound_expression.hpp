#pragma once

#include "semaquery/common/value.hpp"
#include "semaquery/core/data_chunk.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace semaquery {

//! Identifies a column within one logical plan. Ids are unique per plan; operators that pass a column
//! through keep its id.
using ColumnId = uint32_t;

struct ColumnBinding {
	ColumnId id = 0;
	std::string name;
	//! Table alias or relation name used for qualified lookup; may be empty.
	std::string qualifier;
	LogicalType type = LogicalType::Varchar;
	ColumnOrigin origin = ColumnOrigin::Stored;

	std::string QualifiedName() const {
		return qualifier.empty() ? name : qualifier + "." + name;
	}
	bool operator==(const ColumnBinding &) const = default;
};

enum class BoundExpressionType : uint8_t { Constant, ColumnRef, Unary, Binary, IsNull, Function, Cast };

struct BoundExpression {
	BoundExpressionType type = BoundExpressionType::Constant;
	LogicalType return_type = LogicalType::Null;
	Value value;
	ColumnId column = 0;
	//! Position of `column` in the input chunk; filled in by the physical planner.
	size_t index = 0;
	//! Display name for column references.
	std::string name;
	//! Operator or function name.
	std::string op;
	bool negated = false;
	std::vector<BoundExpression> children;

	static BoundExpression Constant(Value value);
	static BoundExpression ColumnRef(const ColumnBinding &binding);
	static BoundExpression Binary(std::string op, BoundExpression left, BoundExpression right, LogicalType type);

	//! Stable rendering used by EXPLAIN.
	std::string ToString() const;
	void CollectColumns(std::set<ColumnId> &out) const;
	std::set<ColumnId> Columns() const {
		std::set<ColumnId> result;
		CollectColumns(result);
		return result;
	}
	bool References(ColumnId id) const;

	bool operator==(const BoundExpression &) const = default;
};

//! Splits nested ANDs into a flat conjunct list.
std::vector<BoundExpression> SplitConjuncts(BoundExpression expression);
//! Rebuilds a conjunction; an empty list yields TRUE.
BoundExpression CombineConjuncts(std::vector<BoundExpression> conjuncts);

} // namespace semaquery
