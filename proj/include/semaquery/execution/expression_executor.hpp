#pragma once

#include "semaquery/core/data_chunk.hpp"
#include "semaquery/planner/bound_expression.hpp"

#include <unordered_map>
#include <vector>

namespace semaquery {

using ColumnLayout = std::unordered_map<ColumnId, size_t>;

ColumnLayout MakeLayout(const std::vector<ColumnBinding> &columns);

//! Copy of `expression` with every column reference's `index` set from `layout`.
//! Throws ExecutionException for columns the layout does not provide.
BoundExpression ResolveExpression(const BoundExpression &expression, const ColumnLayout &layout);

//! Row-at-a-time evaluation with SQL three-valued logic. Integer overflow and invalid casts throw;
//! division or modulo by zero yields NULL.
Value EvaluateExpression(const BoundExpression &expression, const DataChunk &chunk, size_t row);

//! Rows where every conjunct is TRUE (NULL and FALSE both reject).
std::vector<size_t> SelectRows(const std::vector<BoundExpression> &conjuncts, const DataChunk &chunk);

//! SQL LIKE with % and _; case-sensitive.
bool LikeMatch(std::string_view text, std::string_view pattern);

} // namespace semaquery
