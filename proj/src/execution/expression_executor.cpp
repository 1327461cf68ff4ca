#include "semaquery/execution/expression_executor.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <cmath>

namespace semaquery {

namespace {

Value Arithmetic(const std::string &op, const Value &left, const Value &right, LogicalType type) {
	if (left.IsNull() || right.IsNull()) {
		return Value::Null();
	}
	if (type == LogicalType::Integer && left.Type() == LogicalType::Integer && right.Type() == LogicalType::Integer) {
		auto a = left.GetInteger();
		auto b = right.GetInteger();
		int64_t result = 0;
		bool overflow = false;
		if (op == "+") {
			overflow = __builtin_add_overflow(a, b, &result);
		} else if (op == "-") {
			overflow = __builtin_sub_overflow(a, b, &result);
		} else if (op == "*") {
			overflow = __builtin_mul_overflow(a, b, &result);
		} else if (op == "%") {
			if (b == 0) {
				return Value::Null();
			}
			result = b == -1 ? 0 : a % b;
		} else {
			throw ExecutionException("unsupported integer operator " + op);
		}
		if (overflow) {
			throw ExecutionException("integer overflow in " + left.ToString() + " " + op + " " + right.ToString());
		}
		return Value::Integer(result);
	}
	auto a = left.GetNumeric();
	auto b = right.GetNumeric();
	if (op == "+") {
		return Value::Double(a + b);
	}
	if (op == "-") {
		return Value::Double(a - b);
	}
	if (op == "*") {
		return Value::Double(a * b);
	}
	if (op == "/") {
		return b == 0 ? Value::Null() : Value::Double(a / b);
	}
	if (op == "%") {
		return b == 0 ? Value::Null() : Value::Double(std::fmod(a, b));
	}
	throw ExecutionException("unsupported operator " + op);
}

Value Comparison(const std::string &op, const Value &left, const Value &right) {
	auto order = Value::Compare(left, right);
	if (!order) {
		return Value::Null();
	}
	auto c = *order;
	if (op == "=") {
		return Value::Boolean(c == 0);
	}
	if (op == "<>") {
		return Value::Boolean(c != 0);
	}
	if (op == "<") {
		return Value::Boolean(c < 0);
	}
	if (op == "<=") {
		return Value::Boolean(c <= 0);
	}
	if (op == ">") {
		return Value::Boolean(c > 0);
	}
	if (op == ">=") {
		return Value::Boolean(c >= 0);
	}
	throw ExecutionException("unsupported comparison " + op);
}

bool IsComparison(const std::string &op) {
	return op == "=" || op == "<>" || op == "<" || op == "<=" || op == ">" || op == ">=";
}

Value Function(const BoundExpression &expression, const DataChunk &chunk, size_t row) {
	auto &name = expression.op;
	if (name == "coalesce") {
		for (auto &child : expression.children) {
			auto value = EvaluateExpression(child, chunk, row);
			if (!value.IsNull()) {
				return expression.return_type == LogicalType::Double && value.Type() == LogicalType::Integer
				           ? value.CastAs(LogicalType::Double)
				           : value;
			}
		}
		return Value::Null();
	}
	auto arg = EvaluateExpression(expression.children[0], chunk, row);
	if (arg.IsNull()) {
		return Value::Null();
	}
	if (name == "lower") {
		return Value::Varchar(string_util::Lower(arg.GetString()));
	}
	if (name == "upper") {
		return Value::Varchar(string_util::Upper(arg.GetString()));
	}
	if (name == "trim") {
		return Value::Varchar(std::string(string_util::Trim(arg.GetString())));
	}
	if (name == "length") {
		return Value::Integer(static_cast<int64_t>(arg.GetString().size()));
	}
	if (name == "abs") {
		if (arg.Type() == LogicalType::Integer) {
			if (arg.GetInteger() == INT64_MIN) {
				throw ExecutionException("integer overflow in abs()");
			}
			return Value::Integer(std::llabs(arg.GetInteger()));
		}
		return Value::Double(std::fabs(arg.GetDouble()));
	}
	if (name == "round") {
		int64_t digits = 0;
		if (expression.children.size() == 2) {
			auto d = EvaluateExpression(expression.children[1], chunk, row);
			if (d.IsNull()) {
				return Value::Null();
			}
			digits = d.GetInteger();
		}
		auto scale = std::pow(10.0, static_cast<double>(digits));
		return Value::Double(std::round(arg.GetNumeric() * scale) / scale);
	}
	throw ExecutionException("unknown function " + name);
}

} // namespace

ColumnLayout MakeLayout(const std::vector<ColumnBinding> &columns) {
	ColumnLayout layout;
	for (size_t i = 0; i < columns.size(); i++) {
		layout.emplace(columns[i].id, i);
	}
	return layout;
}

BoundExpression ResolveExpression(const BoundExpression &expression, const ColumnLayout &layout) {
	auto result = expression;
	if (result.type == BoundExpressionType::ColumnRef) {
		auto it = layout.find(result.column);
		if (it == layout.end()) {
			throw ExecutionException("column " + result.name + " (#" + std::to_string(result.column) +
			                         ") is not produced by the operator's input");
		}
		result.index = it->second;
	}
	for (auto &child : result.children) {
		child = ResolveExpression(child, layout);
	}
	return result;
}

bool LikeMatch(std::string_view text, std::string_view pattern) {
	size_t t = 0;
	size_t p = 0;
	size_t star_p = std::string_view::npos;
	size_t star_t = 0;
	while (t < text.size()) {
		if (p < pattern.size() && (pattern[p] == '_' || pattern[p] == text[t]) && pattern[p] != '%') {
			t++;
			p++;
		} else if (p < pattern.size() && pattern[p] == '%') {
			star_p = p++;
			star_t = t;
		} else if (star_p != std::string_view::npos) {
			p = star_p + 1;
			t = ++star_t;
		} else {
			return false;
		}
	}
	while (p < pattern.size() && pattern[p] == '%') {
		p++;
	}
	return p == pattern.size();
}

Value EvaluateExpression(const BoundExpression &expression, const DataChunk &chunk, size_t row) {
	switch (expression.type) {
	case BoundExpressionType::Constant:
		return expression.value;
	case BoundExpressionType::ColumnRef:
		return chunk.GetValue(expression.index, row);
	case BoundExpressionType::IsNull: {
		auto value = EvaluateExpression(expression.children[0], chunk, row);
		return Value::Boolean(value.IsNull() != expression.negated);
	}
	case BoundExpressionType::Cast: {
		auto value = EvaluateExpression(expression.children[0], chunk, row);
		return value.CastAs(expression.return_type);
	}
	case BoundExpressionType::Function:
		return Function(expression, chunk, row);
	case BoundExpressionType::Unary: {
		auto value = EvaluateExpression(expression.children[0], chunk, row);
		if (value.IsNull()) {
			return value;
		}
		if (expression.op == "NOT") {
			return Value::Boolean(!value.GetBoolean());
		}
		if (value.Type() == LogicalType::Integer) {
			if (value.GetInteger() == INT64_MIN) {
				throw ExecutionException("integer overflow in unary -");
			}
			return Value::Integer(-value.GetInteger());
		}
		return Value::Double(-value.GetDouble());
	}
	case BoundExpressionType::Binary:
		break;
	}
	auto &op = expression.op;
	if (op == "AND" || op == "OR") {
		bool is_and = op == "AND";
		auto left = EvaluateExpression(expression.children[0], chunk, row);
		// FALSE AND x = FALSE, TRUE OR x = TRUE without evaluating x.
		if (!left.IsNull() && left.GetBoolean() != is_and) {
			return left;
		}
		auto right = EvaluateExpression(expression.children[1], chunk, row);
		if (!right.IsNull() && right.GetBoolean() != is_and) {
			return right;
		}
		if (left.IsNull() || right.IsNull()) {
			return Value::Null();
		}
		return Value::Boolean(is_and);
	}
	auto left = EvaluateExpression(expression.children[0], chunk, row);
	auto right = EvaluateExpression(expression.children[1], chunk, row);
	if (IsComparison(op)) {
		return Comparison(op, left, right);
	}
	if (left.IsNull() || right.IsNull()) {
		return Value::Null();
	}
	if (op == "LIKE") {
		return Value::Boolean(LikeMatch(left.GetString(), right.GetString()));
	}
	if (op == "||") {
		return Value::Varchar(left.ToString() + right.ToString());
	}
	return Arithmetic(op, left, right, expression.return_type);
}

std::vector<size_t> SelectRows(const std::vector<BoundExpression> &conjuncts, const DataChunk &chunk) {
	std::vector<size_t> result;
	for (size_t row = 0; row < chunk.RowCount(); row++) {
		bool keep = true;
		for (auto &conjunct : conjuncts) {
			auto value = EvaluateExpression(conjunct, chunk, row);
			if (value.IsNull() || !value.GetBoolean()) {
				keep = false;
				break;
			}
		}
		if (keep) {
			result.push_back(row);
		}
	}
	return result;
}

} // namespace semaquery
