#include "semaquery/planner/bound_expression.hpp"

#include "semaquery/common/string_util.hpp"

namespace semaquery {

BoundExpression BoundExpression::Constant(Value value) {
	BoundExpression expression;
	expression.type = BoundExpressionType::Constant;
	expression.return_type = value.Type();
	expression.value = std::move(value);
	return expression;
}

BoundExpression BoundExpression::ColumnRef(const ColumnBinding &binding) {
	BoundExpression expression;
	expression.type = BoundExpressionType::ColumnRef;
	expression.return_type = binding.type;
	expression.column = binding.id;
	expression.name = binding.QualifiedName();
	return expression;
}

BoundExpression BoundExpression::Binary(std::string op, BoundExpression left, BoundExpression right,
                                        LogicalType type) {
	BoundExpression expression;
	expression.type = BoundExpressionType::Binary;
	expression.op = std::move(op);
	expression.return_type = type;
	expression.children.push_back(std::move(left));
	expression.children.push_back(std::move(right));
	return expression;
}

std::string BoundExpression::ToString() const {
	switch (type) {
	case BoundExpressionType::Constant:
		return value.ToSQLString();
	case BoundExpressionType::ColumnRef:
		return name;
	case BoundExpressionType::Unary:
		return op == "NOT" ? "(NOT " + children[0].ToString() + ")" : "(-" + children[0].ToString() + ")";
	case BoundExpressionType::Binary:
		return "(" + children[0].ToString() + " " + op + " " + children[1].ToString() + ")";
	case BoundExpressionType::IsNull:
		return "(" + children[0].ToString() + (negated ? " IS NOT NULL)" : " IS NULL)");
	case BoundExpressionType::Function: {
		std::vector<std::string> args;
		for (auto &child : children) {
			args.push_back(child.ToString());
		}
		return op + "(" + string_util::Join(args, ", ") + ")";
	}
	case BoundExpressionType::Cast:
		return "CAST(" + children[0].ToString() + " AS " + TypeName(return_type) + ")";
	}
	return "";
}

void BoundExpression::CollectColumns(std::set<ColumnId> &out) const {
	if (type == BoundExpressionType::ColumnRef) {
		out.insert(column);
	}
	for (auto &child : children) {
		child.CollectColumns(out);
	}
}

bool BoundExpression::References(ColumnId id) const {
	if (type == BoundExpressionType::ColumnRef && column == id) {
		return true;
	}
	for (auto &child : children) {
		if (child.References(id)) {
			return true;
		}
	}
	return false;
}

std::vector<BoundExpression> SplitConjuncts(BoundExpression expression) {
	std::vector<BoundExpression> result;
	std::vector<BoundExpression> stack;
	stack.push_back(std::move(expression));
	while (!stack.empty()) {
		auto current = std::move(stack.back());
		stack.pop_back();
		if (current.type == BoundExpressionType::Binary && current.op == "AND") {
			stack.push_back(std::move(current.children[1]));
			stack.push_back(std::move(current.children[0]));
		} else {
			result.push_back(std::move(current));
		}
	}
	return result;
}

BoundExpression CombineConjuncts(std::vector<BoundExpression> conjuncts) {
	if (conjuncts.empty()) {
		return BoundExpression::Constant(Value::Boolean(true));
	}
	auto result = std::move(conjuncts[0]);
	for (size_t i = 1; i < conjuncts.size(); i++) {
		result = BoundExpression::Binary("AND", std::move(result), std::move(conjuncts[i]), LogicalType::Boolean);
	}
	return result;
}

} // namespace semaquery
