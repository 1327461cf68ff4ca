#include "semaquery/planner/logical_operator.hpp"

#include "semaquery/common/string_util.hpp"
#include "semaquery/sql/parser.hpp"

namespace semaquery {

namespace {

std::string JoinExpressions(const std::vector<BoundExpression> &expressions) {
	std::vector<std::string> parts;
	for (auto &expression : expressions) {
		parts.push_back(expression.ToString());
	}
	return string_util::Join(parts, ", ");
}

void ExplainRecursive(const LogicalOperator &op, size_t depth, std::string &out) {
	out += std::string(depth * 2, ' ');
	out += LogicalOperatorTypeName(op.type);
	auto params = op.ParamString();
	if (!params.empty()) {
		out += " " + params;
	}
	out += "\n";
	for (auto &child : op.children) {
		ExplainRecursive(*child, depth + 1, out);
	}
}

} // namespace

const char *LogicalOperatorTypeName(LogicalOperatorType type) {
	switch (type) {
	case LogicalOperatorType::Get:
		return "GET";
	case LogicalOperatorType::Filter:
		return "FILTER";
	case LogicalOperatorType::Project:
		return "PROJECT";
	case LogicalOperatorType::Join:
		return "JOIN";
	case LogicalOperatorType::Aggregate:
		return "AGGREGATE";
	case LogicalOperatorType::Order:
		return "ORDER";
	case LogicalOperatorType::Limit:
		return "LIMIT";
	case LogicalOperatorType::Predict:
		return "PREDICT";
	}
	return "?";
}

const char *AggregateFunctionName(AggregateFunction function) {
	switch (function) {
	case AggregateFunction::CountStar:
	case AggregateFunction::Count:
		return "count";
	case AggregateFunction::Sum:
		return "sum";
	case AggregateFunction::Avg:
		return "avg";
	case AggregateFunction::Min:
		return "min";
	case AggregateFunction::Max:
		return "max";
	case AggregateFunction::Semantic:
		return "llm_agg";
	}
	return "?";
}

std::unique_ptr<LogicalOperator> LogicalOperator::Copy() const {
	auto result = CopyNode();
	for (auto &child : children) {
		result->children.push_back(child->Copy());
	}
	return result;
}

bool LogicalOperator::ProducesAll(const std::set<ColumnId> &ids) const {
	std::set<ColumnId> available;
	for (auto &binding : Columns()) {
		available.insert(binding.id);
	}
	for (auto id : ids) {
		if (!available.count(id)) {
			return false;
		}
	}
	return true;
}

std::string LogicalGet::ParamString() const {
	if (!table) {
		return "[single row]";
	}
	std::string result = table->Name();
	if (!bindings.empty() && !string_util::EqualsIgnoreCase(bindings[0].qualifier, table->Name())) {
		result += " AS " + bindings[0].qualifier;
	}
	return result;
}

std::unique_ptr<LogicalOperator> LogicalGet::CopyNode() const {
	return std::make_unique<LogicalGet>(table, bindings);
}

std::string LogicalFilter::ParamString() const {
	return "[" + JoinExpressions(conditions) + "]";
}

std::unique_ptr<LogicalOperator> LogicalFilter::CopyNode() const {
	return std::make_unique<LogicalFilter>(conditions);
}

std::string LogicalProject::ParamString() const {
	std::vector<std::string> parts;
	for (size_t i = 0; i < expressions.size(); i++) {
		auto text = expressions[i].ToString();
		auto &name = bindings[i].name;
		bool same_name = expressions[i].name == name || string_util::EndsWith(expressions[i].name, "." + name);
		if (expressions[i].type != BoundExpressionType::ColumnRef || !same_name) {
			text += " AS " + bindings[i].name;
		}
		parts.push_back(std::move(text));
	}
	return "[" + string_util::Join(parts, ", ") + "]";
}

bool LogicalProject::IsPassThrough() const {
	for (auto &expression : expressions) {
		if (expression.type != BoundExpressionType::ColumnRef) {
			return false;
		}
	}
	return true;
}

std::unique_ptr<LogicalOperator> LogicalProject::CopyNode() const {
	auto result = std::make_unique<LogicalProject>(expressions, bindings);
	result->is_root = is_root;
	return result;
}

std::vector<ColumnBinding> LogicalJoin::Columns() const {
	auto result = children[0]->Columns();
	auto right = children[1]->Columns();
	result.insert(result.end(), right.begin(), right.end());
	return result;
}

std::string LogicalJoin::ParamString() const {
	if (join_type == LogicalJoinType::Cross) {
		return "CROSS";
	}
	return "INNER [" + JoinExpressions(conditions) + "]";
}

std::unique_ptr<LogicalOperator> LogicalJoin::CopyNode() const {
	return std::make_unique<LogicalJoin>(join_type, conditions);
}

std::string BoundAggregate::ToString() const {
	if (function == AggregateFunction::CountStar) {
		return "count(*)";
	}
	if (function == AggregateFunction::Semantic) {
		return "llm_agg(" + predict->Describe() + ")";
	}
	return std::string(AggregateFunctionName(function)) + "(" + (distinct ? "DISTINCT " : "") +
	       JoinExpressions(arguments) + ")";
}

std::vector<ColumnBinding> LogicalAggregate::Columns() const {
	auto result = group_bindings;
	result.insert(result.end(), aggregate_bindings.begin(), aggregate_bindings.end());
	return result;
}

std::string LogicalAggregate::ParamString() const {
	std::vector<std::string> parts;
	for (auto &aggregate : aggregates) {
		parts.push_back(aggregate.ToString());
	}
	return "groups=[" + JoinExpressions(groups) + "] aggregates=[" + string_util::Join(parts, ", ") + "]";
}

std::unique_ptr<LogicalOperator> LogicalAggregate::CopyNode() const {
	auto result = std::make_unique<LogicalAggregate>();
	result->groups = groups;
	result->group_bindings = group_bindings;
	result->aggregates = aggregates;
	for (auto &aggregate : result->aggregates) {
		if (aggregate.predict) {
			aggregate.predict = std::make_shared<PredictInfo>(*aggregate.predict);
		}
	}
	result->aggregate_bindings = aggregate_bindings;
	return result;
}

std::string LogicalOrder::ParamString() const {
	std::vector<std::string> parts;
	for (auto &order : orders) {
		parts.push_back(order.expression.ToString() + (order.descending ? " DESC" : " ASC"));
	}
	return "[" + string_util::Join(parts, ", ") + "]";
}

std::unique_ptr<LogicalOperator> LogicalOrder::CopyNode() const {
	return std::make_unique<LogicalOrder>(orders);
}

std::string LogicalLimit::ParamString() const {
	return std::to_string(limit);
}

std::unique_ptr<LogicalOperator> LogicalLimit::CopyNode() const {
	return std::make_unique<LogicalLimit>(limit);
}

std::vector<ColumnBinding> LogicalPredict::Columns() const {
	std::vector<ColumnBinding> result;
	if (info->mode != PredictMode::TableGeneration) {
		result = children[0]->Columns();
	}
	result.insert(result.end(), info->outputs.begin(), info->outputs.end());
	return result;
}

std::string LogicalPredict::ParamString() const {
	return info->Describe() + (pinned ? " pinned" : "");
}

std::unique_ptr<LogicalOperator> LogicalPredict::CopyNode() const {
	auto result = std::make_unique<LogicalPredict>(std::make_shared<PredictInfo>(*info));
	result->pinned = pinned;
	return result;
}

std::string ExplainPlan(const LogicalOperator &plan) {
	std::string result;
	ExplainRecursive(plan, 0, result);
	return result;
}

const char *PredictModeName(PredictMode mode) {
	switch (mode) {
	case PredictMode::TableInference:
		return "table_inference";
	case PredictMode::TableGeneration:
		return "table_generation";
	case PredictMode::Scalar:
		return "scalar";
	case PredictMode::Aggregate:
		return "aggregate";
	}
	return "?";
}

namespace {

double NumericHint(const PredictInfo &info, const char *key, double fallback) {
	const OptionValue *value = info.hints.Find(key);
	if (!value && info.model) {
		value = info.model->options.Find(key);
	}
	if (!value) {
		return fallback;
	}
	if (auto d = std::get_if<double>(value)) {
		return *d;
	}
	if (auto i = std::get_if<int64_t>(value)) {
		return static_cast<double>(*i);
	}
	if (auto s = std::get_if<std::string>(value)) {
		if (auto parsed = string_util::ParseDouble(*s)) {
			return *parsed;
		}
	}
	return fallback;
}

} // namespace

double PredictInfo::Selectivity() const {
	return NumericHint(*this, "selectivity", 0.5);
}

double PredictInfo::Quality() const {
	return NumericHint(*this, "quality", 1.0);
}

std::set<ColumnId> PredictInfo::InputColumns() const {
	std::set<ColumnId> result;
	for (auto &input : inputs) {
		result.insert(input.column);
	}
	return result;
}

bool PredictInfo::Produces(ColumnId id) const {
	for (auto &output : outputs) {
		if (output.id == id) {
			return true;
		}
	}
	return false;
}

std::string PredictInfo::Describe() const {
	std::vector<std::string> in;
	for (auto &input : inputs) {
		in.push_back(input.display);
	}
	std::vector<std::string> out;
	for (auto &output : outputs) {
		out.push_back(output.name + " " + TypeName(output.type));
	}
	std::string result = std::string(PredictModeName(mode)) + " model=" + model->name + " in=(" +
	                     string_util::Join(in, ", ") + ") out=(" + string_util::Join(out, ", ") + ")";
	if (!IsTabular()) {
		result += " prompt=" + QuoteString(prompt.Raw());
	}
	if (!hints.Empty()) {
		result += " hints=" + hints.ToSQL();
	}
	return result;
}

} // namespace semaquery
