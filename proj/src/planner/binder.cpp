#include "semaquery/planner/binder.hpp"

#include "semaquery/common/string_util.hpp"
#include "semaquery/sql/parser.hpp"

#include <map>

namespace semaquery {

struct Binder::Scope {
	struct Entry {
		ColumnBinding binding;
		//! Natural-join right-side duplicates: reachable only qualified, skipped by `*`.
		bool hidden = false;
	};
	std::vector<Entry> entries;

	void Add(ColumnBinding binding, bool hidden = false) {
		entries.push_back({std::move(binding), hidden});
	}

	void Append(const Scope &other) {
		entries.insert(entries.end(), other.entries.begin(), other.entries.end());
	}

	//! Returns nullptr when nothing matches; throws when an unqualified name matches distinct columns.
	const ColumnBinding *Find(const std::string &qualifier, const std::string &column) const {
		const ColumnBinding *result = nullptr;
		for (auto &entry : entries) {
			if (!string_util::EqualsIgnoreCase(entry.binding.name, column)) {
				continue;
			}
			if (qualifier.empty()) {
				if (entry.hidden) {
					continue;
				}
			} else if (!string_util::EqualsIgnoreCase(entry.binding.qualifier, qualifier)) {
				continue;
			}
			if (result && result->id != entry.binding.id) {
				throw BinderException("column reference \"" + column + "\" is ambiguous; qualify it with a table name");
			}
			if (!result) {
				result = &entry.binding;
			}
		}
		return result;
	}

	bool HasVisibleName(const std::string &column) const {
		for (auto &entry : entries) {
			if (!entry.hidden && string_util::EqualsIgnoreCase(entry.binding.name, column)) {
				return true;
			}
		}
		return false;
	}
};

struct Binder::ExpressionContext {
	const Scope *scope = nullptr;
	//! Where scalar Predicts are inserted; null when inference is not allowed in this clause.
	std::unique_ptr<LogicalOperator> *plan = nullptr;
	const char *clause = "expression";
	//! WHERE/ON/HAVING: a prompt without outputs gets an implicit BOOLEAN output.
	bool predicate = false;
	//! Aggregate context: column references must match a group or sit inside an aggregate.
	LogicalAggregate *aggregate = nullptr;
	const std::vector<ParsedExpression> *group_expressions = nullptr;
};

namespace {

bool IsAggregateName(const std::string &name) {
	return name == "count" || name == "sum" || name == "avg" || name == "min" || name == "max";
}

bool HasAggregate(const ParsedExpression &expression) {
	if (expression.type == ExpressionType::Function && IsAggregateName(expression.op)) {
		return true;
	}
	if (expression.type == ExpressionType::Semantic && expression.semantic && (*expression.semantic)->agg) {
		return true;
	}
	for (auto &child : expression.children) {
		if (HasAggregate(child)) {
			return true;
		}
	}
	return false;
}

std::vector<const ParsedExpression *> SplitParsedConjuncts(const ParsedExpression &expression) {
	std::vector<const ParsedExpression *> result;
	std::vector<const ParsedExpression *> stack {&expression};
	while (!stack.empty()) {
		auto current = stack.back();
		stack.pop_back();
		if (current->type == ExpressionType::Binary && current->op == "AND") {
			stack.push_back(&current->children[1]);
			stack.push_back(&current->children[0]);
		} else {
			result.push_back(current);
		}
	}
	return result;
}

std::string ColumnText(const std::vector<std::string> &parts) {
	return string_util::Join(parts, ".");
}

bool IsComparison(const std::string &op) {
	return op == "=" || op == "<>" || op == "<" || op == "<=" || op == ">" || op == ">=";
}

bool Comparable(LogicalType a, LogicalType b) {
	return a == b || a == LogicalType::Null || b == LogicalType::Null || (IsNumeric(a) && IsNumeric(b));
}

//! Casts a VARCHAR constant on one side to the other side's type.
void CoerceComparison(BoundExpression &left, BoundExpression &right) {
	if (Comparable(left.return_type, right.return_type)) {
		return;
	}
	auto try_cast = [](BoundExpression &constant, LogicalType target) {
		if (constant.type != BoundExpressionType::Constant || constant.return_type != LogicalType::Varchar) {
			return false;
		}
		try {
			constant = BoundExpression::Constant(constant.value.CastAs(target));
			return true;
		} catch (ConversionException &) {
			return false;
		}
	};
	if (try_cast(right, left.return_type) || try_cast(left, right.return_type)) {
		return;
	}
	throw BinderException(std::string("type mismatch: cannot compare ") + TypeName(left.return_type) + " with " +
	                      TypeName(right.return_type) + " in " + left.ToString() + " vs " + right.ToString());
}

void RequireType(const BoundExpression &expression, LogicalType type, const std::string &what) {
	if (expression.return_type != type && expression.return_type != LogicalType::Null) {
		throw BinderException("type mismatch: " + what + " expects " + TypeName(type) + " but " +
		                      expression.ToString() + " is " + TypeName(expression.return_type));
	}
}

void RequireNumeric(const BoundExpression &expression, const std::string &what) {
	if (!IsNumeric(expression.return_type) && expression.return_type != LogicalType::Null) {
		throw BinderException("type mismatch: " + what + " expects a numeric argument but " + expression.ToString() +
		                      " is " + TypeName(expression.return_type));
	}
}

BoundExpression MakeUnary(std::string op, BoundExpression child, LogicalType type) {
	BoundExpression result;
	result.type = BoundExpressionType::Unary;
	result.op = std::move(op);
	result.return_type = type;
	result.children.push_back(std::move(child));
	return result;
}

std::string OutputName(const ParsedExpression &expression) {
	auto text = ToSQL(expression);
	if (text.size() >= 2 && text.front() == '(' && text.back() == ')') {
		text = text.substr(1, text.size() - 2);
	}
	return text;
}

std::string SourceQualifier(const TableRef &ref) {
	if (!ref.alias.empty()) {
		return ref.alias;
	}
	return ref.type == TableRefType::Base ? ref.name : std::string();
}

} // namespace

bool ContainsSemantic(const ParsedExpression &expression) {
	if (expression.type == ExpressionType::Semantic) {
		return true;
	}
	for (auto &child : expression.children) {
		if (ContainsSemantic(child)) {
			return true;
		}
	}
	return false;
}

void InsertAboveDeepestProvider(std::unique_ptr<LogicalOperator> &slot, const std::set<ColumnId> &required,
                                const std::function<std::unique_ptr<LogicalOperator>()> &make) {
	auto &node = *slot;
	bool descend = false;
	switch (node.type) {
	case LogicalOperatorType::Filter:
	case LogicalOperatorType::Order:
	case LogicalOperatorType::Limit:
	case LogicalOperatorType::Join:
		descend = true;
		break;
	case LogicalOperatorType::Predict:
		descend = !node.children.empty();
		break;
	default:
		break;
	}
	if (descend) {
		for (auto &child : node.children) {
			if (child->ProducesAll(required)) {
				InsertAboveDeepestProvider(child, required, make);
				return;
			}
		}
	}
	auto inserted = make();
	inserted->children.push_back(std::move(slot));
	slot = std::move(inserted);
}

Binder::Binder(const TableCatalog &tables, const ModelCatalog &models) : tables_(tables), models_(models) {
}

Binder::~Binder() = default;

ColumnBinding Binder::NewBinding(std::string name, std::string qualifier, LogicalType type, ColumnOrigin origin) {
	ColumnBinding binding;
	binding.id = next_id_++;
	binding.name = std::move(name);
	binding.qualifier = std::move(qualifier);
	binding.type = type;
	binding.origin = origin;
	bindings_by_id_[binding.id] = binding;
	return binding;
}

std::shared_ptr<const ModelEntry> Binder::LookupModel(const std::string &name) const {
	return models_.Lookup(name);
}

std::vector<PredictInput>
Binder::ResolvePromptInputs(const PromptTemplate &prompt,
                            const std::function<ColumnBinding(const PromptInput &)> &resolve) {
	std::vector<PredictInput> result;
	for (auto &input : prompt.Inputs()) {
		auto binding = resolve(input);
		result.push_back({input.Key(), binding.id, binding.type, binding.QualifiedName()});
	}
	return result;
}

// ---------------------------------------------------------------------------------------------------------------
// FROM
// ---------------------------------------------------------------------------------------------------------------

std::unique_ptr<LogicalOperator> Binder::BindFrom(const TableRef &ref, Scope &scope) {
	switch (ref.type) {
	case TableRefType::Base: {
		auto table = tables_.GetTable(ref.name);
		auto qualifier = ref.alias.empty() ? table->Name() : ref.alias;
		std::vector<ColumnBinding> bindings;
		for (auto &column : table->Schema()) {
			bindings.push_back(NewBinding(column.name, qualifier, column.type, column.origin));
			scope.Add(bindings.back());
		}
		return std::make_unique<LogicalGet>(std::move(table), std::move(bindings));
	}
	case TableRefType::Subquery: {
		auto bound = BindSelect(**ref.subquery);
		// Only the outermost SELECT is the output projection.
		VisitPlan(*bound.plan, [](const LogicalOperator &op) {
			if (op.type == LogicalOperatorType::Project) {
				const_cast<LogicalOperator &>(op).Cast<LogicalProject>().is_root = false;
			}
		});
		std::vector<BoundExpression> expressions;
		std::vector<ColumnBinding> bindings;
		for (auto &binding : bound.plan->Columns()) {
			expressions.push_back(BoundExpression::ColumnRef(binding));
			bindings.push_back(binding);
			bindings.back().qualifier = ref.alias;
			scope.Add(bindings.back());
		}
		auto rename = std::make_unique<LogicalProject>(std::move(expressions), std::move(bindings));
		rename->children.push_back(std::move(bound.plan));
		return rename;
	}
	case TableRefType::Semantic:
		return BindSemanticSource(**ref.semantic, ref.alias, scope);
	case TableRefType::Join:
		break;
	}

	Scope left_scope;
	Scope right_scope;
	auto left = BindFrom(**ref.left, left_scope);
	auto right = BindFrom(**ref.right, right_scope);

	std::unique_ptr<LogicalOperator> plan;
	if (ref.join_type == JoinType::Natural) {
		std::vector<BoundExpression> conditions;
		for (auto &right_entry : right_scope.entries) {
			if (right_entry.hidden) {
				continue;
			}
			auto left_binding = left_scope.Find("", right_entry.binding.name);
			if (!left_binding) {
				continue;
			}
			auto l = BoundExpression::ColumnRef(*left_binding);
			auto r = BoundExpression::ColumnRef(right_entry.binding);
			CoerceComparison(l, r);
			conditions.push_back(BoundExpression::Binary("=", std::move(l), std::move(r), LogicalType::Boolean));
			right_entry.hidden = true;
		}
		auto type = conditions.empty() ? LogicalJoinType::Cross : LogicalJoinType::Inner;
		plan = std::make_unique<LogicalJoin>(type, std::move(conditions));
	} else {
		plan = std::make_unique<LogicalJoin>(LogicalJoinType::Cross, std::vector<BoundExpression>());
	}
	plan->children.push_back(std::move(left));
	plan->children.push_back(std::move(right));

	Scope joined;
	joined.Append(left_scope);
	joined.Append(right_scope);
	if (ref.condition) {
		BindJoinCondition(*ref.condition, joined, plan->Cast<LogicalJoin>(), plan);
	}
	scope.Append(joined);
	return plan;
}

void Binder::BindJoinCondition(const ParsedExpression &condition, const Scope &scope, LogicalJoin &join,
                               std::unique_ptr<LogicalOperator> &plan) {
	std::vector<const ParsedExpression *> semantic;
	for (auto conjunct : SplitParsedConjuncts(condition)) {
		if (ContainsSemantic(*conjunct)) {
			semantic.push_back(conjunct);
			continue;
		}
		ExpressionContext context;
		context.scope = &scope;
		context.clause = "JOIN ... ON";
		auto bound = Bind(*conjunct, context);
		RequireType(bound, LogicalType::Boolean, "JOIN condition");
		join.conditions.push_back(std::move(bound));
	}
	if (!join.conditions.empty()) {
		join.join_type = LogicalJoinType::Inner;
	}
	auto left_columns = join.children[0]->Columns();
	auto right_columns = join.children[1]->Columns();
	auto from_side = [](const std::vector<ColumnBinding> &side, ColumnId id) {
		for (auto &binding : side) {
			if (binding.id == id) {
				return true;
			}
		}
		return false;
	};
	for (auto it = semantic.rbegin(); it != semantic.rend(); ++it) {
		ExpressionContext context;
		context.scope = &scope;
		context.plan = &plan;
		context.clause = "JOIN ... ON";
		context.predicate = true;
		auto id_before = next_id_;
		auto bound = Bind(**it, context);
		RequireType(bound, LogicalType::Boolean, "JOIN condition");
		// A prompt that reads only one side is a selection on that side.
		bool left_used = false;
		bool right_used = false;
		VisitPlan(*plan, [&](const LogicalOperator &op) {
			if (op.type != LogicalOperatorType::Predict) {
				return;
			}
			auto &info = *op.Cast<LogicalPredict>().info;
			if (info.outputs.empty() || info.outputs[0].id < id_before) {
				return;
			}
			for (auto &input : info.inputs) {
				left_used |= from_side(left_columns, input.column);
				right_used |= from_side(right_columns, input.column);
			}
		});
		if (!(left_used && right_used)) {
			warnings_.push_back("semantic join condition reads columns from only one side of the join; planned as a "
			                    "semantic selection on that side");
		}
		auto required = bound.Columns();
		InsertAboveDeepestProvider(plan, required, [&]() {
			return std::make_unique<LogicalFilter>(SplitConjuncts(bound));
		});
	}
}

std::unique_ptr<LogicalOperator> Binder::BindSemanticSource(const SemanticCall &call, const std::string &alias,
                                                            Scope &scope) {
	auto model = LookupModel(call.model);
	auto info = std::make_shared<PredictInfo>();
	info->model = model;
	info->hints = call.options;

	Scope child_scope;
	std::unique_ptr<LogicalOperator> child;
	std::string qualifier = alias;
	if (call.source) {
		child = BindFrom(**call.source, child_scope);
		if (qualifier.empty()) {
			qualifier = SourceQualifier(**call.source);
		}
	}

	std::vector<std::pair<std::string, LogicalType>> outputs;
	if (call.type == SemanticCallType::Llm) {
		if (model->type != ModelType::Llm) {
			throw BinderException("model " + model->name + " is " + ModelTypeName(model->type) +
			                      "; the LLM clause requires an LLM model");
		}
		info->prompt = *call.prompt;
		if (info->prompt.Outputs().empty()) {
			throw BinderException("prompt of LLM " + model->name +
			                      " in FROM position must declare at least one output {name TYPE}");
		}
		for (auto &output : info->prompt.Outputs()) {
			outputs.emplace_back(output.name, output.type);
		}
		if (child) {
			info->mode = PredictMode::TableInference;
			info->inputs = ResolvePromptInputs(info->prompt, [&](const PromptInput &input) {
				auto binding = child_scope.Find(input.qualifier, input.column);
				if (!binding) {
					throw BinderException("prompt input {{" + input.Key() + "}} does not match any column of the input relation");
				}
				return *binding;
			});
		} else {
			if (!info->prompt.Inputs().empty()) {
				throw BinderException("prompt input {{" + info->prompt.Inputs()[0].Key() +
				                      "}} has no input relation; add one after the prompt");
			}
			info->mode = PredictMode::TableGeneration;
		}
	} else {
		if (model->type != ModelType::Tabular) {
			throw BinderException("PREDICT requires a TABULAR model; " + model->name + " is " +
			                      ModelTypeName(model->type));
		}
		if (!child) {
			throw BinderException("PREDICT " + model->name + " in FROM position requires an input relation");
		}
		info->mode = PredictMode::TableInference;
		for (auto &feature : model->input_set) {
			auto binding = child_scope.Find("", feature);
			if (!binding) {
				throw BinderException("feature column " + feature + " of model " + model->name +
				                      " not found in the input relation");
			}
			info->inputs.push_back({feature, binding->id, binding->type, binding->QualifiedName()});
		}
		for (auto &output : model->output_set) {
			outputs.emplace_back(output.name, output.type);
		}
	}

	for (auto &[name, type] : outputs) {
		if (child_scope.HasVisibleName(name)) {
			throw BinderException("predicted column " + name +
			                      " collides with an existing column of the input relation; rename the output or "
			                      "select the input through an alias");
		}
		info->outputs.push_back(NewBinding(name, qualifier, type, ColumnOrigin::Predicted));
	}

	scope.Append(child_scope);
	for (auto &output : info->outputs) {
		scope.Add(output);
	}
	auto predict = std::make_unique<LogicalPredict>(std::move(info));
	if (child) {
		predict->children.push_back(std::move(child));
	}
	return predict;
}

// ---------------------------------------------------------------------------------------------------------------
// WHERE
// ---------------------------------------------------------------------------------------------------------------

void Binder::BindWhere(const ParsedExpression &where, const Scope &scope, std::unique_ptr<LogicalOperator> &plan) {
	auto conjuncts = SplitParsedConjuncts(where);
	std::vector<BoundExpression> classical;
	for (auto it = conjuncts.rbegin(); it != conjuncts.rend(); ++it) {
		auto &conjunct = **it;
		ExpressionContext context;
		context.scope = &scope;
		context.clause = "WHERE";
		context.predicate = true;
		if (!ContainsSemantic(conjunct)) {
			auto bound = Bind(conjunct, context);
			RequireType(bound, LogicalType::Boolean, "WHERE");
			classical.insert(classical.begin(), std::move(bound));
			continue;
		}
		context.plan = &plan;
		auto bound = Bind(conjunct, context);
		RequireType(bound, LogicalType::Boolean, "WHERE");
		InsertAboveDeepestProvider(plan, bound.Columns(), [&]() {
			return std::make_unique<LogicalFilter>(SplitConjuncts(bound));
		});
	}
	if (!classical.empty()) {
		auto filter = std::make_unique<LogicalFilter>(std::move(classical));
		filter->children.push_back(std::move(plan));
		plan = std::move(filter);
	}
}

// ---------------------------------------------------------------------------------------------------------------
// SELECT
// ---------------------------------------------------------------------------------------------------------------

BoundQuery Binder::BindSelect(const SelectStatement &statement) {
	Scope scope;
	std::unique_ptr<LogicalOperator> plan;
	if (statement.from) {
		plan = BindFrom(*statement.from, scope);
	} else {
		plan = std::make_unique<LogicalGet>(nullptr, std::vector<ColumnBinding>());
	}
	if (statement.where) {
		if (HasAggregate(*statement.where)) {
			throw BinderException("aggregate functions are not allowed in WHERE");
		}
		BindWhere(*statement.where, scope, plan);
	}

	bool aggregate_query = !statement.group_by.empty() || statement.having;
	for (auto &item : statement.select_list) {
		aggregate_query |= HasAggregate(item.expression);
	}
	for (auto &item : statement.order_by) {
		aggregate_query |= HasAggregate(item.expression);
	}

	ExpressionContext select_context;
	select_context.scope = &scope;
	select_context.plan = &plan;
	select_context.clause = "SELECT";

	std::vector<ParsedExpression> group_expressions;
	LogicalAggregate *aggregate = nullptr;
	if (aggregate_query) {
		auto node = std::make_unique<LogicalAggregate>();
		for (auto &group : statement.group_by) {
			auto expression = group;
			// GROUP BY may name a select alias.
			if (expression.type == ExpressionType::Column && expression.column_name.size() == 1 &&
			    !scope.Find("", expression.column_name[0])) {
				for (auto &item : statement.select_list) {
					if (string_util::EqualsIgnoreCase(item.alias, expression.column_name[0])) {
						expression = item.expression;
						break;
					}
				}
			}
			if (HasAggregate(expression)) {
				throw BinderException("aggregate functions are not allowed in GROUP BY");
			}
			ExpressionContext context;
			context.scope = &scope;
			context.plan = &plan;
			context.clause = "GROUP BY";
			auto bound = Bind(expression, context);
			ColumnBinding binding;
			if (bound.type == BoundExpressionType::ColumnRef) {
				binding = bindings_by_id_.at(bound.column);
			} else {
				binding = NewBinding(OutputName(expression), "", bound.return_type, ColumnOrigin::Stored);
			}
			node->groups.push_back(std::move(bound));
			node->group_bindings.push_back(binding);
			group_expressions.push_back(std::move(expression));
		}
		node->children.push_back(std::move(plan));
		aggregate = node.get();
		plan = std::move(node);
		select_context.aggregate = aggregate;
		select_context.group_expressions = &group_expressions;
	}

	if (statement.having) {
		if (!aggregate) {
			throw BinderException("HAVING requires GROUP BY or an aggregate");
		}
		ExpressionContext context = select_context;
		context.clause = "HAVING";
		context.predicate = true;
		auto bound = Bind(*statement.having, context);
		RequireType(bound, LogicalType::Boolean, "HAVING");
		auto filter = std::make_unique<LogicalFilter>(SplitConjuncts(std::move(bound)));
		filter->children.push_back(std::move(plan));
		plan = std::move(filter);
	}

	std::vector<BoundExpression> expressions;
	std::vector<ColumnBinding> bindings;
	std::vector<const ParsedExpression *> sources;
	auto add_output = [&](BoundExpression expression, std::string name, const ParsedExpression *source) {
		ColumnBinding binding;
		if (expression.type == BoundExpressionType::ColumnRef) {
			binding = bindings_by_id_.at(expression.column);
			binding.name = std::move(name);
		} else {
			binding = NewBinding(std::move(name), "", expression.return_type, ColumnOrigin::Stored);
		}
		bindings_by_id_.emplace(binding.id, binding);
		expressions.push_back(std::move(expression));
		bindings.push_back(std::move(binding));
		sources.push_back(source);
	};

	for (auto &item : statement.select_list) {
		auto &expression = item.expression;
		if (expression.type == ExpressionType::Star) {
			if (aggregate) {
				throw BinderException("SELECT * is not allowed in an aggregate query");
			}
			std::string qualifier = expression.column_name.empty() ? "" : expression.column_name[0];
			size_t added = 0;
			for (auto &entry : scope.entries) {
				if (entry.hidden ||
				    (!qualifier.empty() && !string_util::EqualsIgnoreCase(entry.binding.qualifier, qualifier))) {
					continue;
				}
				add_output(BoundExpression::ColumnRef(entry.binding), entry.binding.name, nullptr);
				added++;
			}
			if (added == 0) {
				throw BinderException(qualifier.empty() ? "SELECT * requires a FROM clause"
				                                        : "table " + qualifier + " not found in FROM clause");
			}
			continue;
		}
		auto bound = Bind(expression, select_context);
		std::string name = item.alias;
		if (name.empty()) {
			if (bound.type == BoundExpressionType::ColumnRef &&
			    (expression.type == ExpressionType::Column || expression.type == ExpressionType::Semantic)) {
				name = bindings_by_id_.at(bound.column).name;
			} else {
				name = OutputName(expression);
			}
		}
		add_output(std::move(bound), std::move(name), &expression);
	}

	size_t visible = expressions.size();
	auto project = std::make_unique<LogicalProject>(std::move(expressions), std::move(bindings));
	project->is_root = true;
	project->children.push_back(std::move(plan));
	auto *project_ptr = project.get();
	plan = std::move(project);

	std::vector<ColumnBinding> outputs = project_ptr->bindings;
	if (statement.distinct) {
		auto node = std::make_unique<LogicalAggregate>();
		for (auto &binding : outputs) {
			node->groups.push_back(BoundExpression::ColumnRef(binding));
			node->group_bindings.push_back(binding);
		}
		node->children.push_back(std::move(plan));
		plan = std::move(node);
	}

	if (!statement.order_by.empty()) {
		std::vector<BoundOrder> orders;
		for (size_t k = 0; k < statement.order_by.size(); k++) {
			auto &item = statement.order_by[k];
			auto &expression = item.expression;
			std::optional<size_t> index;
			if (expression.type == ExpressionType::Constant && expression.value.Type() == LogicalType::Integer) {
				auto position = expression.value.GetInteger();
				if (position < 1 || position > static_cast<int64_t>(visible)) {
					throw BinderException("ORDER BY position " + std::to_string(position) + " is not in the select list");
				}
				index = static_cast<size_t>(position - 1);
			}
			if (!index && expression.type == ExpressionType::Column && expression.column_name.size() == 1) {
				for (size_t i = 0; i < visible; i++) {
					if (string_util::EqualsIgnoreCase(outputs[i].name, expression.column_name[0])) {
						index = i;
						break;
					}
				}
			}
			if (!index) {
				for (size_t i = 0; i < visible; i++) {
					if (sources[i] && *sources[i] == expression) {
						index = i;
						break;
					}
				}
			}
			if (index) {
				orders.push_back({BoundExpression::ColumnRef(outputs[*index]), item.descending});
				continue;
			}
			if (statement.distinct) {
				throw BinderException("ORDER BY expressions must appear in the select list of SELECT DISTINCT");
			}
			ExpressionContext context = select_context;
			context.clause = "ORDER BY";
			context.plan = &project_ptr->children[0];
			auto bound = Bind(expression, context);
			ColumnBinding binding;
			if (bound.type == BoundExpressionType::ColumnRef) {
				binding = bindings_by_id_.at(bound.column);
			} else {
				binding = NewBinding("__order" + std::to_string(k), "", bound.return_type, ColumnOrigin::Stored);
			}
			project_ptr->expressions.push_back(std::move(bound));
			project_ptr->bindings.push_back(binding);
			orders.push_back({BoundExpression::ColumnRef(binding), item.descending});
		}
		auto order = std::make_unique<LogicalOrder>(std::move(orders));
		order->children.push_back(std::move(plan));
		plan = std::move(order);
		if (project_ptr->bindings.size() > visible) {
			std::vector<BoundExpression> trimmed;
			for (size_t i = 0; i < visible; i++) {
				trimmed.push_back(BoundExpression::ColumnRef(outputs[i]));
			}
			auto trim = std::make_unique<LogicalProject>(std::move(trimmed), outputs);
			trim->is_root = true;
			trim->children.push_back(std::move(plan));
			plan = std::move(trim);
		}
	}

	if (statement.limit) {
		if (*statement.limit < 0) {
			throw BinderException("LIMIT must not be negative");
		}
		auto limit = std::make_unique<LogicalLimit>(*statement.limit);
		limit->children.push_back(std::move(plan));
		plan = std::move(limit);
	}

	BoundQuery result;
	for (auto &binding : outputs) {
		result.names.push_back(binding.name);
		result.types.push_back(binding.type);
	}
	result.plan = std::move(plan);
	result.warnings = warnings_;
	return result;
}

BoundExpression Binder::BindConstant(const ParsedExpression &expression) {
	Scope empty;
	ExpressionContext context;
	context.scope = &empty;
	context.clause = "VALUES";
	return Bind(expression, context);
}

// ---------------------------------------------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------------------------------------------

BoundExpression Binder::Bind(const ParsedExpression &expression, ExpressionContext &context) {
	if (context.aggregate) {
		auto &groups = *context.group_expressions;
		for (size_t i = 0; i < groups.size(); i++) {
			if (groups[i] == expression) {
				return BoundExpression::ColumnRef(context.aggregate->group_bindings[i]);
			}
		}
	}

	switch (expression.type) {
	case ExpressionType::Constant:
		return BoundExpression::Constant(expression.value);
	case ExpressionType::Column:
		return BindColumn(expression, context);
	case ExpressionType::Star:
		throw BinderException("* is only allowed in the select list or in count(*)");
	case ExpressionType::Semantic:
		if ((*expression.semantic)->agg) {
			return BindSemanticAggregate(**expression.semantic, context);
		}
		return BindSemantic(expression, context);
	case ExpressionType::Function:
		if (IsAggregateName(expression.op)) {
			return BindAggregate(expression, context);
		}
		return BindFunction(expression, context);
	case ExpressionType::Cast: {
		auto child = Bind(expression.children[0], context);
		if (child.type == BoundExpressionType::Constant) {
			try {
				return BoundExpression::Constant(child.value.CastAs(expression.cast_type));
			} catch (ConversionException &ex) {
				throw BinderException(std::string("cannot cast ") + child.ToString() + " to " +
				                      TypeName(expression.cast_type) + ": " + ex.RawMessage());
			}
		}
		BoundExpression result;
		result.type = BoundExpressionType::Cast;
		result.return_type = expression.cast_type;
		result.children.push_back(std::move(child));
		return result;
	}
	case ExpressionType::IsNull: {
		BoundExpression result;
		result.type = BoundExpressionType::IsNull;
		result.return_type = LogicalType::Boolean;
		result.negated = expression.negated;
		result.children.push_back(Bind(expression.children[0], context));
		return result;
	}
	case ExpressionType::Unary: {
		auto child = Bind(expression.children[0], context);
		if (expression.op == "NOT") {
			RequireType(child, LogicalType::Boolean, "NOT");
			return MakeUnary("NOT", std::move(child), LogicalType::Boolean);
		}
		RequireNumeric(child, "unary -");
		auto type = child.return_type;
		return MakeUnary("-", std::move(child), type);
	}
	case ExpressionType::Binary:
		break;
	}

	auto op = expression.op == "!=" ? std::string("<>") : expression.op;
	auto left = Bind(expression.children[0], context);
	auto right = Bind(expression.children[1], context);
	if (op == "AND" || op == "OR") {
		RequireType(left, LogicalType::Boolean, op);
		RequireType(right, LogicalType::Boolean, op);
		return BoundExpression::Binary(op, std::move(left), std::move(right), LogicalType::Boolean);
	}
	if (IsComparison(op)) {
		CoerceComparison(left, right);
		return BoundExpression::Binary(op, std::move(left), std::move(right), LogicalType::Boolean);
	}
	if (op == "LIKE") {
		RequireType(left, LogicalType::Varchar, "LIKE");
		RequireType(right, LogicalType::Varchar, "LIKE");
		return BoundExpression::Binary(op, std::move(left), std::move(right), LogicalType::Boolean);
	}
	if (op == "||") {
		return BoundExpression::Binary(op, std::move(left), std::move(right), LogicalType::Varchar);
	}
	RequireNumeric(left, op);
	RequireNumeric(right, op);
	LogicalType type = LogicalType::Double;
	if (op != "/" && left.return_type != LogicalType::Double && right.return_type != LogicalType::Double) {
		type = LogicalType::Integer;
	}
	return BoundExpression::Binary(op, std::move(left), std::move(right), type);
}

BoundExpression Binder::BindColumn(const ParsedExpression &expression, ExpressionContext &context) {
	auto &parts = expression.column_name;
	if (parts.size() > 2) {
		throw BinderException("column reference " + ColumnText(parts) + " has too many parts");
	}
	std::string qualifier = parts.size() == 2 ? parts[0] : "";
	auto binding = context.scope->Find(qualifier, parts.back());
	if (!binding) {
		if (expression.quoted) {
			warnings_.push_back("\"" + parts[0] + "\" does not name a column; reading it as the string literal '" +
			                    parts[0] + "'");
			return BoundExpression::Constant(Value::Varchar(parts[0]));
		}
		throw BinderException("column not found: " + ColumnText(parts));
	}
	if (context.aggregate) {
		for (auto &group : context.aggregate->group_bindings) {
			if (group.id == binding->id) {
				return BoundExpression::ColumnRef(group);
			}
		}
		throw BinderException("column " + ColumnText(parts) +
		                      " must appear in the GROUP BY clause or be used in an aggregate function");
	}
	bindings_by_id_.emplace(binding->id, *binding);
	return BoundExpression::ColumnRef(*binding);
}

BoundExpression Binder::BindFunction(const ParsedExpression &expression, ExpressionContext &context) {
	auto &name = expression.op;
	if (expression.star_argument || expression.distinct) {
		throw BinderException(name + "() does not accept * or DISTINCT");
	}
	BoundExpression result;
	result.type = BoundExpressionType::Function;
	result.op = name;
	for (auto &child : expression.children) {
		result.children.push_back(Bind(child, context));
	}
	auto &args = result.children;
	auto arity = [&](size_t min, size_t max) {
		if (args.size() < min || args.size() > max) {
			throw BinderException("wrong number of arguments to " + name + "()");
		}
	};
	if (name == "lower" || name == "upper" || name == "trim") {
		arity(1, 1);
		RequireType(args[0], LogicalType::Varchar, name + "()");
		result.return_type = LogicalType::Varchar;
	} else if (name == "length") {
		arity(1, 1);
		RequireType(args[0], LogicalType::Varchar, name + "()");
		result.return_type = LogicalType::Integer;
	} else if (name == "abs") {
		arity(1, 1);
		RequireNumeric(args[0], name + "()");
		result.return_type = args[0].return_type == LogicalType::Null ? LogicalType::Integer : args[0].return_type;
	} else if (name == "round") {
		arity(1, 2);
		RequireNumeric(args[0], name + "()");
		if (args.size() == 2) {
			RequireType(args[1], LogicalType::Integer, "round() digits");
		}
		result.return_type = LogicalType::Double;
	} else if (name == "coalesce") {
		arity(1, SIZE_MAX);
		result.return_type = LogicalType::Null;
		for (auto &arg : args) {
			if (!Comparable(result.return_type, arg.return_type)) {
				throw BinderException("type mismatch: coalesce() arguments must share a type");
			}
			if (result.return_type == LogicalType::Null || arg.return_type == LogicalType::Double) {
				result.return_type = arg.return_type;
			}
		}
	} else {
		throw BinderException("unknown function: " + name);
	}
	return result;
}

BoundExpression Binder::BindAggregate(const ParsedExpression &expression, ExpressionContext &context) {
	if (!context.aggregate) {
		throw BinderException(std::string("aggregate functions are not allowed in ") + context.clause);
	}
	auto &aggregate = *context.aggregate;
	BoundAggregate result;
	result.distinct = expression.distinct;
	auto &name = expression.op;
	if (expression.star_argument) {
		if (name != "count") {
			throw BinderException(name + "(*) is not supported");
		}
		result.function = AggregateFunction::CountStar;
	} else {
		if (expression.children.size() != 1) {
			throw BinderException("wrong number of arguments to " + name + "()");
		}
		ExpressionContext inner;
		inner.scope = context.scope;
		inner.plan = &aggregate.children[0];
		inner.clause = "aggregate argument";
		if (HasAggregate(expression.children[0])) {
			throw BinderException("aggregate function calls cannot be nested");
		}
		result.arguments.push_back(Bind(expression.children[0], inner));
		auto arg_type = result.arguments[0].return_type;
		if (name == "count") {
			result.function = AggregateFunction::Count;
		} else if (name == "sum") {
			RequireNumeric(result.arguments[0], "sum()");
			result.function = AggregateFunction::Sum;
			result.return_type = arg_type == LogicalType::Double ? LogicalType::Double : LogicalType::Integer;
		} else if (name == "avg") {
			RequireNumeric(result.arguments[0], "avg()");
			result.function = AggregateFunction::Avg;
			result.return_type = LogicalType::Double;
		} else {
			result.function = name == "min" ? AggregateFunction::Min : AggregateFunction::Max;
			result.return_type = arg_type;
		}
	}
	if (result.function == AggregateFunction::CountStar || result.function == AggregateFunction::Count) {
		result.return_type = LogicalType::Integer;
	}
	for (size_t i = 0; i < aggregate.aggregates.size(); i++) {
		auto &existing = aggregate.aggregates[i];
		if (existing.function == result.function && existing.distinct == result.distinct &&
		    existing.arguments == result.arguments && !existing.predict) {
			return BoundExpression::ColumnRef(aggregate.aggregate_bindings[i]);
		}
	}
	auto binding = NewBinding(OutputName(expression), "", result.return_type, ColumnOrigin::Stored);
	aggregate.aggregates.push_back(std::move(result));
	aggregate.aggregate_bindings.push_back(binding);
	return BoundExpression::ColumnRef(binding);
}

std::shared_ptr<PredictInfo> Binder::BuildScalarPredict(const SemanticCall &call, ExpressionContext &context) {
	auto model = LookupModel(call.model);
	auto info = std::make_shared<PredictInfo>();
	info->model = model;
	info->hints = call.options;
	info->mode = PredictMode::Scalar;

	std::pair<std::string, LogicalType> output;
	if (call.type == SemanticCallType::Llm) {
		if (model->type != ModelType::Llm) {
			throw BinderException("model " + model->name + " is " + ModelTypeName(model->type) +
			                      "; the LLM clause requires an LLM model");
		}
		info->prompt = *call.prompt;
		auto &outputs = info->prompt.Outputs();
		if (outputs.empty()) {
			if (!context.predicate) {
				throw BinderException("LLM " + model->name + " in " + context.clause +
				                      " must declare one output {name TYPE} in its prompt");
			}
			output = {kImplicitPredicateOutput, LogicalType::Boolean};
			info->implicit_output = true;
		} else if (outputs.size() > 1) {
			throw BinderException("LLM " + model->name + " in " + context.clause +
			                      " must declare exactly one output; move it to FROM to predict several columns");
		} else {
			output = {outputs[0].name, outputs[0].type};
		}
		info->inputs = ResolvePromptInputs(info->prompt, [&](const PromptInput &input) {
			ParsedExpression reference;
			reference.type = ExpressionType::Column;
			if (!input.qualifier.empty()) {
				reference.column_name.push_back(input.qualifier);
			}
			reference.column_name.push_back(input.column);
			ExpressionContext lookup = context;
			try {
				auto bound = BindColumn(reference, lookup);
				return bindings_by_id_.at(bound.column);
			} catch (BinderException &ex) {
				throw BinderException("prompt input {{" + input.Key() + "}} is not in scope: " + ex.RawMessage());
			}
		});
	} else {
		if (model->type != ModelType::Tabular) {
			throw BinderException("PREDICT requires a TABULAR model; " + model->name + " is " +
			                      ModelTypeName(model->type));
		}
		if (call.arguments.size() != model->input_set.size()) {
			throw BinderException("PREDICT " + model->name + " expects " + std::to_string(model->input_set.size()) +
			                      " feature arguments, got " + std::to_string(call.arguments.size()));
		}
		if (model->output_set.size() != 1) {
			throw BinderException("PREDICT " + model->name +
			                      " in an expression needs a model with exactly one output column");
		}
		for (size_t i = 0; i < call.arguments.size(); i++) {
			auto &argument = call.arguments[i];
			if (argument.type != ExpressionType::Column) {
				throw BinderException("PREDICT arguments must be column references");
			}
			auto bound = BindColumn(argument, context);
			auto &binding = bindings_by_id_.at(bound.column);
			info->inputs.push_back({model->input_set[i], binding.id, binding.type, binding.QualifiedName()});
		}
		output = {model->output_set[0].name, model->output_set[0].type};
	}
	info->outputs.push_back(NewBinding(output.first, "", output.second, ColumnOrigin::Predicted));
	return info;
}

BoundExpression Binder::BindSemantic(const ParsedExpression &expression, ExpressionContext &context) {
	auto &call = **expression.semantic;
	if (!context.plan) {
		throw BinderException(std::string(call.type == SemanticCallType::Llm ? "LLM" : "PREDICT") +
		                      " is not allowed in " + context.clause);
	}
	auto info = BuildScalarPredict(call, context);
	auto output = info->outputs[0];
	auto required = info->InputColumns();
	InsertAboveDeepestProvider(*context.plan, required,
	                           [&]() { return std::make_unique<LogicalPredict>(info); });
	return BoundExpression::ColumnRef(output);
}

BoundExpression Binder::BindSemanticAggregate(const SemanticCall &call, ExpressionContext &context) {
	if (!context.aggregate) {
		throw BinderException(std::string("LLM AGG is not allowed in ") + context.clause);
	}
	auto model = LookupModel(call.model);
	if (model->type != ModelType::Llm) {
		throw BinderException("model " + model->name + " is " + ModelTypeName(model->type) +
		                      "; LLM AGG requires an LLM model");
	}
	auto info = std::make_shared<PredictInfo>();
	info->model = model;
	info->hints = call.options;
	info->mode = PredictMode::Aggregate;
	info->prompt = *call.prompt;
	auto &outputs = info->prompt.Outputs();
	std::pair<std::string, LogicalType> output {"summary", LogicalType::Varchar};
	if (outputs.size() > 1) {
		throw BinderException("LLM AGG " + model->name + " must declare at most one output");
	}
	if (outputs.size() == 1) {
		output = {outputs[0].name, outputs[0].type};
	} else {
		info->implicit_output = true;
	}
	info->inputs = ResolvePromptInputs(info->prompt, [&](const PromptInput &input) {
		auto binding = context.scope->Find(input.qualifier, input.column);
		if (!binding) {
			throw BinderException("prompt input {{" + input.Key() + "}} is not in scope");
		}
		return *binding;
	});
	info->outputs.push_back(NewBinding(output.first, "", output.second, ColumnOrigin::Predicted));

	BoundAggregate aggregate;
	aggregate.function = AggregateFunction::Semantic;
	aggregate.return_type = output.second;
	aggregate.predict = info;
	context.aggregate->aggregates.push_back(std::move(aggregate));
	context.aggregate->aggregate_bindings.push_back(info->outputs[0]);
	return BoundExpression::ColumnRef(info->outputs[0]);
}

} // namespace semaquery
