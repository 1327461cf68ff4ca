#pragma once

#include "semaquery/catalog/model_catalog.hpp"
#include "semaquery/core/table.hpp"
#include "semaquery/planner/logical_operator.hpp"
#include "semaquery/sql/ast.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace semaquery {

//! Output of binding a SELECT.
struct BoundQuery {
	std::unique_ptr<LogicalOperator> plan;
	std::vector<std::string> names;
	std::vector<LogicalType> types;
	std::vector<std::string> warnings;
};

//! Output column name used when a Boolean prompt in a WHERE/ON/HAVING position declares no output.
constexpr const char *kImplicitPredicateOutput = "result";

//! Resolves names against the table and model catalogs and builds the logical plan.
//!
//! Placement rules for model inference:
//!  - FROM-position LLM with an input relation becomes a table-inference Predict over that relation;
//!    without one it becomes a table-generation Predict leaf.
//!  - LLM/PREDICT in an expression becomes a scalar Predict inserted directly above the deepest operator that
//!    provides all of its inputs; the consuming expression then reads the predicted column.
//!  - A WHERE or ON conjunct containing inference becomes a Filter directly above its Predict. WHERE conjuncts are
//!    processed last-to-first, so the first semantic conjunct written ends up lowest. Classical WHERE conjuncts
//!    form one Filter on top of the FROM tree.
//!  - LLM AGG becomes a semantic aggregate inside the Aggregate operator.
class Binder {
public:
	Binder(const TableCatalog &tables, const ModelCatalog &models);
	~Binder();

	BoundQuery BindSelect(const SelectStatement &statement);
	//! Binds an expression without columns (INSERT ... VALUES).
	BoundExpression BindConstant(const ParsedExpression &expression);

	const std::vector<std::string> &Warnings() const {
		return warnings_;
	}

	struct Scope;
	struct ExpressionContext;

private:
	std::unique_ptr<LogicalOperator> BindFrom(const TableRef &ref, Scope &scope);
	std::unique_ptr<LogicalOperator> BindSemanticSource(const SemanticCall &call, const std::string &alias,
	                                                    Scope &scope);
	void BindWhere(const ParsedExpression &where, const Scope &scope, std::unique_ptr<LogicalOperator> &plan);
	void BindJoinCondition(const ParsedExpression &condition, const Scope &scope, LogicalJoin &join,
	                       std::unique_ptr<LogicalOperator> &plan);

	BoundExpression Bind(const ParsedExpression &expression, ExpressionContext &context);
	BoundExpression BindColumn(const ParsedExpression &expression, ExpressionContext &context);
	BoundExpression BindFunction(const ParsedExpression &expression, ExpressionContext &context);
	BoundExpression BindAggregate(const ParsedExpression &expression, ExpressionContext &context);
	BoundExpression BindSemantic(const ParsedExpression &expression, ExpressionContext &context);
	BoundExpression BindSemanticAggregate(const SemanticCall &call, ExpressionContext &context);
	std::shared_ptr<PredictInfo> BuildScalarPredict(const SemanticCall &call, ExpressionContext &context);
	std::vector<PredictInput> ResolvePromptInputs(const PromptTemplate &prompt,
	                                              const std::function<ColumnBinding(const PromptInput &)> &resolve);

	ColumnBinding NewBinding(std::string name, std::string qualifier, LogicalType type, ColumnOrigin origin);
	std::shared_ptr<const ModelEntry> LookupModel(const std::string &name) const;

	const TableCatalog &tables_;
	const ModelCatalog &models_;
	ColumnId next_id_ = 1;
	//! Every binding created or resolved so far, for naming and type lookups.
	std::map<ColumnId, ColumnBinding> bindings_by_id_;
	std::vector<std::string> warnings_;
};

//! Inserts `make()` directly above the deepest operator under `slot` that provides every column in `required`.
//! Only descends through operators that pass their child's columns up (Filter, Order, Limit, Join, Predict).
void InsertAboveDeepestProvider(std::unique_ptr<LogicalOperator> &slot, const std::set<ColumnId> &required,
                                const std::function<std::unique_ptr<LogicalOperator>()> &make);

//! Parsed expressions contain an LLM or PREDICT clause.
bool ContainsSemantic(const ParsedExpression &expression);

} // namespace semaquery
