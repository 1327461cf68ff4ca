#pragma once

#include "semaquery/core/table.hpp"
#include "semaquery/planner/bound_expression.hpp"
#include "semaquery/planner/predict_info.hpp"

#include <memory>
#include <string>
#include <vector>

namespace semaquery {

enum class LogicalOperatorType : uint8_t { Get, Filter, Project, Join, Aggregate, Order, Limit, Predict };

const char *LogicalOperatorTypeName(LogicalOperatorType type);

class LogicalOperator {
public:
	explicit LogicalOperator(LogicalOperatorType type) : type(type) {
	}
	virtual ~LogicalOperator() = default;

	LogicalOperatorType type;
	std::vector<std::unique_ptr<LogicalOperator>> children;

	//! Output columns in order.
	virtual std::vector<ColumnBinding> Columns() const = 0;
	//! Operator-specific EXPLAIN detail.
	virtual std::string ParamString() const = 0;
	//! Deep copy including children.
	std::unique_ptr<LogicalOperator> Copy() const;

	bool ProducesAll(const std::set<ColumnId> &ids) const;

	template <class T>
	T &Cast() {
		return static_cast<T &>(*this);
	}
	template <class T>
	const T &Cast() const {
		return static_cast<const T &>(*this);
	}

protected:
	virtual std::unique_ptr<LogicalOperator> CopyNode() const = 0;
};

//! Base table scan. A null table is the single-row, zero-column source used by SELECT without FROM.
class LogicalGet : public LogicalOperator {
public:
	LogicalGet(std::shared_ptr<const Table> table, std::vector<ColumnBinding> bindings)
	    : LogicalOperator(LogicalOperatorType::Get), table(std::move(table)), bindings(std::move(bindings)) {
	}

	std::shared_ptr<const Table> table;
	std::vector<ColumnBinding> bindings;

	std::vector<ColumnBinding> Columns() const override {
		return bindings;
	}
	std::string ParamString() const override;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

class LogicalFilter : public LogicalOperator {
public:
	explicit LogicalFilter(std::vector<BoundExpression> conditions)
	    : LogicalOperator(LogicalOperatorType::Filter), conditions(std::move(conditions)) {
	}

	//! Conjuncts.
	std::vector<BoundExpression> conditions;

	std::vector<ColumnBinding> Columns() const override {
		return children[0]->Columns();
	}
	std::string ParamString() const override;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

class LogicalProject : public LogicalOperator {
public:
	LogicalProject(std::vector<BoundExpression> expressions, std::vector<ColumnBinding> bindings)
	    : LogicalOperator(LogicalOperatorType::Project), expressions(std::move(expressions)),
	      bindings(std::move(bindings)) {
	}

	std::vector<BoundExpression> expressions;
	std::vector<ColumnBinding> bindings;
	//! The query's output projection; pull-up never crosses it.
	bool is_root = false;

	std::vector<ColumnBinding> Columns() const override {
		return bindings;
	}
	std::string ParamString() const override;
	//! Every expression is a bare column reference.
	bool IsPassThrough() const;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

enum class LogicalJoinType : uint8_t { Inner, Cross };

class LogicalJoin : public LogicalOperator {
public:
	LogicalJoin(LogicalJoinType join_type, std::vector<BoundExpression> conditions)
	    : LogicalOperator(LogicalOperatorType::Join), join_type(join_type), conditions(std::move(conditions)) {
	}

	LogicalJoinType join_type;
	std::vector<BoundExpression> conditions;

	std::vector<ColumnBinding> Columns() const override;
	std::string ParamString() const override;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

enum class AggregateFunction : uint8_t { CountStar, Count, Sum, Avg, Min, Max, Semantic };

const char *AggregateFunctionName(AggregateFunction function);

struct BoundAggregate {
	AggregateFunction function = AggregateFunction::CountStar;
	std::vector<BoundExpression> arguments;
	bool distinct = false;
	LogicalType return_type = LogicalType::Integer;
	//! Semantic aggregate only.
	std::shared_ptr<PredictInfo> predict;

	std::string ToString() const;
};

class LogicalAggregate : public LogicalOperator {
public:
	LogicalAggregate() : LogicalOperator(LogicalOperatorType::Aggregate) {
	}

	std::vector<BoundExpression> groups;
	std::vector<ColumnBinding> group_bindings;
	std::vector<BoundAggregate> aggregates;
	std::vector<ColumnBinding> aggregate_bindings;

	std::vector<ColumnBinding> Columns() const override;
	std::string ParamString() const override;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

struct BoundOrder {
	BoundExpression expression;
	bool descending = false;
};

class LogicalOrder : public LogicalOperator {
public:
	explicit LogicalOrder(std::vector<BoundOrder> orders)
	    : LogicalOperator(LogicalOperatorType::Order), orders(std::move(orders)) {
	}

	std::vector<BoundOrder> orders;

	std::vector<ColumnBinding> Columns() const override {
		return children[0]->Columns();
	}
	std::string ParamString() const override;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

class LogicalLimit : public LogicalOperator {
public:
	explicit LogicalLimit(int64_t limit) : LogicalOperator(LogicalOperatorType::Limit), limit(limit) {
	}

	int64_t limit;

	std::vector<ColumnBinding> Columns() const override {
		return children[0]->Columns();
	}
	std::string ParamString() const override;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

//! Model inference. Table inference and scalar modes append the predicted columns to the child's columns;
//! table generation is a leaf whose columns are the predicted ones.
class LogicalPredict : public LogicalOperator {
public:
	explicit LogicalPredict(std::shared_ptr<PredictInfo> info)
	    : LogicalOperator(LogicalOperatorType::Predict), info(std::move(info)) {
	}

	std::shared_ptr<PredictInfo> info;
	//! Set by order_select_vs_join when it places a select below a join; pull-up leaves it there.
	bool pinned = false;

	std::vector<ColumnBinding> Columns() const override;
	std::string ParamString() const override;

protected:
	std::unique_ptr<LogicalOperator> CopyNode() const override;
};

//! Indented tree rendering, one operator per line. Stable across runs.
std::string ExplainPlan(const LogicalOperator &plan);

//! Pre-order traversal helper.
template <class F>
void VisitPlan(const LogicalOperator &op, F &&callback) {
	callback(op);
	for (auto &child : op.children) {
		VisitPlan(*child, callback);
	}
}

} // namespace semaquery
