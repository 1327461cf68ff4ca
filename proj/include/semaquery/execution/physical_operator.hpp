#pragma once

#include "semaquery/core/data_chunk.hpp"
#include "semaquery/planner/logical_operator.hpp"
#include "semaquery/predict/call_stats.hpp"
#include "semaquery/predict/predict_config.hpp"
#include "semaquery/predict/rate_limiter.hpp"
#include "semaquery/predictors/predictor.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace semaquery {

//! Per-query execution state shared by all operators of one plan.
class ExecutionContext {
public:
	using PredictorFactory = std::function<std::shared_ptr<Predictor>(const ModelEntry &, const PredictConfig &)>;

	//! Session SET values; model OPTIONS take precedence over these.
	OptionMap settings;
	size_t chunk_capacity = kDefaultChunkCapacity;
	//! Returns a loaded predictor for the model.
	PredictorFactory predictor_factory;

	void Warn(const std::string &message);
	std::vector<std::string> Warnings() const;

	//! One limiter per model and query, shared by every predict operator using that model.
	std::shared_ptr<RateLimiter> Limiter(const ModelEntry &model, const PredictConfig &config);

	//! Registers a predict operator's counters for totals.
	void RegisterStats(const CallStats *stats);
	CallStatsSnapshot TotalStats() const;

private:
	mutable std::mutex mutex_;
	std::vector<std::string> warnings_;
	std::map<std::string, std::shared_ptr<RateLimiter>> limiters_;
	std::vector<const CallStats *> stats_;
};

//! Pull-based operator: Next() returns chunks until the input is exhausted.
class PhysicalOperator {
public:
	explicit PhysicalOperator(std::vector<ColumnBinding> columns);
	virtual ~PhysicalOperator() = default;

	//! Fills `out` with the next non-empty chunk. Returns false when exhausted.
	bool Next(ExecutionContext &context, DataChunk &out);

	virtual std::string Name() const = 0;
	virtual std::string Detail() const {
		return "";
	}
	//! Inference counters for operators that call models.
	virtual const CallStats *Stats() const {
		return nullptr;
	}

	std::vector<std::unique_ptr<PhysicalOperator>> children;
	std::vector<ColumnBinding> columns;
	uint64_t rows_out = 0;
	uint64_t micros = 0;

protected:
	virtual bool GetChunk(ExecutionContext &context, DataChunk &out) = 0;
	std::vector<ColumnSchema> OutputSchema() const;
};

//! Builds the executable tree for a logical plan. Expressions are resolved to chunk positions here.
std::unique_ptr<PhysicalOperator> CreatePhysicalPlan(const LogicalOperator &plan, ExecutionContext &context);

//! Drains the operator into rows.
std::vector<Row> CollectRows(PhysicalOperator &root, ExecutionContext &context);

//! Operator tree with output row counts, time and inference counters.
std::string ExplainAnalyze(const PhysicalOperator &root);

} // namespace semaquery
