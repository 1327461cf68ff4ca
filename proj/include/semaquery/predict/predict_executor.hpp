#pragma once

#include "semaquery/predict/call_stats.hpp"
#include "semaquery/predict/dedup_cache.hpp"
#include "semaquery/predict/predict_config.hpp"
#include "semaquery/predict/prompt_renderer.hpp"
#include "semaquery/predict/rate_limiter.hpp"
#include "semaquery/predictors/predictor.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semaquery {

//! Runs model inference for one predict operator: dedup, marshaling into batches, parallel dispatch, re-prompt on
//! malformed output, per-row fallback for failed batches, retries with exponential backoff, and typed extraction.
//!
//! Call accounting: every first attempt and every strict re-prompt counts as a call; repeated attempts of a failed
//! single-row call count as retries. A batch that fails is counted once in fallback_batches and its rows are then
//! sent one per call.
class PredictExecutor {
public:
	using WarningSink = std::function<void(const std::string &)>;

	PredictExecutor(std::shared_ptr<const PredictInfo> info, PredictConfig config,
	                std::shared_ptr<Predictor> predictor, std::shared_ptr<RateLimiter> limiter, CallStats &stats,
	                WarningSink warn = nullptr);

	//! Table inference and scalar modes. `inputs[i]` holds the values of PredictInfo::inputs for row i; the result
	//! has one row of output values per input row, in the same order.
	std::vector<Row> PredictRows(const std::vector<Row> &inputs);
	//! Semantic aggregate: one call per group with each input key mapped to the array of member values.
	//! Groups whose values are all NULL (or that are empty) yield NULL without a call.
	std::vector<Value> PredictGroups(const std::vector<std::vector<Row>> &groups);
	//! Table generation: one call; the returned records become rows, capped at max_generated_rows.
	std::vector<Row> Generate();

	const PredictConfig &Config() const {
		return config_;
	}
	const DedupCache &Cache() const {
		return cache_;
	}

private:
	struct Unit {
		std::string key;
		Row inputs;
		//! Tuple members other than row_id.
		ordered_json payload;
		std::vector<size_t> rows;
	};
	struct Outcome {
		std::optional<ParsedRecord> record;
		std::string error;
	};

	std::vector<Outcome> Dispatch(const std::vector<Unit> &units);
	std::vector<std::vector<size_t>> MakeBatches(const std::vector<Unit> &units) const;
	PredictRequest BuildRequest(const std::vector<Unit> &units, const std::vector<size_t> &batch, bool strict) const;
	//! Returns false when the batch failed as a whole and must fall back to single-row calls.
	bool RunBatch(const std::vector<Unit> &units, const std::vector<size_t> &batch, std::vector<Outcome> &outcomes);
	Outcome RunSingle(const Unit &unit);
	PredictResponse Invoke(const PredictRequest &request);
	std::vector<ParsedRecord> Decode(const PredictResponse &response, size_t expected) const;
	void Backoff(size_t attempt) const;
	void Warn(const std::string &message) const;

	std::shared_ptr<const PredictInfo> info_;
	PredictConfig config_;
	std::shared_ptr<Predictor> predictor_;
	std::shared_ptr<RateLimiter> limiter_;
	CallStats &stats_;
	WarningSink warn_;
	PromptRenderer renderer_;
	DedupCache cache_;
};

} // namespace semaquery
