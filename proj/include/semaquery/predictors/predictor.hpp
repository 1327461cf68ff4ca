#pragma once

#include "semaquery/catalog/model_catalog.hpp"
#include "semaquery/core/data_chunk.hpp"
#include "semaquery/planner/predict_info.hpp"
#include "semaquery/predict/predict_config.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semaquery {

using ordered_json = nlohmann::ordered_json;

//! One backend invocation: a rendered prompt over up to batch_size tuples.
struct PredictRequest {
	const PredictInfo *info = nullptr;
	PredictMode mode = PredictMode::Scalar;
	std::string system;
	std::string user;
	//! The tuples as marshaled into `user`: objects with row_id first, then one member per input key.
	//! Empty for table generation.
	ordered_json tuples = ordered_json::array();
	//! Typed input values parallel to `tuples` (one entry per input key). Empty for aggregates and generation.
	std::vector<Row> rows;
	//! Set on the re-prompt that follows malformed output.
	bool strict = false;
};

struct PredictResponse {
	//! Raw assistant text, parsed by the executor.
	std::string text;
	//! Backends that compute typed values directly (tabular models) fill this instead of `text`.
	std::optional<std::vector<Row>> records;
	uint64_t input_tokens = 0;
	uint64_t output_tokens = 0;
	//! Transport-level retries the backend performed itself (HTTP 429).
	uint64_t retries = 0;
};

//! Executor contract for a model backend: configure, load once, then predict concurrently.
class Predictor {
public:
	virtual ~Predictor() = default;

	virtual std::string Name() const = 0;
	//! Validates settings and acquires resources. Throws ConfigException before any request is made.
	virtual void Load(const ModelEntry &model, const PredictConfig &config) {
		(void)model;
		(void)config;
	}
	//! Thread-safe. Throws BackendException on failure.
	virtual PredictResponse Predict(const PredictRequest &request) = 0;
};

//! JSON form of a value as marshaled into prompts: NULL as null, timestamps as ISO-8601 strings.
ordered_json ValueToJson(const Value &value);

} // namespace semaquery
