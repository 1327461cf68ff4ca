#pragma once

#include "semaquery/catalog/model_catalog.hpp"
#include "semaquery/sql/options.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace semaquery {

enum class ErrorPolicy : uint8_t { Null, Fail };
enum class StructuredOutputMode : uint8_t { JsonSchemaParam, InstructionOnly };

//! Execution settings for one predict operator. Resolved per field as model OPTIONS > session SET > default.
struct PredictConfig {
	int64_t batch_size = 16;
	int64_t n_threads = 16;
	bool use_batching = true;
	bool use_dedup = true;
	int64_t max_retries = 2;
	//! Base delay; attempt k waits retry_backoff_ms * 2^(k-1).
	int64_t retry_backoff_ms = 250;
	std::optional<double> rate_limit_rpm;
	ErrorPolicy error_policy = ErrorPolicy::Null;
	//! Batches whose rendered prompt exceeds this are split before dispatch.
	int64_t max_prompt_chars = 200000;
	int64_t max_generated_rows = 1024;
	int64_t timeout_ms = 60000;
	StructuredOutputMode structured_output = StructuredOutputMode::JsonSchemaParam;
	//! Model keyword arguments forwarded to the backend untouched (temperature, top_p, max_tokens, ...).
	OptionMap kwargs;

	//! Rows per marshaled prompt after applying use_batching.
	size_t EffectiveBatchSize() const {
		return use_batching ? static_cast<size_t>(batch_size) : 1;
	}

	//! Throws ConfigException for non-numeric values of numeric options and out-of-range values.
	static PredictConfig Resolve(const OptionMap &model_options, const OptionMap &session);
	//! Validates one SET value without building a config. Unknown names return false.
	static bool IsPredictSetting(const std::string &name);
};

//! Option readers shared with other settings. Each throws ConfigException naming the option on a bad value.
int64_t OptionAsInteger(const std::string &name, const OptionValue &value);
double OptionAsDouble(const std::string &name, const OptionValue &value);
bool OptionAsBoolean(const std::string &name, const OptionValue &value);

} // namespace semaquery
