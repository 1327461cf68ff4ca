#include "semaquery/predict/predict_config.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <array>
#include <cmath>

namespace semaquery {

namespace {

constexpr std::array<const char *, 13> kPredictSettings {
    "batch_size",       "n_threads",          "use_batching", "use_dedup",  "max_retries",
    "retry_backoff_ms", "rate_limit_rpm",     "error_policy", "max_prompt_chars",
    "max_generated_rows", "timeout_ms",       "structured_output", "temperature"};

//! Options that configure the engine or the catalog rather than being forwarded to the model.
constexpr std::array<const char *, 6> kEngineOptions {"backend", "fixture", "selectivity", "quality", "stub", "secret"};

const OptionValue *Pick(const OptionMap &model, const OptionMap &session, const char *key) {
	if (auto value = model.Find(key)) {
		return value;
	}
	return session.Find(key);
}

[[noreturn]] void BadValue(const std::string &name, const OptionValue &value, const char *expected) {
	throw ConfigException("option " + name + " expects " + expected + ", got " + OptionValueToSQL(value));
}

} // namespace

int64_t OptionAsInteger(const std::string &name, const OptionValue &value) {
	if (auto i = std::get_if<int64_t>(&value)) {
		return *i;
	}
	if (auto d = std::get_if<double>(&value)) {
		if (std::floor(*d) == *d) {
			return static_cast<int64_t>(*d);
		}
	}
	if (auto s = std::get_if<std::string>(&value)) {
		if (auto parsed = string_util::ParseInteger(string_util::Trim(*s))) {
			return *parsed;
		}
	}
	BadValue(name, value, "an integer");
}

double OptionAsDouble(const std::string &name, const OptionValue &value) {
	if (auto d = std::get_if<double>(&value)) {
		return *d;
	}
	if (auto i = std::get_if<int64_t>(&value)) {
		return static_cast<double>(*i);
	}
	if (auto s = std::get_if<std::string>(&value)) {
		if (auto parsed = string_util::ParseDouble(string_util::Trim(*s))) {
			return *parsed;
		}
	}
	BadValue(name, value, "a number");
}

bool OptionAsBoolean(const std::string &name, const OptionValue &value) {
	if (auto b = std::get_if<bool>(&value)) {
		return *b;
	}
	if (auto i = std::get_if<int64_t>(&value)) {
		if (*i == 0 || *i == 1) {
			return *i == 1;
		}
	}
	if (auto s = std::get_if<std::string>(&value)) {
		auto lower = string_util::Lower(string_util::Trim(*s));
		if (lower == "true" || lower == "on" || lower == "1" || lower == "yes") {
			return true;
		}
		if (lower == "false" || lower == "off" || lower == "0" || lower == "no") {
			return false;
		}
	}
	BadValue(name, value, "a boolean");
}

bool PredictConfig::IsPredictSetting(const std::string &name) {
	for (auto setting : kPredictSettings) {
		if (string_util::EqualsIgnoreCase(name, setting)) {
			return true;
		}
	}
	return false;
}

PredictConfig PredictConfig::Resolve(const OptionMap &model_options, const OptionMap &session) {
	PredictConfig config;
	auto integer = [&](const char *key, int64_t &target, int64_t minimum) {
		if (auto value = Pick(model_options, session, key)) {
			target = OptionAsInteger(key, *value);
			if (target < minimum) {
				throw ConfigException(std::string("option ") + key + " must be at least " + std::to_string(minimum));
			}
		}
	};
	integer("batch_size", config.batch_size, 1);
	integer("n_threads", config.n_threads, 1);
	integer("max_retries", config.max_retries, 0);
	integer("retry_backoff_ms", config.retry_backoff_ms, 0);
	integer("max_prompt_chars", config.max_prompt_chars, 1);
	integer("max_generated_rows", config.max_generated_rows, 0);
	integer("timeout_ms", config.timeout_ms, 1);
	if (auto value = Pick(model_options, session, "use_batching")) {
		config.use_batching = OptionAsBoolean("use_batching", *value);
	}
	if (auto value = Pick(model_options, session, "use_dedup")) {
		config.use_dedup = OptionAsBoolean("use_dedup", *value);
	}
	if (auto value = Pick(model_options, session, "rate_limit_rpm")) {
		auto rpm = OptionAsDouble("rate_limit_rpm", *value);
		if (rpm < 0) {
			throw ConfigException("option rate_limit_rpm must not be negative");
		}
		if (rpm > 0) {
			config.rate_limit_rpm = rpm;
		}
	}
	if (auto value = Pick(model_options, session, "error_policy")) {
		auto text = string_util::Lower(OptionValueToString(*value));
		if (text == "null") {
			config.error_policy = ErrorPolicy::Null;
		} else if (text == "fail") {
			config.error_policy = ErrorPolicy::Fail;
		} else {
			BadValue("error_policy", *value, "'null' or 'fail'");
		}
	}
	if (auto value = Pick(model_options, session, "structured_output")) {
		auto text = string_util::Lower(OptionValueToString(*value));
		if (text == "json_schema_param") {
			config.structured_output = StructuredOutputMode::JsonSchemaParam;
		} else if (text == "instruction_only") {
			config.structured_output = StructuredOutputMode::InstructionOnly;
		} else {
			BadValue("structured_output", *value, "'json_schema_param' or 'instruction_only'");
		}
	}
	// Session-level temperature applies unless the model sets its own.
	if (auto value = session.Find("temperature")) {
		config.kwargs.Set("temperature", OptionValue(OptionAsDouble("temperature", *value)));
	}
	for (auto &[key, value] : model_options) {
		auto lower = string_util::Lower(key);
		bool engine = lower != "temperature" && IsPredictSetting(lower);
		for (auto option : kEngineOptions) {
			engine |= lower == option;
		}
		if (!engine) {
			config.kwargs.Set(lower, value);
		}
	}
	return config;
}

} // namespace semaquery
