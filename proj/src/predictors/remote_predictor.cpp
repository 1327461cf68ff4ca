#include "semaquery/predictors/remote_predictor.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"
#include "semaquery/predictors/structured_output.hpp"

#include <chrono>
#include <thread>

namespace semaquery {

namespace {

ordered_json OptionToJson(const OptionValue &value) {
	return std::visit([](auto &&v) { return ordered_json(v); }, value);
}

std::vector<PromptOutput> OutputsOf(const PredictInfo &info) {
	std::vector<PromptOutput> outputs;
	for (auto &output : info.outputs) {
		outputs.push_back(PromptOutput {output.name, output.type});
	}
	return outputs;
}

} // namespace

std::string ChatCompletionsUrl(const std::string &base) {
	auto trimmed = std::string(string_util::Trim(base));
	if (string_util::EndsWith(trimmed, "/v1/")) {
		return trimmed + "chat/completions";
	}
	if (string_util::EndsWith(trimmed, "/v1")) {
		return trimmed + "/chat/completions";
	}
	while (!trimmed.empty() && trimmed.back() == '/') {
		trimmed.pop_back();
	}
	return trimmed + "/v1/chat/completions";
}

std::string SecretNameFor(const ModelEntry &model) {
	return model.secret.value_or(model.name);
}

ordered_json BuildChatRequest(const std::string &model_path, const PredictRequest &request,
                              const PredictConfig &config) {
	ordered_json body = ordered_json::object();
	body["model"] = model_path;
	auto messages = ordered_json::array();
	messages.push_back({{"role", "system"}, {"content", request.system}});
	messages.push_back({{"role", "user"}, {"content", request.user}});
	body["messages"] = std::move(messages);
	for (auto &[key, value] : config.kwargs) {
		body[key] = OptionToJson(value);
	}
	if (config.structured_output == StructuredOutputMode::JsonSchemaParam && request.info) {
		auto outputs = OutputsOf(*request.info);
		if (request.mode == PredictMode::TableGeneration) {
			auto format = BuildResponseFormat(outputs);
			format["json_schema"]["schema"]["properties"]["predictions"]["items"] = BuildJsonSchema(outputs, false);
			body["response_format"] = std::move(format);
		} else {
			body["response_format"] = BuildResponseFormat(outputs);
		}
	}
	return body;
}

RemotePredictor::RemotePredictor(std::shared_ptr<HttpTransport> transport, std::shared_ptr<const SecretStore> secrets,
                                 std::shared_ptr<RateLimiter> limiter)
    : transport_(std::move(transport)), secrets_(std::move(secrets)), limiter_(std::move(limiter)) {
}

void RemotePredictor::Load(const ModelEntry &model, const PredictConfig &config) {
	if (!model.base_api) {
		throw ConfigException("model " + model.name + " has no API base URL; the remote backend needs ON PROMPT API");
	}
	url_ = ChatCompletionsUrl(*model.base_api);
	SplitUrl(url_);
	auto secret_name = SecretNameFor(model);
	auto key = secrets_ ? secrets_->Get(secret_name) : std::nullopt;
	if (!key) {
		throw ConfigException("no secret named '" + secret_name + "' for model " + model.name + "; set " +
		                      SecretStore::EnvironmentVariable(secret_name) + " or add it to the secrets file");
	}
	api_key_ = std::move(*key);
	model_path_ = model.path;
	config_ = config;
	loaded_ = true;
}

std::string RemotePredictor::Redact(std::string text) const {
	if (api_key_.empty()) {
		return text;
	}
	size_t pos = 0;
	while ((pos = text.find(api_key_, pos)) != std::string::npos) {
		text.replace(pos, api_key_.size(), "[redacted]");
	}
	return text;
}

PredictResponse RemotePredictor::Predict(const PredictRequest &request) {
	if (!loaded_) {
		throw ConfigException("remote predictor used before Load");
	}
	HttpRequest http;
	http.url = url_;
	http.timeout_ms = config_.timeout_ms;
	http.headers = {{"Authorization", "Bearer " + api_key_}, {"Content-Type", "application/json"}};
	http.body = BuildChatRequest(model_path_, request, config_).dump();

	PredictResponse result;
	for (size_t attempt = 0;; attempt++) {
		auto response = transport_->Send(http);
		if (response.status == 429) {
			// 429 retries happen here; the executor must not multiply them with its own.
			if (attempt >= static_cast<size_t>(config_.max_retries)) {
				throw BackendException("rate limited by " + url_ + " (HTTP 429) after " + std::to_string(attempt) +
				                           " retries",
				                       false);
			}
			result.retries++;
			auto delay = std::chrono::milliseconds(config_.retry_backoff_ms << std::min<size_t>(attempt, 20));
			auto header = response.headers.find("retry-after");
			if (header != response.headers.end()) {
				if (auto seconds = string_util::ParseDouble(string_util::Trim(header->second))) {
					delay = std::chrono::milliseconds(static_cast<int64_t>(*seconds * 1000.0));
				}
			}
			if (limiter_) {
				limiter_->Penalize(delay);
				limiter_->Acquire();
			} else {
				std::this_thread::sleep_for(delay);
			}
			continue;
		}
		if (response.status < 200 || response.status >= 300) {
			auto snippet = Redact(response.body.substr(0, 200));
			bool retryable = response.status >= 500 || response.status == 408;
			throw BackendException("HTTP " + std::to_string(response.status) + " from " + url_ + ": " + snippet,
			                       retryable);
		}
		auto document = nlohmann::json::parse(response.body, nullptr, false);
		if (document.is_discarded() || !document.contains("choices") || !document["choices"].is_array() ||
		    document["choices"].empty()) {
			throw BackendException("unexpected response from " + url_ + ": no choices", false);
		}
		auto &message = document["choices"][0]["message"];
		if (message.contains("content") && message["content"].is_string()) {
			result.text = message["content"].get<std::string>();
		}
		if (document.contains("usage") && document["usage"].is_object()) {
			auto &usage = document["usage"];
			result.input_tokens = usage.value("prompt_tokens", uint64_t(0));
			result.output_tokens = usage.value("completion_tokens", uint64_t(0));
		}
		return result;
	}
}

} // namespace semaquery
