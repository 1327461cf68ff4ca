#pragma once

#include "semaquery/predict/rate_limiter.hpp"
#include "semaquery/predictors/http_transport.hpp"
#include "semaquery/predictors/predictor.hpp"

#include <memory>
#include <string>

namespace semaquery {

//! Client for OpenAI-compatible chat-completions endpoints.
//!
//! The API key is looked up in the SecretStore under the model's SECRET name, or the model name when none is
//! given, and sent only in the Authorization header. It never appears in errors or logs.
class RemotePredictor : public Predictor {
public:
	RemotePredictor(std::shared_ptr<HttpTransport> transport, std::shared_ptr<const SecretStore> secrets,
	                std::shared_ptr<RateLimiter> limiter = nullptr);

	std::string Name() const override {
		return "remote";
	}
	//! Throws ConfigException for a missing API base, malformed URL or unresolvable secret.
	void Load(const ModelEntry &model, const PredictConfig &config) override;
	PredictResponse Predict(const PredictRequest &request) override;

	const std::string &Url() const {
		return url_;
	}

private:
	std::string Redact(std::string text) const;

	std::shared_ptr<HttpTransport> transport_;
	std::shared_ptr<const SecretStore> secrets_;
	std::shared_ptr<RateLimiter> limiter_;
	std::string model_path_;
	std::string url_;
	std::string api_key_;
	PredictConfig config_;
	bool loaded_ = false;
};

//! Appends chat/completions to a base ending in /v1 or /v1/, else /v1/chat/completions.
std::string ChatCompletionsUrl(const std::string &base);

//! The request body: model, system and user messages, model kwargs in option order, then response_format when
//! the structured-output mode is json_schema_param. Byte-stable for identical inputs.
ordered_json BuildChatRequest(const std::string &model_path, const PredictRequest &request,
                              const PredictConfig &config);

//! Secret name used for a model: its SECRET clause, else the model name.
std::string SecretNameFor(const ModelEntry &model);

} // namespace semaquery
