#pragma once

#include "semaquery/predictors/predictor.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace semaquery {

enum class MockBehavior : uint8_t { None, Fail, FailOnce, GarbageOnce, Garbage, Omit };

//! One fixture rule. All present matchers must hold for a tuple to match.
struct MockRule {
	//! Substring of the raw prompt template.
	std::optional<std::string> template_contains;
	//! Model name, case-insensitive.
	std::optional<std::string> model;
	//! Exact input values. Keys match the full placeholder key ("r.text") or its column part ("text").
	ordered_json when = ordered_json::object();
	//! Substring matches against string inputs, keyed like `when`.
	ordered_json when_contains = ordered_json::object();
	//! Output fields this rule supplies.
	ordered_json output = ordered_json::object();
	//! Copy inputs to outputs: an output takes the input with the same column name, else the input at the same
	//! position, else the last input.
	bool echo = false;
	//! Table generation result.
	std::optional<ordered_json> rows;
	MockBehavior behavior = MockBehavior::None;
	int64_t latency_ms = 0;
	bool is_default = false;
	//! Line number in the fixture file, for diagnostics.
	size_t line = 0;
};

enum class MockTokenizer : uint8_t { Chars4, Synthetic };

//! Parsed fixture file. Immutable; scripted state lives in MockPredictor.
//!
//! Format (JSON lines, `#` comments and blank lines ignored):
//!   {"version": 1, "tokenizer": {"kind": "chars4"}}                                  header, optional
//!   {"version": 1, "tokenizer": {"kind": "synthetic", "preamble_tokens": 200, "row_tokens": 20}}
//!   {"version": 1, "latency": {"base_ms": 0.8, "per_row_ms": 0.15}}     per-call delay added to rule latency
//!   {"template": "language", "when": {"title": "Titanic"}, "output": {"language": "English"}}
//!   {"when_contains": {"text": "awful"}, "output": {"negative": true}}
//!   {"when": {"title": "X"}, "behavior": "fail"}        behaviors: fail, fail_once, garbage, garbage_once, omit
//!   {"template": "states", "rows": [{"name": "Alabama"}]}                              table generation
//!   {"default": true, "echo": true}                                                   fallback for any tuple
//! Rules are tried in file order, default rules last. Each output field comes from the first matching rule
//! that supplies it, so rules for different prompts compose when prompts are merged.
struct MockFixture {
	std::vector<MockRule> rules;
	MockTokenizer tokenizer = MockTokenizer::Chars4;
	uint64_t preamble_tokens = 0;
	uint64_t row_tokens = 0;
	//! Every call sleeps base + per_row * tuples, on top of the largest matching rule latency.
	double latency_base_ms = 0;
	double latency_per_row_ms = 0;

	//! Throws IOException for unreadable files and ConfigException naming the line for malformed records.
	static std::shared_ptr<const MockFixture> Load(const std::filesystem::path &path);
	static std::shared_ptr<const MockFixture> Parse(const std::string &text);
	//! A fixture with a single default echo rule.
	static std::shared_ptr<const MockFixture> EchoOnly();
};

//! Deterministic rule-driven backend. Pure except for *_once behaviors, which consume a per-rule, per-tuple
//! flag the first time they fire.
class MockPredictor : public Predictor {
public:
	explicit MockPredictor(std::shared_ptr<const MockFixture> fixture);

	std::string Name() const override {
		return "mock";
	}
	PredictResponse Predict(const PredictRequest &request) override;

	//! Invocations seen so far, including failed ones.
	uint64_t Invocations() const {
		return invocations_;
	}

private:
	bool Matches(const MockRule &rule, const PredictRequest &request, const ordered_json &tuple) const;
	bool FireOnce(size_t rule, const ordered_json &tuple);
	ordered_json AnswerTuple(const PredictRequest &request, const ordered_json &tuple, int64_t &latency,
	                         MockBehavior &behavior, bool &omit);
	PredictResponse Generate(const PredictRequest &request);
	uint64_t CountInputTokens(const PredictRequest &request) const;

	std::shared_ptr<const MockFixture> fixture_;
	std::mutex once_lock_;
	std::set<std::string> fired_;
	std::atomic<uint64_t> invocations_ {0};
};

//! ceil(chars / 4).
uint64_t Chars4Tokens(size_t chars);

} // namespace semaquery
