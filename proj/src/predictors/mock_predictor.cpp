#include "semaquery/predictors/mock_predictor.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace semaquery {

namespace {

constexpr const char *kGarbage = "Sure! Here is what you asked for, formatted nicely for you.";

std::string ColumnPart(const std::string &key) {
	auto dot = key.rfind('.');
	return dot == std::string::npos ? key : key.substr(dot + 1);
}

const ordered_json *FindInput(const ordered_json &tuple, const std::string &key) {
	auto it = tuple.find(key);
	if (it != tuple.end()) {
		return &*it;
	}
	for (auto &[name, value] : tuple.items()) {
		if (name != "row_id" && ColumnPart(name) == key) {
			return &value;
		}
	}
	return nullptr;
}

MockBehavior ParseBehavior(const std::string &text, size_t line) {
	if (text == "fail") {
		return MockBehavior::Fail;
	}
	if (text == "fail_once") {
		return MockBehavior::FailOnce;
	}
	if (text == "garbage") {
		return MockBehavior::Garbage;
	}
	if (text == "garbage_once") {
		return MockBehavior::GarbageOnce;
	}
	if (text == "omit") {
		return MockBehavior::Omit;
	}
	throw ConfigException("fixture line " + std::to_string(line) + ": unknown behavior '" + text + "'");
}

void Require(bool condition, size_t line, const std::string &message) {
	if (!condition) {
		throw ConfigException("fixture line " + std::to_string(line) + ": " + message);
	}
}

void Sleep(double milliseconds) {
	if (milliseconds > 0) {
		std::this_thread::sleep_for(std::chrono::microseconds(static_cast<int64_t>(milliseconds * 1000.0)));
	}
}

} // namespace

uint64_t Chars4Tokens(size_t chars) {
	return (chars + 3) / 4;
}

std::shared_ptr<const MockFixture> MockFixture::Load(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw IOException("cannot open fixture file " + path.string());
	}
	std::stringstream buffer;
	buffer << in.rdbuf();
	return Parse(buffer.str());
}

std::shared_ptr<const MockFixture> MockFixture::Parse(const std::string &text) {
	auto fixture = std::make_shared<MockFixture>();
	std::vector<MockRule> defaults;
	size_t line_number = 0;
	for (auto &raw_line : string_util::Split(text, '\n')) {
		line_number++;
		auto line = string_util::Trim(raw_line);
		if (line.empty() || line[0] == '#') {
			continue;
		}
		auto record = ordered_json::parse(line.begin(), line.end(), nullptr, false);
		Require(!record.is_discarded() && record.is_object(), line_number, "expected a JSON object");
		if (record.contains("version")) {
			Require(record["version"] == 1, line_number, "unsupported fixture version " + record["version"].dump());
			if (record.contains("tokenizer")) {
				auto &tokenizer = record["tokenizer"];
				auto kind = tokenizer.value("kind", std::string("chars4"));
				if (kind == "synthetic") {
					fixture->tokenizer = MockTokenizer::Synthetic;
					fixture->preamble_tokens = tokenizer.value("preamble_tokens", uint64_t(0));
					fixture->row_tokens = tokenizer.value("row_tokens", uint64_t(0));
				} else {
					Require(kind == "chars4", line_number, "unknown tokenizer kind '" + kind + "'");
				}
			}
			if (record.contains("latency")) {
				auto &latency = record["latency"];
				Require(latency.is_object(), line_number, "latency must be an object");
				for (auto &[key, value] : latency.items()) {
					Require((key == "base_ms" || key == "per_row_ms") && value.is_number() && value.get<double>() >= 0,
					        line_number, "latency takes non-negative base_ms and per_row_ms");
				}
				fixture->latency_base_ms = latency.value("base_ms", 0.0);
				fixture->latency_per_row_ms = latency.value("per_row_ms", 0.0);
			}
			for (auto &[key, value] : record.items()) {
				Require(key == "version" || key == "tokenizer" || key == "latency", line_number,
				        "unknown header field '" + key + "'");
			}
			continue;
		}
		MockRule rule;
		rule.line = line_number;
		for (auto &[key, value] : record.items()) {
			if (key == "template") {
				Require(value.is_string(), line_number, "template must be a string");
				rule.template_contains = value.get<std::string>();
			} else if (key == "model") {
				Require(value.is_string(), line_number, "model must be a string");
				rule.model = value.get<std::string>();
			} else if (key == "when") {
				Require(value.is_object(), line_number, "when must be an object");
				rule.when = value;
			} else if (key == "when_contains") {
				Require(value.is_object(), line_number, "when_contains must be an object");
				for (auto &[k, v] : value.items()) {
					Require(v.is_string(), line_number, "when_contains values must be strings");
				}
				rule.when_contains = value;
			} else if (key == "output") {
				Require(value.is_object(), line_number, "output must be an object");
				rule.output = value;
			} else if (key == "echo") {
				Require(value.is_boolean(), line_number, "echo must be a boolean");
				rule.echo = value.get<bool>();
			} else if (key == "rows") {
				Require(value.is_array(), line_number, "rows must be an array");
				rule.rows = value;
			} else if (key == "behavior") {
				Require(value.is_string(), line_number, "behavior must be a string");
				rule.behavior = ParseBehavior(value.get<std::string>(), line_number);
			} else if (key == "latency_ms") {
				Require(value.is_number_integer() && value.get<int64_t>() >= 0, line_number,
				        "latency_ms must be a non-negative integer");
				rule.latency_ms = value.get<int64_t>();
			} else if (key == "default") {
				Require(value.is_boolean(), line_number, "default must be a boolean");
				rule.is_default = value.get<bool>();
			} else {
				Require(false, line_number, "unknown rule field '" + key + "'");
			}
		}
		if (rule.is_default) {
			defaults.push_back(std::move(rule));
		} else {
			fixture->rules.push_back(std::move(rule));
		}
	}
	if (defaults.empty()) {
		throw ConfigException("fixture has no default rule; add {\"default\": true, \"echo\": true} or similar");
	}
	for (auto &rule : defaults) {
		fixture->rules.push_back(std::move(rule));
	}
	return fixture;
}

std::shared_ptr<const MockFixture> MockFixture::EchoOnly() {
	return Parse("{\"default\": true, \"echo\": true}\n");
}

MockPredictor::MockPredictor(std::shared_ptr<const MockFixture> fixture) : fixture_(std::move(fixture)) {
}

bool MockPredictor::Matches(const MockRule &rule, const PredictRequest &request, const ordered_json &tuple) const {
	if (rule.model && !string_util::EqualsIgnoreCase(*rule.model, request.info->ModelName())) {
		return false;
	}
	if (rule.template_contains &&
	    !string_util::Contains(string_util::Lower(request.info->prompt.Raw()), string_util::Lower(*rule.template_contains))) {
		return false;
	}
	for (auto &[key, expected] : rule.when.items()) {
		auto actual = FindInput(tuple, key);
		if (!actual || *actual != expected) {
			return false;
		}
	}
	for (auto &[key, needle] : rule.when_contains.items()) {
		auto actual = FindInput(tuple, key);
		if (!actual || !actual->is_string() ||
		    !string_util::Contains(string_util::Lower(actual->get<std::string>()),
		                           string_util::Lower(needle.get<std::string>()))) {
			return false;
		}
	}
	return true;
}

bool MockPredictor::FireOnce(size_t rule, const ordered_json &tuple) {
	auto copy = tuple;
	copy.erase("row_id");
	std::lock_guard guard(once_lock_);
	return fired_.insert(std::to_string(rule) + ":" + copy.dump()).second;
}

ordered_json MockPredictor::AnswerTuple(const PredictRequest &request, const ordered_json &tuple, int64_t &latency,
                                        MockBehavior &behavior, bool &omit) {
	auto &outputs = request.info->outputs;
	std::vector<bool> filled(outputs.size(), false);
	ordered_json answer = ordered_json::object();
	answer["row_id"] = tuple.value("row_id", 0);
	std::vector<ordered_json> values(outputs.size());
	for (size_t r = 0; r < fixture_->rules.size(); r++) {
		auto &rule = fixture_->rules[r];
		if (!Matches(rule, request, tuple)) {
			continue;
		}
		latency = std::max(latency, rule.latency_ms);
		switch (rule.behavior) {
		case MockBehavior::Fail:
			throw BackendException("mock: scripted failure (fixture line " + std::to_string(rule.line) + ")", true);
		case MockBehavior::FailOnce:
			if (FireOnce(r, tuple)) {
				throw BackendException("mock: scripted one-time failure (fixture line " + std::to_string(rule.line) +
				                           ")",
				                       true);
			}
			break;
		case MockBehavior::Garbage:
			behavior = MockBehavior::Garbage;
			break;
		case MockBehavior::GarbageOnce:
			if (FireOnce(r, tuple)) {
				behavior = MockBehavior::Garbage;
			}
			break;
		case MockBehavior::Omit:
			omit = true;
			break;
		case MockBehavior::None:
			break;
		}
		std::vector<std::pair<std::string, const ordered_json *>> inputs;
		for (auto &[name, value] : tuple.items()) {
			if (name != "row_id") {
				inputs.emplace_back(name, &value);
			}
		}
		for (size_t o = 0; o < outputs.size(); o++) {
			if (filled[o]) {
				continue;
			}
			auto &name = outputs[o].name;
			for (auto &[key, value] : rule.output.items()) {
				if (string_util::EqualsIgnoreCase(key, name)) {
					values[o] = value;
					filled[o] = true;
					break;
				}
			}
			if (filled[o] || !rule.echo || inputs.empty()) {
				continue;
			}
			const ordered_json *source = nullptr;
			for (auto &[key, value] : inputs) {
				if (string_util::EqualsIgnoreCase(ColumnPart(key), name)) {
					source = value;
				}
			}
			if (!source) {
				source = inputs[std::min(o, inputs.size() - 1)].second;
			}
			values[o] = *source;
			filled[o] = true;
		}
	}
	for (size_t o = 0; o < outputs.size(); o++) {
		if (filled[o]) {
			answer[outputs[o].name] = values[o];
		}
	}
	return answer;
}

uint64_t MockPredictor::CountInputTokens(const PredictRequest &request) const {
	if (fixture_->tokenizer == MockTokenizer::Synthetic) {
		return fixture_->preamble_tokens + fixture_->row_tokens * request.tuples.size();
	}
	return Chars4Tokens(request.system.size() + request.user.size());
}

PredictResponse MockPredictor::Generate(const PredictRequest &request) {
	PredictResponse response;
	response.input_tokens = CountInputTokens(request);
	int64_t latency = 0;
	auto empty = ordered_json::object();
	response.text = "[]";
	for (size_t r = 0; r < fixture_->rules.size(); r++) {
		auto &rule = fixture_->rules[r];
		if (!rule.rows || !Matches(rule, request, empty)) {
			continue;
		}
		latency = rule.latency_ms;
		if (rule.behavior == MockBehavior::Fail || (rule.behavior == MockBehavior::FailOnce && FireOnce(r, empty))) {
			throw BackendException("mock: scripted failure (fixture line " + std::to_string(rule.line) + ")", true);
		}
		if (rule.behavior == MockBehavior::Garbage ||
		    (rule.behavior == MockBehavior::GarbageOnce && FireOnce(r, empty))) {
			response.text = kGarbage;
		} else {
			response.text = rule.rows->dump();
		}
		break;
	}
	Sleep(static_cast<double>(latency) + fixture_->latency_base_ms);
	response.output_tokens = Chars4Tokens(response.text.size());
	return response;
}

PredictResponse MockPredictor::Predict(const PredictRequest &request) {
	invocations_++;
	if (!request.info) {
		throw BackendException("mock: request has no predict info", false);
	}
	if (request.mode == PredictMode::TableGeneration) {
		return Generate(request);
	}
	PredictResponse response;
	response.input_tokens = CountInputTokens(request);
	int64_t latency = 0;
	MockBehavior behavior = MockBehavior::None;
	auto answers = ordered_json::array();
	for (auto &tuple : request.tuples) {
		bool omit = false;
		auto answer = AnswerTuple(request, tuple, latency, behavior, omit);
		if (!omit) {
			answers.push_back(std::move(answer));
		}
	}
	Sleep(static_cast<double>(latency) + fixture_->latency_base_ms +
	      fixture_->latency_per_row_ms * static_cast<double>(request.tuples.size()));
	response.text = behavior == MockBehavior::Garbage ? kGarbage : answers.dump();
	response.output_tokens = Chars4Tokens(response.text.size());
	return response;
}

} // namespace semaquery
