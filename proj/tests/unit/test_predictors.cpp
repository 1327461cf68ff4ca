#include "../support/test_helpers.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/planner/logical_operator.hpp"
#include "semaquery/predict/prompt_renderer.hpp"
#include "semaquery/predictors/mock_predictor.hpp"
#include "semaquery/predictors/remote_predictor.hpp"
#include "semaquery/predictors/structured_output.hpp"
#include "semaquery/predictors/tabular_stub.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/stat.h>

using namespace semaquery;
using namespace semaquery::test;

namespace {

class PredictorTest : public ::testing::Test {
protected:
	void SetUp() override {
		RunScript(session, ReadFile(DataPath("corpus_setup.sql")));
		session.Execute("CREATE LLM MODEL m PATH 'm' ON PROMPT");
	}

	std::shared_ptr<const PredictInfo> InfoFor(const std::string &sql) {
		auto query = session.Plan(sql, false);
		std::shared_ptr<const PredictInfo> info;
		VisitPlan(*query.plan, [&](const LogicalOperator &op) {
			if (!info && op.type == LogicalOperatorType::Predict) {
				info = op.Cast<LogicalPredict>().info;
			}
		});
		return info;
	}

	//! A request over `values` for a prompt with a single {{text}} style input.
	PredictRequest RequestFor(const std::shared_ptr<const PredictInfo> &info, const std::vector<std::string> &values) {
		PromptRenderer renderer(*info);
		auto tuples = ordered_json::array();
		for (size_t i = 0; i < values.size(); i++) {
			tuples.push_back(renderer.Tuple(i, {Value::Varchar(values[i])}));
		}
		PredictRequest request;
		renderer.Render(request, tuples, false);
		return request;
	}

	Database database;
	Session session {database};
};

//! 64-bit FNV-1a written out independently of the stub.
uint64_t Fnv1a(const std::string &text, uint64_t hash = 14695981039346656037ULL) {
	for (unsigned char c : text) {
		hash ^= c;
		hash *= 1099511628211ULL;
	}
	return hash;
}

//! Golden comparison; SEMAQUERY_UPDATE_GOLDEN=1 rewrites the file.
void ExpectGolden(const std::string &name, const std::string &actual) {
	auto path = std::filesystem::path(SEMAQUERY_TEST_DATA).parent_path() / "golden" / name;
	if (std::getenv("SEMAQUERY_UPDATE_GOLDEN")) {
		std::ofstream(path) << actual;
		return;
	}
	ASSERT_TRUE(std::filesystem::exists(path)) << path;
	EXPECT_EQ(ReadFile(path), actual) << name;
}

std::filesystem::path WriteSecrets(const TempDir &dir, const std::string &json) {
	auto path = dir.Path() / "secrets.json";
	std::ofstream(path) << json;
	::chmod(path.c_str(), 0600);
	return path;
}

const char *kSequential = "CREATE LLM MODEL o4_sequential PATH 'o4-mini' ON PROMPT API 'https://api.openai.com/v1/' "
                          "OPTIONS {'n_threads': 1, 'batch_size': 16, 'temperature': 0.5}";
const char *kLanguage = "SELECT title, LLM o4_sequential (PROMPT 'what is the  {language VARCHAR} of the movie "
                        "{{title}}') FROM Movie";

} // namespace

TEST_F(PredictorTest, MockMatchersCompose) {
	auto fixture = MockFixture::Parse(R"(# comment lines and blanks are skipped

{"template": "language", "when": {"title": "Titanic"}, "output": {"language": "English"}}
{"model": "M", "when_contains": {"text": "awful"}, "output": {"negative": true}}
{"default": true, "output": {"language": "unknown", "negative": false}}
)");
	MockPredictor mock(fixture);
	auto language = InfoFor("SELECT title, LLM m (PROMPT 'the {language VARCHAR} of {{title}}') FROM Movie");
	auto response = mock.Predict(RequestFor(language, {"Titanic", "Alien"}));
	EXPECT_EQ(response.text, R"([{"row_id":0,"language":"English"},{"row_id":1,"language":"unknown"}])");
	auto sentiment = InfoFor("SELECT r.review FROM Review AS r WHERE LLM m (PROMPT 'is {{r.review}} {negative BOOLEAN}')");
	// `when_contains` keyed by the column part matches the qualified input key.
	auto fixture2 = MockFixture::Parse(R"({"when_contains": {"review": "awful"}, "output": {"negative": true}}
{"default": true, "output": {"negative": false}})");
	MockPredictor mock2(fixture2);
	auto verdict = mock2.Predict(RequestFor(sentiment, {"an awful film", "lovely"}));
	EXPECT_EQ(verdict.text, R"([{"row_id":0,"negative":true},{"row_id":1,"negative":false}])");
	EXPECT_EQ(mock2.Invocations(), 1u);
}

TEST_F(PredictorTest, MockBehaviors) {
	auto info = InfoFor("SELECT title, LLM m (PROMPT 'the {language VARCHAR} of {{title}}') FROM Movie");
	auto fixture = MockFixture::Parse(R"({"when": {"title": "boom"}, "behavior": "fail"}
{"when": {"title": "once"}, "behavior": "fail_once"}
{"when": {"title": "gone"}, "behavior": "omit"}
{"default": true, "echo": true})");
	MockPredictor mock(fixture);
	EXPECT_THROW(mock.Predict(RequestFor(info, {"ok", "boom"})), BackendException);
	EXPECT_THROW(mock.Predict(RequestFor(info, {"once"})), BackendException);
	EXPECT_EQ(mock.Predict(RequestFor(info, {"once"})).text, R"([{"row_id":0,"language":"once"}])");
	EXPECT_EQ(mock.Predict(RequestFor(info, {"a", "gone", "b"})).text,
	          R"([{"row_id":0,"language":"a"},{"row_id":2,"language":"b"}])");
}

TEST(MockFixture, Diagnostics) {
	EXPECT_THROW(MockFixture::Parse(R"({"when": {"a": "b"}, "output": {"x": 1}})"), ConfigException);
	try {
		MockFixture::Parse("{\"default\": true, \"echo\": true}\n{\"behavior\": \"explode\"}\n");
		FAIL();
	} catch (const ConfigException &error) {
		EXPECT_NE(std::string(error.what()).find("line 2"), std::string::npos) << error.what();
	}
	EXPECT_THROW(MockFixture::Parse("{not json\n{\"default\": true, \"echo\": true}"), ConfigException);
	EXPECT_THROW(MockFixture::Load("/nonexistent/fixture.jsonl"), IOException);
}

TEST_F(PredictorTest, MockTokenCounts) {
	auto info = InfoFor("SELECT title, LLM m (PROMPT 'the {language VARCHAR} of {{title}}') FROM Movie");
	auto request = RequestFor(info, {"a", "b", "c"});
	MockPredictor chars(MockFixture::EchoOnly());
	auto response = chars.Predict(request);
	EXPECT_EQ(response.input_tokens, Chars4Tokens(request.system.size() + request.user.size()));
	EXPECT_EQ(response.output_tokens, Chars4Tokens(response.text.size()));
	EXPECT_EQ(Chars4Tokens(0), 0u);
	EXPECT_EQ(Chars4Tokens(1), 1u);
	EXPECT_EQ(Chars4Tokens(8), 2u);
	EXPECT_EQ(Chars4Tokens(9), 3u);
	MockPredictor synthetic(Fixture("tokens.jsonl"));
	EXPECT_EQ(synthetic.Predict(request).input_tokens, 200u + 3 * 20);
}

TEST(StructuredOutput, JsonSchemaTypes) {
	std::vector<PromptOutput> outputs {{"name", LogicalType::Varchar},
	                                   {"count", LogicalType::Integer},
	                                   {"score", LogicalType::Double},
	                                   {"ok", LogicalType::Boolean},
	                                   {"at", LogicalType::Datetime}};
	auto schema = BuildJsonSchema(outputs, true);
	EXPECT_EQ(schema["type"], "object");
	EXPECT_EQ(schema["additionalProperties"], false);
	auto &properties = schema["properties"];
	EXPECT_EQ(properties.begin().key(), "row_id");
	EXPECT_EQ(properties["row_id"]["type"], "integer");
	EXPECT_EQ(properties["name"]["type"], "string");
	EXPECT_EQ(properties["count"]["type"], "integer");
	EXPECT_EQ(properties["score"]["type"], "number");
	EXPECT_EQ(properties["ok"]["type"], "boolean");
	EXPECT_EQ(properties["at"]["type"], "string");
	EXPECT_EQ(properties["at"]["format"], "date-time");
	EXPECT_EQ(schema["required"].size(), 6u);
	EXPECT_FALSE(BuildJsonSchema(outputs, false)["properties"].contains("row_id"));

	auto format = BuildResponseFormat(outputs);
	EXPECT_EQ(format["type"], "json_schema");
	EXPECT_EQ(format["json_schema"]["strict"], true);
	auto &wrapper = format["json_schema"]["schema"];
	EXPECT_EQ(wrapper["required"], ordered_json::array({"predictions"}));
	EXPECT_EQ(wrapper["properties"]["predictions"]["type"], "array");
	EXPECT_EQ(wrapper["properties"]["predictions"]["items"], schema);
}

TEST(StructuredOutput, GrammarAcceptsExactlyTypedArrays) {
	std::vector<PromptOutput> outputs {{"x", LogicalType::Integer}, {"ok", LogicalType::Boolean},
	                                   {"s", LogicalType::Varchar}};
	GrammarChecker grammar(BuildBnfGrammar(outputs));
	EXPECT_TRUE(grammar.Accepts("[]"));
	EXPECT_TRUE(grammar.Accepts(R"([{"row_id":0,"x":3,"ok":true,"s":"a \"q\" b"}])"));
	EXPECT_TRUE(grammar.Accepts(R"( [ {"row_id": 0, "x": -12, "ok": null, "s": "é"} , {"row_id":1,"x":0,"ok":false,"s":""} ] )"));
	EXPECT_FALSE(grammar.Accepts(R"([{"row_id":0,"x":"3","ok":true,"s":"a"}])"));
	EXPECT_FALSE(grammar.Accepts(R"([{"row_id":0,"ok":true,"x":3,"s":"a"}])"));
	EXPECT_FALSE(grammar.Accepts(R"([{"row_id":0,"x":3,"ok":true}])"));
	EXPECT_FALSE(grammar.Accepts(R"([{"row_id":0,"x":3,"ok":yes,"s":"a"}])"));
	EXPECT_FALSE(grammar.Accepts(R"([{"row_id":0,"x":03,"ok":true,"s":"a"}])"));
	EXPECT_FALSE(grammar.Accepts(R"({"row_id":0,"x":3,"ok":true,"s":"a"})"));
}

TEST(StructuredOutput, GrammarCheckerRecognizesOperators) {
	GrammarChecker grammar("root ::= \"a\"{2,3} b? [x-z]+ (\"-\" | \"+\")*\nb ::= [^a-x]");
	EXPECT_TRUE(grammar.Accepts("aax"));
	EXPECT_TRUE(grammar.Accepts("aaayzz-+-"));
	EXPECT_TRUE(grammar.Accepts("aa!x"));
	EXPECT_FALSE(grammar.Accepts("ax"));
	EXPECT_FALSE(grammar.Accepts("aaaax"));
	EXPECT_FALSE(grammar.Accepts("aa"));
	EXPECT_THROW(GrammarChecker("root ::= missing"), ParserException);
	EXPECT_THROW(GrammarChecker("root ::= \"unterminated"), ParserException);
}

TEST(TabularStub, MatchesIndependentHash) {
	std::vector<ColumnBinding> outputs(2);
	outputs[0].name = "category_id";
	outputs[0].type = LogicalType::Integer;
	outputs[1].name = "label";
	outputs[1].type = LogicalType::Varchar;
	Row features {Value::Varchar("Ryzen 7"), Value::Varchar("8 cores"), Value::Double(329.5)};
	auto row = TabularStubPredictor::PredictRow(features, outputs);
	auto h = Fnv1a(features[0].ToString() + '\x1f' + features[1].ToString() + '\x1f' + features[2].ToString());
	EXPECT_EQ(row[0], Value::Integer(int64_t(h % 7)));
	EXPECT_EQ(row[1], Value::Varchar("class_" + std::to_string(Fnv1a("label", h) % 7)));
	EXPECT_EQ(TabularStubPredictor::PredictRow(features, outputs), row);
}

TEST_F(PredictorTest, TabularModelRunsThroughSql) {
	session.Execute("CREATE TABULAR MODEL categorizer PATH 'c.onnx' ON TABLE Product FEATURES (name, description, "
	                "price) OUTPUT (category_id INTEGER)");
	auto result = session.Execute("SELECT product_id, name, description, price, category_id FROM PREDICT categorizer "
	                              "(Product) ORDER BY product_id");
	ASSERT_FALSE(result.rows.empty());
	for (auto &row : result.rows) {
		auto h = Fnv1a(row[1].ToString() + '\x1f' + row[2].ToString() + '\x1f' + row[3].ToString());
		EXPECT_EQ(row[4], Value::Integer(int64_t(h % 7)));
	}
}

TEST(RemotePredictor, Urls) {
	EXPECT_EQ(ChatCompletionsUrl("https://api.openai.com/v1/"), "https://api.openai.com/v1/chat/completions");
	EXPECT_EQ(ChatCompletionsUrl("https://api.openai.com/v1"), "https://api.openai.com/v1/chat/completions");
	EXPECT_EQ(ChatCompletionsUrl("https://api.openai.com"), "https://api.openai.com/v1/chat/completions");
	EXPECT_EQ(SplitUrl("https://api.openai.com/v1/chat/completions"),
	          std::make_pair(std::string("https://api.openai.com"), std::string("/v1/chat/completions")));
	EXPECT_EQ(SplitUrl("http://localhost:8080/x"),
	          std::make_pair(std::string("http://localhost:8080"), std::string("/x")));
	EXPECT_THROW(SplitUrl("not a url"), ConfigException);
	EXPECT_THROW(SplitUrl("ftp://host/x"), ConfigException);
}

TEST_F(PredictorTest, CassetteRequestGolden) {
	TempDir dir;
	DatabaseOptions options;
	options.secrets_file = WriteSecrets(dir, R"({"o4_sequential": "sk-test-cassette"})");
	Database remote_db(options);
	Session remote(remote_db);
	RunScript(remote, ReadFile(DataPath("corpus_setup.sql")));
	remote.Execute(kSequential);
	remote.Set("backend", std::string("remote"));
	auto cassette = CassetteTransport::Load(DataPath("cassettes/o4mini_ok.json"));
	remote.SetTransport(cassette);
	auto result = remote.Execute(kLanguage);
	ASSERT_EQ(result.rows.size(), 3u);
	for (auto &row : result.rows) {
		EXPECT_EQ(row[1].ToString(), "English");
	}
	EXPECT_EQ(result.stats.calls, 1u);
	EXPECT_EQ(result.stats.input_tokens, 131u);
	EXPECT_EQ(result.stats.output_tokens, 29u);
	auto requests = cassette->Requests();
	ASSERT_EQ(requests.size(), 1u);
	EXPECT_EQ(requests[0].url, "https://api.openai.com/v1/chat/completions");
	bool bearer = false;
	for (auto &[name, value] : requests[0].headers) {
		bearer |= name == "Authorization" && value == "Bearer sk-test-cassette";
	}
	EXPECT_TRUE(bearer);
	auto body = ordered_json::parse(requests[0].body);
	EXPECT_EQ(body["model"], "o4-mini");
	EXPECT_EQ(body["temperature"], 0.5);
	EXPECT_FALSE(body.contains("n_threads"));
	EXPECT_EQ(body["response_format"]["type"], "json_schema");
	EXPECT_EQ(requests[0].body.find("sk-test-cassette"), std::string::npos);
	ExpectGolden("remote_request.json", body.dump(2) + "\n");
}

TEST_F(PredictorTest, RateLimitIsRetried) {
	TempDir dir;
	DatabaseOptions options;
	options.secrets_file = WriteSecrets(dir, R"({"o4_sequential": "sk-test"})");
	Database remote_db(options);
	Session remote(remote_db);
	RunScript(remote, ReadFile(DataPath("corpus_setup.sql")));
	remote.Execute(kSequential);
	remote.Set("backend", std::string("remote"));
	auto cassette = CassetteTransport::Load(DataPath("cassettes/rate_limited.json"));
	remote.SetTransport(cassette);
	auto result = remote.Execute(kLanguage);
	EXPECT_EQ(result.stats.calls, 1u);
	EXPECT_EQ(result.stats.retries, 1u);
	EXPECT_EQ(cassette->Requests().size(), 2u);
	EXPECT_EQ(cassette->Remaining(), 0u);
	for (auto &row : result.rows) {
		EXPECT_EQ(row[1].ToString(), "English");
	}
	EXPECT_EQ(cassette->Requests()[0].body, cassette->Requests()[1].body);
}

TEST_F(PredictorTest, PersistentRateLimitFails) {
	TempDir dir;
	DatabaseOptions options;
	options.secrets_file = WriteSecrets(dir, R"({"o4_sequential": "sk-test"})");
	Database remote_db(options);
	Session remote(remote_db);
	RunScript(remote, ReadFile(DataPath("corpus_setup.sql")));
	remote.Execute(kSequential);
	remote.Set("backend", std::string("remote"));
	remote.Set("max_retries", int64_t(2));
	remote.Set("retry_backoff_ms", int64_t(0));
	remote.Set("error_policy", std::string("fail"));
	auto cassette = CassetteTransport::Load(DataPath("cassettes/always_429.json"));
	remote.SetTransport(cassette);
	try {
		remote.Execute(std::string(kLanguage) + " WHERE movie_id = 1");
		FAIL();
	} catch (const Exception &error) {
		EXPECT_NE(std::string(error.what()).find("429"), std::string::npos) << error.what();
	}
	// One request plus max_retries retries, no executor-level retries on top.
	EXPECT_EQ(cassette->Requests().size(), 3u);
}

TEST_F(PredictorTest, MissingSecretFailsBeforeAnyRequest) {
	TempDir dir;
	DatabaseOptions options;
	options.secrets_file = dir.Path() / "absent.json";
	Database remote_db(options);
	Session remote(remote_db);
	RunScript(remote, ReadFile(DataPath("corpus_setup.sql")));
	remote.Execute(kSequential);
	remote.Set("backend", std::string("remote"));
	auto cassette = CassetteTransport::Load(DataPath("cassettes/o4mini_ok.json"));
	remote.SetTransport(cassette);
	EXPECT_THROW(remote.Execute(kLanguage), ConfigException);
	EXPECT_TRUE(cassette->Requests().empty());
}

TEST(RemotePredictor, ChatRequestIsByteStable) {
	PredictInfo info;
	PredictRequest request;
	request.system = "s";
	request.user = "u";
	PredictConfig config;
	config.kwargs.Set("temperature", 0.5);
	config.kwargs.Set("top_p", 0.9);
	auto first = BuildChatRequest("o4-mini", request, config).dump();
	EXPECT_EQ(first, BuildChatRequest("o4-mini", request, config).dump());
	EXPECT_EQ(first, R"({"model":"o4-mini","messages":[{"role":"system","content":"s"},{"role":"user","content":"u"}],)"
	                 R"("temperature":0.5,"top_p":0.9})");
}
