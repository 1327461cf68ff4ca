#include "../support/test_helpers.hpp"

#include "../support/coercion_cases.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/planner/logical_operator.hpp"
#include "semaquery/predict/predict_executor.hpp"
#include "semaquery/predictors/mock_predictor.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <mutex>
#include <set>

using namespace semaquery;
using namespace semaquery::test;

namespace {

//! Wraps the mock and keeps a copy of every request.
class RecordingPredictor : public Predictor {
public:
	explicit RecordingPredictor(std::shared_ptr<const MockFixture> fixture) : mock_(std::move(fixture)) {
	}
	std::string Name() const override {
		return "recording";
	}
	PredictResponse Predict(const PredictRequest &request) override {
		{
			std::lock_guard<std::mutex> guard(lock_);
			requests.push_back(request);
		}
		return mock_.Predict(request);
	}

	std::vector<PredictRequest> requests;

private:
	MockPredictor mock_;
	std::mutex lock_;
};

class ExecutorTest : public ::testing::Test {
protected:
	void SetUp() override {
		RunScript(session, ReadFile(DataPath("corpus_setup.sql")));
		RunScript(session, "CREATE LLM MODEL m PATH 'm' ON PROMPT;"
		                   "CREATE TABLE T (id INTEGER, text VARCHAR);");
	}

	//! PredictInfo of the first predict node or semantic aggregate in the unoptimized plan of `sql`.
	std::shared_ptr<const PredictInfo> InfoFor(const std::string &sql) {
		auto query = session.Plan(sql, false);
		std::shared_ptr<const PredictInfo> info;
		VisitPlan(*query.plan, [&](const LogicalOperator &op) {
			if (!info && op.type == LogicalOperatorType::Predict) {
				info = op.Cast<LogicalPredict>().info;
			}
			if (!info && op.type == LogicalOperatorType::Aggregate) {
				for (auto &aggregate : op.Cast<LogicalAggregate>().aggregates) {
					if (aggregate.predict) {
						info = aggregate.predict;
					}
				}
			}
		});
		return info;
	}

	std::shared_ptr<const PredictInfo> TextInfo(const std::string &output = "label VARCHAR") {
		return InfoFor("SELECT id, LLM m (PROMPT 'label {{text}} {" + output + "}') FROM T");
	}

	void FillT(size_t rows, size_t distinct) {
		auto table = database.Tables().GetTable("T");
		for (size_t i = 0; i < rows; i++) {
			table->AppendRow({Value::Integer(int64_t(i)), Value::Varchar("t" + std::to_string(i % distinct))});
		}
	}

	Database database;
	Session session {database};
};

std::vector<Row> TextRows(size_t rows, size_t distinct) {
	std::vector<Row> result;
	for (size_t i = 0; i < rows; i++) {
		result.push_back({Value::Varchar("t" + std::to_string(i % distinct))});
	}
	return result;
}

struct PredictRun {
	std::vector<Row> rows;
	CallStatsSnapshot stats;
	std::vector<std::string> warnings;
};

PredictRun Predict(std::shared_ptr<const PredictInfo> info, PredictConfig config, std::shared_ptr<Predictor> predictor,
            const std::vector<Row> &inputs) {
	CallStats stats;
	PredictRun run;
	PredictExecutor executor(std::move(info), config, std::move(predictor), nullptr, stats,
	                         [&](const std::string &warning) { run.warnings.push_back(warning); });
	run.rows = executor.PredictRows(inputs);
	run.stats = stats.Snapshot();
	return run;
}

PredictRun Predict(std::shared_ptr<const PredictInfo> info, PredictConfig config, const std::string &fixture,
            const std::vector<Row> &inputs) {
	return Predict(std::move(info), config, std::make_shared<MockPredictor>(Fixture(fixture)), inputs);
}

PredictConfig Fast() {
	PredictConfig config;
	config.retry_backoff_ms = 0;
	return config;
}

size_t CeilDiv(size_t a, size_t b) {
	return (a + b - 1) / b;
}

//! Compares `actual` with tests/golden/<name>. SEMAQUERY_UPDATE_GOLDEN=1 rewrites the file instead.
void ExpectGolden(const std::string &name, const std::string &actual) {
	auto path = std::filesystem::path(SEMAQUERY_TEST_DATA).parent_path() / "golden" / name;
	if (std::getenv("SEMAQUERY_UPDATE_GOLDEN")) {
		std::ofstream(path) << actual;
		return;
	}
	ASSERT_TRUE(std::filesystem::exists(path)) << path;
	EXPECT_EQ(ReadFile(path), actual) << name;
}

} // namespace

TEST(PredictConfig, Precedence) {
	auto defaults = PredictConfig::Resolve(OptionMap(), OptionMap());
	EXPECT_EQ(defaults.batch_size, 16);
	EXPECT_EQ(defaults.n_threads, 16);
	EXPECT_EQ(defaults.max_retries, 2);
	EXPECT_TRUE(defaults.use_batching);
	EXPECT_TRUE(defaults.use_dedup);
	EXPECT_EQ(defaults.error_policy, ErrorPolicy::Null);

	OptionMap session;
	session.Set("batch_size", int64_t(8));
	session.Set("n_threads", int64_t(2));
	OptionMap model;
	model.Set("batch_size", int64_t(4));
	auto resolved = PredictConfig::Resolve(model, session);
	EXPECT_EQ(resolved.batch_size, 4);
	EXPECT_EQ(resolved.n_threads, 2);
}

TEST_F(ExecutorTest, ClauseOptionsOverrideModelOptions) {
	RunScript(session, "CREATE LLM MODEL small PATH 's' ON PROMPT OPTIONS {'batch_size': 2};");
	session.SetFixture(MockFixture::EchoOnly());
	FillT(8, 8);
	auto model = session.Execute("SELECT id, LLM small (PROMPT 'x {{text}} {y VARCHAR}') FROM T");
	EXPECT_EQ(model.stats.calls, 4u);
	auto clause =
	    session.Execute("SELECT id, LLM small (PROMPT 'x {{text}} {y VARCHAR}', OPTIONS {'batch_size': 8}) FROM T");
	EXPECT_EQ(clause.stats.calls, 1u);
	session.Set("batch_size", int64_t(1));
	auto again = session.Execute("SELECT id, LLM small (PROMPT 'x {{text}} {y VARCHAR}') FROM T");
	EXPECT_EQ(again.stats.calls, 4u);
}

TEST(PredictConfig, BadValues) {
	OptionMap session;
	session.Set("batch_size", std::string("many"));
	EXPECT_THROW(PredictConfig::Resolve(OptionMap(), session), ConfigException);
	OptionMap zero;
	zero.Set("batch_size", int64_t(0));
	EXPECT_THROW(PredictConfig::Resolve(OptionMap(), zero), ConfigException);
	Database database;
	Session connection(database);
	EXPECT_THROW(connection.Set("no_such_setting", int64_t(1)), ConfigException);
	EXPECT_THROW(connection.Set("error_policy", std::string("explode")), ConfigException);
}

TEST_F(ExecutorTest, RenderGoldenSingleRow) {
	auto info = InfoFor("SELECT title, LLM m (PROMPT 'what is the  {language VARCHAR} of the movie {{title}}') FROM Movie");
	PromptRenderer renderer(*info);
	auto tuples = ordered_json::array();
	tuples.push_back(renderer.Tuple(0, {Value::Varchar("Titanic")}));
	PredictRequest request;
	renderer.Render(request, tuples, false);
	EXPECT_NE(request.user.find(R"([{"row_id":0,"title":"Titanic"}])"), std::string::npos) << request.user;
	EXPECT_NE(request.system.find("language: string"), std::string::npos) << request.system;
	ExpectGolden("render_scalar.txt", request.system + "\n---\n" + request.user + "\n");
	PredictRequest strict;
	renderer.Render(strict, tuples, true);
	EXPECT_NE(strict.system, request.system);
	EXPECT_EQ(strict.user, request.user);
}

TEST_F(ExecutorTest, RenderGoldenBatch) {
	auto info = InfoFor("SELECT r.review FROM Movie AS m JOIN Review AS r ON m.movie_id = r.movie_id WHERE LLM m "
	                    "(PROMPT 'is the sentiment of the {{r.review}} {negative BOOLEAN}?')");
	PromptRenderer renderer(*info);
	auto tuples = ordered_json::array();
	for (size_t i = 0; i < 16; i++) {
		tuples.push_back(renderer.Tuple(i, {Value::Varchar("review number " + std::to_string(i))}));
	}
	PredictRequest request;
	renderer.Render(request, tuples, false);
	EXPECT_NE(request.user.find("Process the following 16 row(s) and return exactly 16 JSON object(s)"),
	          std::string::npos);
	ExpectGolden("render_batch16.txt", request.system + "\n---\n" + request.user + "\n");
	// Pure: rendering twice gives identical text.
	PredictRequest again;
	renderer.Render(again, tuples, false);
	EXPECT_EQ(again.user, request.user);
	EXPECT_EQ(again.system, request.system);
}

TEST(OutputParser, CoercionCases) {
	size_t count = 0;
	auto failures = CheckCoercionCases(DataPath("coercion_cases.json"), count);
	EXPECT_GE(count, 30u);
	for (auto &failure : failures) {
		ADD_FAILURE() << failure;
	}
}

TEST_F(ExecutorTest, DedupAndBatchingCallCounts) {
	auto info = TextInfo();
	auto inputs = TextRows(1000, 63);
	auto config = Fast();
	auto both = Predict(info, config, "corpus.jsonl", inputs);
	EXPECT_EQ(both.stats.calls, CeilDiv(63, 16));
	config.use_dedup = false;
	auto batched = Predict(info, config, "corpus.jsonl", inputs);
	EXPECT_EQ(batched.stats.calls, CeilDiv(1000, 16));
	config.use_batching = false;
	auto neither = Predict(info, config, "corpus.jsonl", inputs);
	EXPECT_EQ(neither.stats.calls, 1000u);
	EXPECT_EQ(both.rows, batched.rows);
	EXPECT_EQ(both.rows, neither.rows);
	EXPECT_EQ(both.stats.cache_hits + both.stats.cache_misses, 1000u);
	EXPECT_EQ(both.stats.cache_misses, 63u);
}

TEST_F(ExecutorTest, OutputOrderFollowsInputOrder) {
	auto info = TextInfo();
	std::vector<Row> inputs;
	for (int i = 99; i >= 0; i--) {
		inputs.push_back({Value::Varchar("t" + std::to_string(i % 37))});
	}
	auto config = Fast();
	config.batch_size = 7;
	auto run = Predict(info, config, "corpus.jsonl", inputs);
	ASSERT_EQ(run.rows.size(), inputs.size());
	for (size_t i = 0; i < inputs.size(); i++) {
		EXPECT_EQ(run.rows[i][0], inputs[i][0]) << i;
	}
}

TEST_F(ExecutorTest, CallCountLawAcrossChunks) {
	// Keys repeat across chunks; the cache carries answers from one chunk to the next.
	auto table = database.Tables().GetTable("T");
	std::vector<std::string> keys;
	for (int64_t i = 0; i < 1000; i++) {
		keys.push_back("k" + std::to_string((i * 7919) % 211));
		table->AppendRow({Value::Integer(i), Value::Varchar(keys.back())});
	}
	session.SetFixture(MockFixture::EchoOnly());
	for (int64_t capacity : {64, 100, 333}) {
		for (int64_t batch : {1, 5, 16}) {
			session.Set("chunk_capacity", capacity);
			session.Set("batch_size", batch);
			auto result = session.Execute("SELECT id, LLM m (PROMPT 'x {{text}} {y VARCHAR}') FROM T");
			std::set<std::string> seen;
			size_t expected = 0;
			for (size_t start = 0; start < keys.size(); start += size_t(capacity)) {
				std::set<std::string> fresh;
				for (size_t i = start; i < std::min(keys.size(), start + size_t(capacity)); i++) {
					if (!seen.count(keys[i])) {
						fresh.insert(keys[i]);
					}
				}
				expected += CeilDiv(fresh.size(), size_t(batch));
				seen.insert(fresh.begin(), fresh.end());
			}
			EXPECT_EQ(result.stats.calls, expected) << "capacity " << capacity << " batch " << batch;
			ASSERT_EQ(result.rows.size(), keys.size());
			for (auto &row : result.rows) {
				EXPECT_EQ(row[1].ToString(), keys[row[0].GetInteger()]);
			}
		}
	}
}

TEST_F(ExecutorTest, DedupDoesNotChangeResults) {
	auto info = TextInfo("negative BOOLEAN");
	for (size_t seed = 1; seed <= 5; seed++) {
		std::vector<Row> inputs;
		for (size_t i = 0; i < 200; i++) {
			auto pick = (i * seed * 31 + seed) % 11;
			inputs.push_back({pick == 0 ? Value() : Value::Varchar(pick % 3 ? "fine " + std::to_string(pick)
			                                                                  : "awful " + std::to_string(pick))});
		}
		auto config = Fast();
		config.batch_size = int64_t(seed * 3);
		auto on = Predict(info, config, "sentiment.jsonl", inputs);
		config.use_dedup = false;
		auto off = Predict(info, config, "sentiment.jsonl", inputs);
		EXPECT_EQ(on.rows, off.rows);
		EXPECT_LE(on.stats.calls, off.stats.calls);
	}
}

TEST_F(ExecutorTest, BatchingAmortizesInputTokens) {
	auto info = TextInfo();
	auto inputs = TextRows(1000, 1000);
	auto config = Fast();
	auto batched = Predict(info, config, "tokens.jsonl", inputs);
	config.use_batching = false;
	auto single = Predict(info, config, "tokens.jsonl", inputs);
	EXPECT_EQ(batched.stats.input_tokens, 63u * 200 + 1000u * 20);
	EXPECT_EQ(single.stats.input_tokens, 1000u * 220);
	// Default tokenizer: characters / 4, still cheaper with batching.
	config.use_batching = true;
	auto chars_batched = Predict(info, config, "corpus.jsonl", inputs);
	config.use_batching = false;
	auto chars_single = Predict(info, config, "corpus.jsonl", inputs);
	EXPECT_LT(chars_batched.stats.input_tokens * 2, chars_single.stats.input_tokens);
}

TEST_F(ExecutorTest, GenerationRows) {
	auto info = InfoFor("SELECT name FROM LLM m (PROMPT 'list the states {name VARCHAR}')");
	auto make = [&](size_t count) {
		auto rows = ordered_json::array();
		for (size_t i = 0; i < count; i++) {
			rows.push_back({{"name", "s" + std::to_string(i)}});
		}
		ordered_json rule = {{"rows", rows}};
		return MockFixture::Parse(rule.dump() + "\n{\"default\": true, \"echo\": true}");
	};
	auto generate = [&](std::shared_ptr<const MockFixture> fixture, PredictRun &run) {
		CallStats stats;
		PredictExecutor executor(info, Fast(), std::make_shared<MockPredictor>(fixture), nullptr, stats,
		                         [&](const std::string &warning) { run.warnings.push_back(warning); });
		run.rows = executor.Generate();
		run.stats = stats.Snapshot();
	};
	PredictRun fifty;
	generate(make(50), fifty);
	EXPECT_EQ(fifty.rows.size(), 50u);
	EXPECT_EQ(fifty.stats.calls, 1u);
	EXPECT_EQ(fifty.rows[49][0].ToString(), "s49");
	PredictRun none;
	generate(make(0), none);
	EXPECT_TRUE(none.rows.empty());
	PredictRun many;
	generate(make(2000), many);
	EXPECT_EQ(many.rows.size(), 1024u);
	ASSERT_EQ(many.warnings.size(), 1u);
	EXPECT_NE(many.warnings[0].find("max_generated_rows"), std::string::npos);
	PredictRun broken;
	EXPECT_THROW(generate(MockFixture::Parse(R"({"rows": [], "behavior": "garbage"}
{"default": true, "echo": true})"), broken),
	             MalformedOutputException);
}

TEST_F(ExecutorTest, PoisonRowFallsBackAlone) {
	auto info = TextInfo();
	std::vector<Row> inputs;
	for (size_t i = 0; i < 16; i++) {
		inputs.push_back({Value::Varchar(i == 5 ? "poison pill" : "row " + std::to_string(i))});
	}
	auto run = Predict(info, Fast(), "poison.jsonl", inputs);
	EXPECT_EQ(run.stats.calls, 1u + 16u);
	EXPECT_EQ(run.stats.fallback_batches, 1u);
	EXPECT_EQ(run.stats.retries, 2u);
	EXPECT_EQ(run.stats.failed_rows, 1u);
	size_t answered = 0;
	for (size_t i = 0; i < 16; i++) {
		if (i == 5) {
			EXPECT_TRUE(run.rows[i][0].IsNull());
		} else {
			answered += run.rows[i][0].ToString() == inputs[i][0].ToString();
		}
	}
	EXPECT_EQ(answered, 15u);
	ASSERT_EQ(run.warnings.size(), 1u);
	EXPECT_NE(run.warnings[0].find("1 row(s) have no prediction after fallback and retries"), std::string::npos);
}

TEST_F(ExecutorTest, ErrorPolicyFailRaises) {
	auto config = Fast();
	config.error_policy = ErrorPolicy::Fail;
	EXPECT_THROW(Predict(TextInfo(), config, "poison.jsonl", {{Value::Varchar("poison")}}), ExecutionException);
}

TEST_F(ExecutorTest, GarbageOnceRepromptsStrictly) {
	auto predictor = std::make_shared<RecordingPredictor>(Fixture("garbage_once.jsonl"));
	auto run = Predict(TextInfo(), Fast(), predictor, TextRows(5, 5));
	EXPECT_EQ(run.stats.calls, 2u);
	EXPECT_EQ(run.stats.reprompts, 1u);
	EXPECT_EQ(run.stats.fallback_batches, 0u);
	ASSERT_EQ(predictor->requests.size(), 2u);
	EXPECT_FALSE(predictor->requests[0].strict);
	EXPECT_TRUE(predictor->requests[1].strict);
	EXPECT_EQ(run.rows[3][0].ToString(), "t3");
}

TEST_F(ExecutorTest, PersistentGarbageFallsBack) {
	auto run = Predict(TextInfo(), Fast(), "garbage.jsonl", TextRows(5, 5));
	// Batch plus its strict re-prompt, then five single rows; the t3 row re-prompts once more and gives up.
	EXPECT_EQ(run.stats.fallback_batches, 1u);
	EXPECT_EQ(run.stats.calls, 2u + 5u + 1u);
	EXPECT_EQ(run.stats.failed_rows, 1u);
	EXPECT_TRUE(run.rows[3][0].IsNull());
	EXPECT_EQ(run.rows[4][0].ToString(), "t4");
}

TEST_F(ExecutorTest, NullInputsShortCircuit) {
	auto predictor = std::make_shared<RecordingPredictor>(MockFixture::EchoOnly());
	auto run = Predict(TextInfo(), Fast(), predictor, {{Value()}, {Value::Varchar("a")}, {Value()}});
	EXPECT_EQ(run.stats.null_inputs, 2u);
	EXPECT_EQ(run.stats.calls, 1u);
	EXPECT_TRUE(run.rows[0][0].IsNull());
	EXPECT_EQ(run.rows[1][0].ToString(), "a");
	ASSERT_EQ(predictor->requests.size(), 1u);
	EXPECT_EQ(predictor->requests[0].tuples.size(), 1u);
}

TEST_F(ExecutorTest, OversizedBatchesSplit) {
	auto predictor = std::make_shared<RecordingPredictor>(MockFixture::EchoOnly());
	auto config = Fast();
	config.max_prompt_chars = 700;
	auto inputs = TextRows(16, 16);
	auto run = Predict(TextInfo(), config, predictor, inputs);
	EXPECT_GT(run.stats.calls, 1u);
	for (auto &request : predictor->requests) {
		if (request.tuples.size() > 1) {
			EXPECT_LE(request.system.size() + request.user.size(), 700u);
		}
	}
	for (size_t i = 0; i < inputs.size(); i++) {
		EXPECT_EQ(run.rows[i][0], inputs[i][0]);
	}
}

TEST_F(ExecutorTest, DeterministicAcrossThreadCounts) {
	FillT(500, 97);
	session.SetFixture(Fixture("poison.jsonl"));
	session.Set("retry_backoff_ms", int64_t(0));
	std::optional<QueryResult> first;
	for (int64_t threads : {1, 4, 16}) {
		session.Set("n_threads", threads);
		auto result = session.Execute("SELECT id, LLM m (PROMPT 'x {{text}} {y VARCHAR}') FROM T");
		if (!first) {
			first = result;
			continue;
		}
		EXPECT_EQ(result.rows, first->rows) << threads;
		EXPECT_EQ(result.stats, first->stats) << threads;
	}
}

TEST_F(ExecutorTest, AggregateOneCallPerGroup) {
	RunScript(session, "INSERT INTO T VALUES (1, 'a'), (1, 'b'), (2, 'c'), (3, 'd'), (3, 'e'), (3, 'f'), (4, 'g');");
	session.SetFixture(MockFixture::Parse(R"({"default": true, "output": {"summary": "ok"}})"));
	auto result = session.Execute("SELECT id, LLM AGG m (PROMPT 'summarize {{text}} {summary VARCHAR}') FROM T GROUP BY id");
	EXPECT_EQ(result.rows.size(), 4u);
	EXPECT_EQ(result.stats.calls, 4u);
	auto empty = session.Execute(
	    "SELECT id, LLM AGG m (PROMPT 'summarize {{text}} {summary VARCHAR}') FROM T WHERE id > 10 GROUP BY id");
	EXPECT_TRUE(empty.rows.empty());
	EXPECT_EQ(empty.stats.calls, 0u);
}

TEST_F(ExecutorTest, AggregateGroupsMarshalAsArrays) {
	auto info = InfoFor("SELECT LLM AGG m (PROMPT 'summarize {{text}} {summary VARCHAR}') FROM T");
	auto predictor = std::make_shared<RecordingPredictor>(
	    MockFixture::Parse(R"({"default": true, "output": {"summary": "ok"}})"));
	CallStats stats;
	PredictExecutor executor(info, Fast(), predictor, nullptr, stats);
	auto values = executor.PredictGroups({{{Value::Varchar("only")}},
	                                      {{Value::Varchar("x")}, {Value::Varchar("y")}},
	                                      {},
	                                      {{Value()}}});
	ASSERT_EQ(values.size(), 4u);
	EXPECT_EQ(values[0].ToString(), "ok");
	EXPECT_TRUE(values[2].IsNull());
	EXPECT_TRUE(values[3].IsNull());
	EXPECT_EQ(stats.Snapshot().calls, 2u);
	ASSERT_EQ(predictor->requests.size(), 2u);
	std::set<std::string> tuples;
	for (auto &request : predictor->requests) {
		tuples.insert(request.tuples.dump());
	}
	// A group of one renders like a scalar row whose value is a one-element array.
	EXPECT_TRUE(tuples.count(R"([{"row_id":0,"text":["only"]}])"));
	EXPECT_TRUE(tuples.count(R"([{"row_id":0,"text":["x","y"]}])"));
}
