#include "../support/test_helpers.hpp"

#include "semaquery/bench/datasets.hpp"
#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"
#include "semaquery/optimizer/optimizer.hpp"
#include "semaquery/planner/logical_operator.hpp"

#include <gtest/gtest.h>

using namespace semaquery;
using namespace semaquery::test;

namespace {

//! Raw prompts of the plan's predict nodes, from the bottom of the tree upwards.
std::vector<std::string> PredictOrder(const LogicalOperator &plan) {
	std::vector<std::string> prompts;
	VisitPlan(plan, [&](const LogicalOperator &op) {
		if (op.type == LogicalOperatorType::Predict) {
			prompts.push_back(op.Cast<LogicalPredict>().info->prompt.Raw());
		}
	});
	std::reverse(prompts.begin(), prompts.end());
	return prompts;
}

size_t CountPredicts(const LogicalOperator &plan) {
	return PredictOrder(plan).size();
}

//! Depth of the first node of `type` whose EXPLAIN line contains `needle`.
int DepthOf(const std::string &explain, const std::string &needle) {
	std::stringstream lines(explain);
	std::string line;
	while (std::getline(lines, line)) {
		if (line.find(needle) != std::string::npos) {
			return static_cast<int>(line.find_first_not_of(' ') / 2);
		}
	}
	return -1;
}

class OptimizerTest : public ::testing::Test {
protected:
	void SetUp() override {
		RunScript(session, ReadFile(DataPath("corpus_setup.sql")));
		session.Execute("CREATE LLM MODEL m PATH 'm' ON PROMPT");
		session.SetFixture(Fixture("corpus.jsonl"));
	}

	struct Comparison {
		QueryResult plain;
		QueryResult optimized;
		RewriteTrace trace;
		std::string plain_plan;
		std::string optimized_plan;
	};

	Comparison Compare(const std::string &sql) {
		Comparison result;
		auto plain = session.Plan(sql, false);
		result.plain_plan = ExplainPlan(*plain.plan);
		result.plain = session.Run(std::move(plain));
		auto optimized = session.Plan(sql, true, &result.trace);
		result.optimized_plan = ExplainPlan(*optimized.plan);
		result.optimized = session.Run(std::move(optimized));
		EXPECT_EQ(Sorted(result.plain.rows), Sorted(result.optimized.rows)) << sql;
		return result;
	}

	Database database;
	Session session {database};
};

void CreateDepartments(TableCatalog &tables) {
	auto dept = std::make_shared<Table>("Dept", std::vector<ColumnSchema> {{"dept_id", LogicalType::Integer},
	                                                                       {"name", LogicalType::Varchar}});
	for (int64_t d = 1; d <= 10; d++) {
		dept->AppendRow({Value::Integer(d), Value::Varchar(d % 2 ? "hot dept " + std::to_string(d)
		                                                         : "cold dept " + std::to_string(d))});
	}
	dept->Keys().primary_key = "dept_id";
	auto emp = std::make_shared<Table>("Emp", std::vector<ColumnSchema> {{"emp_id", LogicalType::Integer},
	                                                                     {"dept_id", LogicalType::Integer},
	                                                                     {"bio", LogicalType::Varchar}});
	// 30 employees spread over departments 1, 2, 3 and 5 only.
	const int64_t used[] = {1, 2, 3, 5};
	for (int64_t e = 1; e <= 30; e++) {
		emp->AppendRow({Value::Integer(e), Value::Integer(used[e % 4]),
		                Value::Varchar((e % 3 ? "calm person " : "hot head ") + std::to_string(e))});
	}
	emp->Keys().primary_key = "emp_id";
	emp->Keys().foreign_keys.push_back({"dept_id", "Dept", "dept_id"});
	tables.CreateTable(dept, true);
	tables.CreateTable(emp, true);
}

const char *kHotFixture = R"({"when_contains": {"name": "hot"}, "output": {"hot": true}}
{"when_contains": {"bio": "hot"}, "output": {"hot": true}}
{"default": true, "output": {"hot": false, "topic": "work", "negative": false}}
)";

} // namespace

TEST_F(OptimizerTest, FilterOnPredictedColumnStaysAbove) {
	auto result = Compare("SELECT state, avg(sale) AS total_sales FROM LLM m (PROMPT 'find{state VARCHAR},"
	                      "{country VARCHAR} from {{billing_address}}', \"Order\") WHERE country = 'USA' GROUP BY state");
	EXPECT_LT(DepthOf(result.optimized_plan, "FILTER [(Order.country"), DepthOf(result.optimized_plan, "PREDICT"));
	EXPECT_EQ(result.optimized.rows.size(), 2u);
}

TEST_F(OptimizerTest, BaseFiltersPushedBelowSemanticJoin) {
	auto result = Compare("SELECT c.name, m.name FROM Product AS m JOIN Product AS c ON LLM m (PROMPT 'is CPU  "
	                      "{{c.name}} {compatible BOOLEAN} with motherboard {{m.name}}') "
	                      "WHERE m.category = 'Motherboard' AND c.category = 'CPU'");
	auto predict = DepthOf(result.optimized_plan, "PREDICT");
	EXPECT_GT(DepthOf(result.optimized_plan, "(m.category = 'Motherboard')"), predict);
	EXPECT_GT(DepthOf(result.optimized_plan, "(c.category = 'CPU')"), predict);
	// 2 x 2 pairs reach the model instead of 4 x 4.
	EXPECT_EQ(result.plain.stats.cache_misses, 16u);
	EXPECT_EQ(result.optimized.stats.cache_misses, 4u);
	EXPECT_EQ(result.optimized.rows.size(), 2u);
}

TEST_F(OptimizerTest, GuardIsInvisibleWithoutPredict) {
	auto query = session.Plan("SELECT p.name FROM Product AS p JOIN Product AS q ON p.price < q.price "
	                          "WHERE p.category = 'CPU' AND q.quantity > 3",
	                          false);
	auto guarded = PushdownFilters(query.plan->Copy(), true);
	auto baseline = PushdownFilters(query.plan->Copy(), false);
	EXPECT_EQ(ExplainPlan(*guarded), ExplainPlan(*baseline));
}

TEST_F(OptimizerTest, PullUpAboveSelectiveJoin) {
	CreateReviewDataset(database.Tables(), {50, 200, 9, "Titanic", 3});
	session.SetFixture(Fixture("sentiment.jsonl"));
	session.Set("batch_size", int64_t(1));
	auto result = Compare("SELECT r.review FROM Movie AS m JOIN Review AS r ON m.movie_id = r.movie_id WHERE LLM m "
	                      "(PROMPT 'is the sentiment of the {{r.review}} {negative BOOLEAN}?') AND m.title = 'Titanic'");
	auto applied = result.trace.AppliedRules();
	EXPECT_NE(std::find(applied.begin(), applied.end(), kPullUpPredict), applied.end()) << result.trace.ToString();
	EXPECT_LT(DepthOf(result.optimized_plan, "PREDICT"), DepthOf(result.optimized_plan, "JOIN"));
	// Distinct review texts joined to the target: the dataset's review texts are all distinct.
	EXPECT_EQ(result.optimized.stats.calls, 9u);
	EXPECT_EQ(result.plain.stats.calls, 200u);
}

TEST_F(OptimizerTest, PureProjectionIsNotMoved) {
	auto result = Compare("SELECT m.title, LLM m (PROMPT 'what is the {language VARCHAR} of the movie {{m.title}}') "
	                      "FROM Movie AS m JOIN Review AS r ON m.movie_id = r.movie_id WHERE r.review_id < 3");
	auto applied = result.trace.AppliedRules();
	EXPECT_EQ(std::find(applied.begin(), applied.end(), kPullUpPredict), applied.end());
}

TEST_F(OptimizerTest, PullUpDeclinesWhenInputsAreProjectedAway) {
	auto result = Compare("SELECT s.title FROM (SELECT m.title, r.movie_id FROM Movie AS m JOIN Review AS r ON "
	                      "m.movie_id = r.movie_id WHERE LLM m (PROMPT 'is the sentiment of the {{r.review}} "
	                      "{negative BOOLEAN}?')) AS s WHERE s.title = 'Titanic'");
	bool declined = false;
	for (auto *entry : result.trace.Declines()) {
		declined |= entry->rule == kPullUpPredict;
	}
	EXPECT_TRUE(declined) << result.trace.ToString();
}

TEST_F(OptimizerTest, SelectOnPrimaryKeySideIsPulledUp) {
	CreateDepartments(database.Tables());
	session.SetFixture(MockFixture::Parse(kHotFixture));
	session.Set("batch_size", int64_t(1));
	auto result = Compare("SELECT e.emp_id, d.name FROM Emp AS e JOIN Dept AS d ON e.dept_id = d.dept_id "
	                      "WHERE LLM m (PROMPT 'is {{d.name}} {hot BOOLEAN}')");
	// Pushed down: one call per department row. Pulled up: one per distinct department reached by a join row.
	EXPECT_EQ(result.plain.stats.calls, 10u);
	EXPECT_EQ(result.optimized.stats.calls, 4u);
	EXPECT_LT(DepthOf(result.optimized_plan, "PREDICT"), DepthOf(result.optimized_plan, "JOIN"));
}

TEST_F(OptimizerTest, SelectOnForeignKeySideStaysBelow) {
	CreateDepartments(database.Tables());
	session.SetFixture(MockFixture::Parse(kHotFixture));
	auto result = Compare("SELECT e.emp_id, d.name FROM Emp AS e JOIN Dept AS d ON e.dept_id = d.dept_id "
	                      "WHERE LLM m (PROMPT 'is {{e.bio}} {hot BOOLEAN}')");
	EXPECT_GT(DepthOf(result.optimized_plan, "PREDICT"), DepthOf(result.optimized_plan, "JOIN"));
	auto applied = result.trace.AppliedRules();
	EXPECT_NE(std::find(applied.begin(), applied.end(), kOrderSelectVsJoin), applied.end()) << result.trace.ToString();
}

TEST_F(OptimizerTest, ManyToManyIsPulledUp) {
	RunScript(session, "CREATE TABLE Tag (item INTEGER, tag VARCHAR); CREATE TABLE Link (tag VARCHAR, url VARCHAR);"
	                   "INSERT INTO Tag VALUES (1, 'hot a'), (2, 'hot a'), (3, 'cold b'), (4, 'hot c');"
	                   "INSERT INTO Link VALUES ('hot a', 'u1'), ('hot a', 'u2'), ('cold b', 'u3'), ('zzz', 'u4');");
	session.SetFixture(MockFixture::Parse(R"({"when_contains": {"tag": "hot"}, "output": {"hot": true}}
{"default": true, "output": {"hot": false}})"));
	auto result = Compare("SELECT t.item, l.url FROM Tag AS t JOIN Link AS l ON t.tag = l.tag "
	                      "WHERE LLM m (PROMPT 'is {{l.tag}} {hot BOOLEAN}')");
	EXPECT_LT(DepthOf(result.optimized_plan, "PREDICT"), DepthOf(result.optimized_plan, "JOIN"));
	EXPECT_EQ(result.optimized.rows.size(), 4u);
}

TEST_F(OptimizerTest, SameInputProjectionsMerge) {
	auto table = std::make_shared<Table>("Posts", std::vector<ColumnSchema> {{"id", LogicalType::Integer},
	                                                                         {"text", LogicalType::Varchar}});
	for (int64_t i = 0; i < 100; i++) {
		table->AppendRow({Value::Integer(i), Value::Varchar("post " + std::to_string(i))});
	}
	database.Tables().CreateTable(table);
	session.SetFixture(MockFixture::Parse(kHotFixture));
	session.Set("batch_size", int64_t(1));
	auto result = Compare("SELECT id, LLM m (PROMPT 'sentiment of {{text}} {negative BOOLEAN}'), "
	                      "LLM m (PROMPT 'topic of {{text}} {topic VARCHAR}') FROM Posts");
	EXPECT_EQ(result.plain.stats.calls, 200u);
	EXPECT_EQ(result.optimized.stats.calls, 100u);
	auto optimized = session.Plan("SELECT id, LLM m (PROMPT 'sentiment of {{text}} {negative BOOLEAN}'), "
	                              "LLM m (PROMPT 'topic of {{text}} {topic VARCHAR}') FROM Posts",
	                              true);
	ASSERT_EQ(CountPredicts(*optimized.plan), 1u);
	auto order = PredictOrder(*optimized.plan);
	EXPECT_NE(order[0].find("Task 1"), std::string::npos);
	EXPECT_NE(order[0].find("Task 2"), std::string::npos);
}

TEST_F(OptimizerTest, HighlySelectiveSelectsDoNotMerge) {
	auto sql = std::string("SELECT title FROM Movie WHERE LLM m (PROMPT 'is {{plot}} sad {sad BOOLEAN}', OPTIONS "
	                       "{'selectivity': 0.05}) AND LLM m (PROMPT 'is {{plot}} long {long BOOLEAN}', OPTIONS "
	                       "{'selectivity': 0.05})");
	RewriteTrace trace;
	auto optimized = session.Plan(sql, true, &trace);
	EXPECT_EQ(CountPredicts(*optimized.plan), 2u);
	bool declined = false;
	for (auto *entry : trace.Declines()) {
		declined |= entry->rule == kMergeSemanticPredicates;
	}
	EXPECT_TRUE(declined) << trace.ToString();
	// Unhinted selects on the same input do merge.
	auto merged = session.Plan("SELECT title FROM Movie WHERE LLM m (PROMPT 'is {{plot}} sad {sad BOOLEAN}') AND "
	                           "LLM m (PROMPT 'is {{plot}} long {long BOOLEAN}')",
	                           true);
	EXPECT_EQ(CountPredicts(*merged.plan), 1u);
}

TEST_F(OptimizerTest, DifferentModelsNeverMerge) {
	session.Execute("CREATE LLM MODEL other PATH 'o' ON PROMPT");
	auto plan = session.Plan("SELECT LLM m (PROMPT 'a {{plot}} {x VARCHAR}'), LLM other (PROMPT 'b {{plot}} "
	                         "{y VARCHAR}') FROM Movie",
	                         true);
	EXPECT_EQ(CountPredicts(*plan.plan), 2u);
}

TEST_F(OptimizerTest, ShortInputSelectRunsFirst) {
	auto plan = session.Plan("SELECT title FROM Movie WHERE LLM m (PROMPT 'plot {{plot}} {a BOOLEAN}') AND "
	                         "LLM m (PROMPT 'title {{title}} {b BOOLEAN}')",
	                         true);
	auto order = PredictOrder(*plan.plan);
	ASSERT_EQ(order.size(), 2u);
	EXPECT_EQ(order[0], "title {{title}} {b BOOLEAN}");
}

TEST_F(OptimizerTest, EqualAnnotationsKeepOriginalOrder) {
	RunScript(session, "CREATE TABLE Pair (x VARCHAR, y VARCHAR); INSERT INTO Pair VALUES ('aaaa', 'bbbb');");
	auto plan = session.Plan("SELECT x FROM Pair WHERE LLM m (PROMPT 'first {{x}} {a BOOLEAN}') AND "
	                         "LLM m (PROMPT 'second {{y}} {b BOOLEAN}')",
	                         true);
	auto plain = session.Plan("SELECT x FROM Pair WHERE LLM m (PROMPT 'first {{x}} {a BOOLEAN}') AND "
	                          "LLM m (PROMPT 'second {{y}} {b BOOLEAN}')",
	                          false);
	EXPECT_EQ(PredictOrder(*plan.plan), PredictOrder(*plain.plan));
}

TEST_F(OptimizerTest, SelectivityBreaksSizeTies) {
	RunScript(session, "CREATE TABLE Pair (x VARCHAR, y VARCHAR); INSERT INTO Pair VALUES ('aaaa', 'bbbb');");
	auto plan = session.Plan("SELECT x FROM Pair WHERE LLM m (PROMPT 'first {{x}} {a BOOLEAN}', OPTIONS "
	                         "{'selectivity': 0.9}) AND LLM m (PROMPT 'second {{y}} {b BOOLEAN}', OPTIONS "
	                         "{'selectivity': 0.1})",
	                         true);
	auto order = PredictOrder(*plan.plan);
	ASSERT_EQ(order.size(), 2u);
	EXPECT_EQ(order[0].rfind("second", 0), 0u);
	// Size still dominates selectivity.
	auto sized = session.Plan("SELECT title FROM Movie WHERE LLM m (PROMPT 'plot {{plot}} {a BOOLEAN}', OPTIONS "
	                          "{'selectivity': 0.1}) AND LLM m (PROMPT 'title {{title}} {b BOOLEAN}', OPTIONS "
	                          "{'selectivity': 0.9})",
	                          true);
	EXPECT_EQ(PredictOrder(*sized.plan).at(0).rfind("title", 0), 0u);
}

TEST_F(OptimizerTest, CorpusRewritesPreserveResults) {
	for (auto &parsed : ParseScript(ReadFile(DataPath("corpus.sql")))) {
		if (auto *select = std::get_if<SelectStatement>(&parsed.statement)) {
			auto sql = ToSQL(*select);
			auto result = Compare(sql);
			EXPECT_LE(result.optimized.stats.calls, result.plain.stats.calls) << sql;
		} else if (!std::holds_alternative<CreateModelStatement>(parsed.statement)) {
			session.Execute(parsed.statement);
		} else {
			try {
				session.Execute(parsed.statement);
			} catch (const CatalogException &) {
			}
		}
	}
}

TEST_F(OptimizerTest, TraceReplayReproducesPlan) {
	CreateReviewDataset(database.Tables(), {20, 80, 5, "Titanic", 9});
	const char *queries[] = {
	    "SELECT r.review FROM Movie AS m JOIN Review AS r ON m.movie_id = r.movie_id WHERE LLM m (PROMPT 'is the "
	    "sentiment of the {{r.review}} {negative BOOLEAN}?') AND m.title = 'Titanic'",
	    "SELECT title FROM Movie WHERE LLM m (PROMPT 'plot {{plot}} {a BOOLEAN}') AND LLM m (PROMPT 'title "
	    "{{title}} {b BOOLEAN}') AND movie_id > 3",
	    "SELECT movie_id, LLM m (PROMPT 'x {{plot}} {x VARCHAR}'), LLM m (PROMPT 'y {{plot}} {y VARCHAR}') FROM Movie",
	};
	for (auto sql : queries) {
		RewriteTrace trace;
		auto optimized = session.Plan(sql, true, &trace);
		auto plain = session.Plan(sql, false);
		std::vector<std::string> applied = trace.AppliedRules();
		auto replayed = Optimizer().Replay(std::move(plain.plan), applied);
		EXPECT_EQ(ExplainPlan(*replayed), ExplainPlan(*optimized.plan)) << sql << "\n" << trace.ToString();
	}
}

TEST_F(OptimizerTest, RuleOrderDoesNotChangeCallCount) {
	CreateReviewDataset(database.Tables(), {20, 80, 5, "Titanic", 9});
	session.SetFixture(Fixture("sentiment.jsonl"));
	session.Set("batch_size", int64_t(1));
	const char *sql = "SELECT r.review FROM Movie AS m JOIN Review AS r ON m.movie_id = r.movie_id WHERE LLM m "
	                  "(PROMPT 'is the sentiment of the {{r.review}} {negative BOOLEAN}?') AND LLM m (PROMPT 'is "
	                  "{{r.review}} long {long BOOLEAN}') AND m.title = 'Titanic'";
	auto rules = AllRewriteRules();
	session.Set("optimizer_rules", string_util::Join(rules, ","));
	auto forward = session.Execute(sql);
	std::reverse(rules.begin(), rules.end());
	session.Set("optimizer_rules", string_util::Join(rules, ","));
	auto backward = session.Execute(sql);
	EXPECT_EQ(forward.stats.calls, backward.stats.calls);
	EXPECT_EQ(Sorted(forward.rows), Sorted(backward.rows));
}
