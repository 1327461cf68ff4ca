#include "../support/test_helpers.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/planner/logical_operator.hpp"

#include <gtest/gtest.h>

using namespace semaquery;
using namespace semaquery::test;

namespace {

class BinderTest : public ::testing::Test {
protected:
	void SetUp() override {
		RunScript(session, ReadFile(DataPath("corpus_setup.sql")));
		RunScript(session, "CREATE LLM MODEL o4mini PATH 'o4-mini' ON PROMPT;"
		                   "CREATE TABULAR MODEL categorizer PATH 'c.onnx' ON TABLE Product "
		                   "FEATURES (name, description, price) OUTPUT (category_id INTEGER);");
		session.SetFixture(Fixture("corpus.jsonl"));
	}

	std::vector<const LogicalOperator *> Nodes(const BoundQuery &query) {
		std::vector<const LogicalOperator *> nodes;
		VisitPlan(*query.plan, [&](const LogicalOperator &op) { nodes.push_back(&op); });
		return nodes;
	}

	std::vector<const LogicalPredict *> Predicts(const BoundQuery &query) {
		std::vector<const LogicalPredict *> result;
		for (auto *node : Nodes(query)) {
			if (node->type == LogicalOperatorType::Predict) {
				result.push_back(&node->Cast<LogicalPredict>());
			}
		}
		return result;
	}

	std::vector<std::string> Names(const std::vector<ColumnBinding> &columns) {
		std::vector<std::string> names;
		for (auto &column : columns) {
			names.push_back(column.name);
		}
		return names;
	}

	Database database;
	Session session {database};
};

} // namespace

TEST_F(BinderTest, TableInferenceUnderFilterUnderAggregate) {
	auto query = session.Plan("SELECT state, avg(sale) AS total_sales FROM LLM o4mini(PROMPT 'find{state VARCHAR},"
	                          "{country VARCHAR} from {{billing_address}}',\"Order\") WHERE country = 'USA' GROUP BY state",
	                          false);
	auto nodes = Nodes(query);
	ASSERT_GE(nodes.size(), 5u);
	EXPECT_EQ(nodes[1]->type, LogicalOperatorType::Aggregate);
	EXPECT_EQ(nodes[2]->type, LogicalOperatorType::Filter);
	ASSERT_EQ(nodes[3]->type, LogicalOperatorType::Predict);
	auto &info = *nodes[3]->Cast<LogicalPredict>().info;
	EXPECT_EQ(info.mode, PredictMode::TableInference);
	ASSERT_EQ(info.inputs.size(), 1u);
	EXPECT_EQ(info.inputs[0].key, "billing_address");
	EXPECT_EQ(Names(info.outputs), (std::vector<std::string> {"state", "country"}));
	// Table inference appends the predicted columns to every column of the source.
	EXPECT_EQ(Names(nodes[3]->Columns()),
	          (std::vector<std::string> {"order_id", "billing_address", "sale", "state", "country"}));
}

TEST_F(BinderTest, ScalarProjection) {
	auto query = session.Plan(
	    "SELECT title, LLM o4mini (PROMPT 'what is the  {language VARCHAR} of the movie {{title}}') FROM Movie", false);
	auto nodes = Nodes(query);
	EXPECT_EQ(nodes[0]->type, LogicalOperatorType::Project);
	ASSERT_EQ(nodes[1]->type, LogicalOperatorType::Predict);
	auto &info = *nodes[1]->Cast<LogicalPredict>().info;
	EXPECT_EQ(info.mode, PredictMode::Scalar);
	EXPECT_EQ(info.outputs.size(), 1u);
	EXPECT_EQ(query.names, (std::vector<std::string> {"title", "language"}));
}

TEST_F(BinderTest, UnknownPromptInput) {
	EXPECT_THROW(session.Plan("SELECT LLM o4mini (PROMPT 'x {{plot}} {y VARCHAR}') FROM Product", false),
	             BinderException);
}

TEST_F(BinderTest, UnknownModelAndColumn) {
	try {
		session.Plan("SELECT LLM nope (PROMPT '{{name}} {y VARCHAR}') FROM Product", false);
		FAIL();
	} catch (const Exception &error) {
		EXPECT_NE(std::string(error.what()).find("nope"), std::string::npos);
	}
	EXPECT_THROW(session.Plan("SELECT missing FROM Product", false), BinderException);
}

TEST_F(BinderTest, PredictedTypeMismatch) {
	EXPECT_THROW(session.Plan("SELECT name FROM Product WHERE LLM o4mini (PROMPT '{{name}} {n INTEGER}') = 'abc'",
	                          false),
	             BinderException);
}

TEST_F(BinderTest, SemanticJoinLowering) {
	session.Execute("CREATE TABLE MaturityRating AS SELECT maturity_label, description FROM LLM o4mini (PROMPT "
	                "'Get all the maturity {maturity_label VARCHAR} and {description VARCHAR} in US')");
	auto query = session.Plan("SELECT m.title, mr.maturity_label FROM Movie AS m JOIN MaturityRating AS mr ON LLM "
	                          "o4mini (PROMPT 'is maturity rating {{mr.description}} depicted in the {{m.plot}}')",
	                          false);
	auto nodes = Nodes(query);
	ASSERT_EQ(nodes[1]->type, LogicalOperatorType::Filter);
	ASSERT_EQ(nodes[2]->type, LogicalOperatorType::Predict);
	ASSERT_EQ(nodes[3]->type, LogicalOperatorType::Join);
	EXPECT_EQ(nodes[3]->Cast<LogicalJoin>().join_type, LogicalJoinType::Cross);
	auto &info = *nodes[2]->Cast<LogicalPredict>().info;
	EXPECT_EQ(info.outputs.at(0).type, LogicalType::Boolean);
	EXPECT_TRUE(info.implicit_output);
}

TEST_F(BinderTest, OneSidedJoinPromptBecomesSelect) {
	auto query = session.Plan("SELECT m.title, r.review FROM Movie AS m JOIN Review AS r ON m.movie_id = r.movie_id "
	                          "AND LLM o4mini (PROMPT 'is {{r.review}} {negative BOOLEAN}')",
	                          false);
	bool noticed = std::any_of(query.warnings.begin(), query.warnings.end(),
	                           [](const std::string &w) { return w.find("one side") != std::string::npos; });
	EXPECT_TRUE(noticed);
	// The predict sits on the Review side, below the join.
	bool below_join = false;
	for (auto *node : Nodes(query)) {
		if (node->type == LogicalOperatorType::Join) {
			VisitPlan(*node->children[1], [&](const LogicalOperator &op) {
				below_join |= op.type == LogicalOperatorType::Predict;
			});
		}
	}
	EXPECT_TRUE(below_join);
}

TEST_F(BinderTest, GenerationIsALeaf) {
	auto query = session.Plan("SELECT maturity_label, description FROM LLM o4mini (PROMPT 'Get all the maturity "
	                          "{maturity_label VARCHAR} and {description VARCHAR} in US')",
	                          false);
	auto predicts = Predicts(query);
	ASSERT_EQ(predicts.size(), 1u);
	EXPECT_EQ(predicts[0]->info->mode, PredictMode::TableGeneration);
	EXPECT_TRUE(predicts[0]->children.empty());
	EXPECT_TRUE(predicts[0]->info->inputs.empty());
	EXPECT_EQ(Names(predicts[0]->Columns()), (std::vector<std::string> {"maturity_label", "description"}));
}

TEST_F(BinderTest, SemanticJoinSchemaIsUnion) {
	RunScript(session, "CREATE TABLE R (a INTEGER); CREATE TABLE S (b INTEGER);");
	auto query = session.Plan("SELECT * FROM R JOIN S ON LLM o4mini (PROMPT '{{R.a}} vs {{S.b}} {ok BOOLEAN}')", false);
	EXPECT_EQ(query.names, (std::vector<std::string> {"a", "b"}));
}

TEST_F(BinderTest, PredictedNameCollision) {
	try {
		session.Plan("SELECT * FROM LLM o4mini (PROMPT 'get {title VARCHAR} from {{plot}}', Movie)", false);
		FAIL();
	} catch (const BinderException &error) {
		EXPECT_NE(std::string(error.what()).find("alias"), std::string::npos) << error.what();
	}
}

TEST_F(BinderTest, AggregateOnlyInGroupedProjection) {
	EXPECT_THROW(session.Plan("SELECT LLM AGG o4mini (PROMPT 'sum up {{plot}} {s VARCHAR}'), title FROM Movie", false),
	             BinderException);
	EXPECT_NO_THROW(session.Plan("SELECT LLM AGG o4mini (PROMPT 'sum up {{plot}} {s VARCHAR}') FROM Movie", false));
}

TEST_F(BinderTest, TabularPredictClauses) {
	auto from = session.Plan("SELECT name, category_id FROM PREDICT categorizer (Product)", false);
	EXPECT_EQ(Predicts(from).at(0)->info->mode, PredictMode::TableInference);
	auto scalar = session.Plan("SELECT name, PREDICT categorizer (name, description, price) FROM Product", false);
	EXPECT_EQ(Predicts(scalar).at(0)->info->mode, PredictMode::Scalar);
	EXPECT_THROW(session.Plan("SELECT PREDICT categorizer (name) FROM Product", false), BinderException);
}

TEST_F(BinderTest, ScalarInOrderByPlacedAboveProvider) {
	auto query = session.Plan("SELECT title FROM Movie ORDER BY LLM o4mini (PROMPT 'rank {{plot}} {score INTEGER}')",
	                          false);
	auto predicts = Predicts(query);
	ASSERT_EQ(predicts.size(), 1u);
	EXPECT_EQ(predicts[0]->children.at(0)->type, LogicalOperatorType::Get);
}

TEST_F(BinderTest, TautologicalSelectIsIdentity) {
	session.SetFixture(MockFixture::Parse(R"({"default": true, "output": {"keep": true}})"));
	auto all = session.Execute("SELECT review_id, review FROM Review");
	auto kept = session.Execute("SELECT review_id, review FROM Review WHERE LLM o4mini (PROMPT '{{review}} {keep BOOLEAN}')");
	EXPECT_EQ(kept.rows, all.rows);
}

TEST_F(BinderTest, SelectThenProjectMatchesRowwiseFilter) {
	session.SetFixture(Fixture("sentiment.jsonl"));
	auto result = session.Execute("SELECT review_id FROM Review WHERE LLM o4mini (PROMPT "
	                              "'sentiment of {{review}} {negative BOOLEAN}')");
	std::vector<Row> expected;
	auto table = database.Tables().GetTable("Review");
	for (size_t r = 0; r < table->RowCount(); r++) {
		auto row = table->GetRow(r);
		auto &text = row[2].GetString();
		if (text.find("awful") != std::string::npos || text.find("boring") != std::string::npos) {
			expected.push_back({row[0]});
		}
	}
	EXPECT_EQ(result.rows, expected);
}

TEST(Binder, ExplainIsStableAndRebindsIsomorphically) {
	Database database;
	Session session(database);
	RunScript(session, ReadFile(DataPath("corpus_setup.sql")));
	for (auto &parsed : ParseScript(ReadFile(DataPath("corpus.sql")))) {
		if (!std::holds_alternative<SelectStatement>(parsed.statement)) {
			session.Execute(parsed.statement);
			continue;
		}
		auto &select = std::get<SelectStatement>(parsed.statement);
		auto first = ExplainPlan(*session.Plan(select, false).plan);
		auto second = ExplainPlan(*session.Plan(select, false).plan);
		auto rebound = ExplainPlan(*session.Plan(ToSQL(select), false).plan);
		EXPECT_EQ(first, second);
		EXPECT_EQ(first, rebound) << parsed.text;
	}
}
