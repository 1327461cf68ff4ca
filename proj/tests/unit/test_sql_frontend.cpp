#include "../support/test_helpers.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/sql/options.hpp"
#include "semaquery/sql/prompt_template.hpp"
#include "semaquery/sql/token.hpp"

#include <gtest/gtest.h>

#include <random>
#include <regex>

using namespace semaquery;
using namespace semaquery::test;

namespace {

std::vector<ParsedStatement> Corpus() {
	return ParseScript(ReadFile(DataPath("corpus.sql")));
}

void ExpectLineColumn(const std::string &text) {
	try {
		ParseScript(text);
	} catch (const ParserException &error) {
		EXPECT_TRUE(std::regex_search(error.what(), std::regex("line [0-9]+, column [0-9]+"))) << error.what();
		return;
	}
	// Accepted mutations are fine; only rejections must carry a position.
}

} // namespace

TEST(Lexer, SimpleSelect) {
	auto tokens = Tokenize("SELECT 1;");
	ASSERT_EQ(tokens.size(), 4u);
	EXPECT_TRUE(tokens[0].IsKeyword("SELECT"));
	EXPECT_EQ(tokens[1].type, TokenType::Integer);
	EXPECT_EQ(tokens[1].text, "1");
	EXPECT_TRUE(tokens[2].IsOperator(";"));
	EXPECT_EQ(tokens[3].type, TokenType::End);
}

TEST(Lexer, CreateModelKeywords) {
	auto tokens = Tokenize("CREATE LLM MODEL o4mini PATH 'o4-mini' ON PROMPT API 'https://api.openai.com/v1/';");
	for (auto keyword : {"LLM", "MODEL", "PATH", "ON", "PROMPT", "API"}) {
		bool found = std::any_of(tokens.begin(), tokens.end(), [&](const Token &t) { return t.IsKeyword(keyword); });
		EXPECT_TRUE(found) << keyword;
	}
}

TEST(Lexer, PromptStringKeepsBraces) {
	auto tokens = Tokenize("PROMPT 'a {{b}} {c INT}'");
	ASSERT_EQ(tokens.size(), 3u);
	EXPECT_EQ(tokens[1].type, TokenType::String);
	EXPECT_EQ(tokens[1].text, "a {{b}} {c INT}");
}

TEST(Lexer, UnterminatedStringAndComment) {
	try {
		Tokenize("SELECT\n  'abc");
		FAIL();
	} catch (const ParserException &error) {
		EXPECT_EQ(error.Position().line, 2u);
		EXPECT_EQ(error.Position().column, 3u);
	}
	EXPECT_THROW(Tokenize("SELECT /* never closed"), ParserException);
}

TEST(Parser, WholeCorpusParses) {
	auto statements = Corpus();
	EXPECT_EQ(statements.size(), 14u);
}

TEST(Parser, PrettyPrintIsAFixpoint) {
	for (auto &parsed : Corpus()) {
		auto printed = ToSQL(parsed.statement);
		auto reparsed = ParseStatement(printed);
		EXPECT_TRUE(reparsed == parsed.statement) << parsed.text << "\nprinted as\n" << printed;
		EXPECT_EQ(ToSQL(reparsed), printed);
	}
}

TEST(Parser, SemanticJoinCondition) {
	auto statement = ParseStatement("SELECT c.name, m.name FROM Product AS m JOIN Product AS c ON LLM o4mini "
	                                "(PROMPT 'is CPU  {{c.name}} {compatible BOOLEAN} with motherboard {{m.name}}')");
	auto &select = std::get<SelectStatement>(statement);
	ASSERT_TRUE(select.from);
	ASSERT_EQ(select.from->type, TableRefType::Join);
	ASSERT_TRUE(select.from->condition);
	EXPECT_EQ(select.from->condition->type, ExpressionType::Semantic);
	EXPECT_EQ((*select.from->condition->semantic)->model, "o4mini");
}

TEST(Parser, GenerationInFromHasNoSource) {
	auto statement = ParseStatement("SELECT * FROM LLM m (PROMPT 'list {x VARCHAR}')");
	auto &from = *std::get<SelectStatement>(statement).from;
	ASSERT_EQ(from.type, TableRefType::Semantic);
	EXPECT_FALSE((*from.semantic)->source.has_value());
}

TEST(Parser, AggOutsideProjectionRejected) {
	EXPECT_THROW(ParseStatement("SELECT a FROM t WHERE LLM AGG m (PROMPT 'x {{a}} {y BOOLEAN}')"), ParserException);
	EXPECT_THROW(ParseStatement("SELECT a FROM t ORDER BY LLM AGG m (PROMPT 'x {{a}} {y VARCHAR}')"),
	             ParserException);
}

TEST(Parser, ExpectedTokenDiagnostic) {
	try {
		ParseStatement("SELECT a FROM");
		FAIL();
	} catch (const ParserException &error) {
		EXPECT_NE(std::string(error.what()).find("expected"), std::string::npos) << error.what();
		EXPECT_NE(std::string(error.what()).find("line 1"), std::string::npos) << error.what();
	}
}

TEST(Parser, CreateModelVariants) {
	auto tabular = std::get<CreateModelStatement>(ParseStatement(
	    "CREATE TABULAR MODEL c PATH 'x.onnx' ON TABLE Product FEATURES (name, price) OUTPUT (cat INTEGER)"));
	EXPECT_EQ(tabular.type, ModelType::Tabular);
	EXPECT_EQ(tabular.features, (std::vector<std::string> {"name", "price"}));
	EXPECT_EQ(tabular.table, std::optional<std::string>("Product"));
	EXPECT_THROW(ParseStatement("CREATE TABULAR MODEL c PATH 'x.onnx'"), ParserException);
	EXPECT_THROW(ParseStatement("CREATE TABULAR MODEL c PATH 'x' ON PROMPT FEATURES (a) OUTPUT (b INTEGER)"),
	             ParserException);
	auto embed = std::get<CreateModelStatement>(ParseStatement("CREATE EMBED MODEL e PATH 'e5'"));
	EXPECT_EQ(embed.type, ModelType::Embed);
}

TEST(Parser, MutatedCorpusErrorsCarryPosition) {
	auto text = ReadFile(DataPath("corpus.sql"));
	auto tokens = Tokenize(text);
	std::mt19937_64 rng(5);
	for (int trial = 0; trial < 300; trial++) {
		auto &victim = tokens[rng() % (tokens.size() - 1)];
		auto mutated = text;
		mutated.erase(victim.offset, victim.length);
		ExpectLineColumn(mutated);
	}
}

TEST(PromptTemplate, BillingAddressExample) {
	auto prompt = PromptTemplate::Parse("find{state VARCHAR},{country VARCHAR} from {{billing_address}}");
	ASSERT_EQ(prompt.Inputs().size(), 1u);
	EXPECT_EQ(prompt.Inputs()[0].Key(), "billing_address");
	ASSERT_EQ(prompt.Outputs().size(), 2u);
	EXPECT_EQ(prompt.Outputs()[0], (PromptOutput {"state", LogicalType::Varchar}));
	EXPECT_EQ(prompt.Outputs()[1], (PromptOutput {"country", LogicalType::Varchar}));
}

TEST(PromptTemplate, BoolNormalizesToBoolean) {
	auto prompt = PromptTemplate::Parse("is the sentiment of the {{r.review}} {negative BOOL}?");
	ASSERT_EQ(prompt.Inputs().size(), 1u);
	EXPECT_EQ(prompt.Inputs()[0].qualifier, "r");
	EXPECT_EQ(prompt.Inputs()[0].column, "review");
	EXPECT_EQ(prompt.Outputs().at(0).type, LogicalType::Boolean);
}

TEST(PromptTemplate, NoOutputsRejectedForInference) {
	auto prompt = PromptTemplate::Parse("hello world");
	EXPECT_TRUE(prompt.Inputs().empty());
	EXPECT_THROW(prompt.RequireOutputs(), ParserException);
}

TEST(PromptTemplate, Errors) {
	EXPECT_THROW(PromptTemplate::Parse("{x BLOB}"), ParserException);
	EXPECT_THROW(PromptTemplate::Parse("{{a}"), ParserException);
	EXPECT_THROW(PromptTemplate::Parse("a } b"), ParserException);
	EXPECT_THROW(PromptTemplate::Parse("{x VARCHAR} and {x INTEGER}"), ParserException);
	try {
		PromptTemplate::Parse("abc {x BLOB}");
		FAIL();
	} catch (const ParserException &error) {
		EXPECT_EQ(error.Position().column, 5u);
	}
}

TEST(PromptTemplate, EscapedBracesAreLiteral) {
	auto prompt = PromptTemplate::Parse(R"(reply like \{"a": 1\} for {{x}} {y VARCHAR})");
	EXPECT_EQ(prompt.Inputs().size(), 1u);
	EXPECT_EQ(prompt.Outputs().size(), 1u);
	auto literal = prompt.Render([](size_t) { return ""; }, [](size_t) { return ""; });
	EXPECT_EQ(literal, R"(reply like {"a": 1} for  )");
}

TEST(PromptTemplate, RenderingPreservesLiteralSegments) {
	for (auto raw : {"find{state VARCHAR},{country VARCHAR} from {{billing_address}}",
	                 "is CPU  {{c.name}} {compatible BOOLEAN} with motherboard {{m.name}}",
	                 "Summarize the cinematography {style VARCHAR} by the {{m.plot}}s"}) {
		auto prompt = PromptTemplate::Parse(raw);
		std::string literals;
		for (auto &segment : prompt.Segments()) {
			if (segment.kind == PromptSegmentKind::Literal) {
				literals += segment.text;
			}
		}
		EXPECT_EQ(prompt.Render([](size_t) { return ""; }, [](size_t) { return ""; }), literals);
		// Placeholders re-rendered in their source form reproduce the raw text.
		auto original = prompt.Render(
		    [&](size_t i) { return "{{" + prompt.Inputs()[i].Key() + "}}"; },
		    [&](size_t i) {
			    return "{" + prompt.Outputs()[i].name + " " + std::string(TypeName(prompt.Outputs()[i].type)) + "}";
		    });
		EXPECT_EQ(original, raw);
	}
}

TEST(Options, ThreeTypedEntries) {
	auto options = ParseOptions("{ 'n_threads': 1, 'batch_size': 16, 'temperature': 0.5 }");
	ASSERT_EQ(options.Size(), 3u);
	EXPECT_EQ(std::get<int64_t>(*options.Find("n_threads")), 1);
	EXPECT_EQ(std::get<int64_t>(*options.Find("batch_size")), 16);
	EXPECT_DOUBLE_EQ(std::get<double>(*options.Find("temperature")), 0.5);
}

TEST(Options, EmptyStringAndTrailingComma) {
	EXPECT_TRUE(ParseOptions("{}").Empty());
	auto options = ParseOptions("{ 'x': 'y', 'flag': true,}");
	EXPECT_EQ(std::get<std::string>(*options.Find("x")), "y");
	EXPECT_TRUE(std::get<bool>(*options.Find("flag")));
}

TEST(Options, DuplicateAndMalformed) {
	EXPECT_THROW(ParseOptions("{'a': 1, 'a': 2}"), ParserException);
	EXPECT_THROW(ParseOptions("{'a': }"), ParserException);
	EXPECT_THROW(ParseOptions("{'a' 1}"), ParserException);
}
