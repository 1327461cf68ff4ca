#include "semaquery/sql/parser.hpp"

#include "semaquery/common/string_util.hpp"
#include "semaquery/sql/token.hpp"

#include <algorithm>

namespace semaquery {

namespace {

std::string Describe(const Token &token) {
	if (token.type == TokenType::End) {
		return "end of input";
	}
	if (token.type == TokenType::String) {
		return "string '" + token.text + "'";
	}
	return "'" + token.text + "'";
}

class Parser {
public:
	explicit Parser(std::string_view text) : text_(text), tokens_(Tokenize(text)) {
	}

	std::vector<ParsedStatement> ParseScript() {
		std::vector<ParsedStatement> result;
		while (true) {
			while (MatchOperator(";")) {
			}
			if (Peek().type == TokenType::End) {
				return result;
			}
			const Token &start = Peek();
			auto statement = ParseStatement();
			const Token &last = tokens_[index_ - 1];
			std::string text(text_.substr(start.offset, last.offset + last.length - start.offset));
			result.push_back(ParsedStatement {std::move(statement), std::move(text), start.pos});
			if (!MatchOperator(";") && Peek().type != TokenType::End) {
				ErrorExpected("';' or end of input");
			}
		}
	}

	Statement ParseSingle() {
		auto statement = ParseStatement();
		MatchOperator(";");
		if (Peek().type != TokenType::End) {
			ErrorExpected("end of statement");
		}
		return statement;
	}

	ParsedExpression ParseStandaloneExpression() {
		auto expression = ParseExpression();
		if (Peek().type != TokenType::End) {
			ErrorExpected("end of expression");
		}
		return expression;
	}

	OptionMap ParseStandaloneOptions() {
		auto options = ParseOptionsBody();
		if (Peek().type != TokenType::End) {
			ErrorExpected("end of OPTIONS");
		}
		return options;
	}

private:
	const Token &Peek(size_t offset = 0) const {
		return tokens_[std::min(index_ + offset, tokens_.size() - 1)];
	}

	const Token &Advance() {
		const Token &token = tokens_[index_];
		if (index_ + 1 < tokens_.size()) {
			index_++;
		}
		return token;
	}

	bool MatchKeyword(std::string_view keyword) {
		if (Peek().IsKeyword(keyword)) {
			Advance();
			return true;
		}
		return false;
	}

	void ExpectKeyword(std::string_view keyword) {
		if (!MatchKeyword(keyword)) {
			ErrorExpected(std::string(keyword));
		}
	}

	bool MatchOperator(std::string_view op) {
		if (Peek().IsOperator(op)) {
			Advance();
			return true;
		}
		return false;
	}

	void ExpectOperator(std::string_view op) {
		if (!MatchOperator(op)) {
			ErrorExpected("'" + std::string(op) + "'");
		}
	}

	[[noreturn]] void ErrorExpected(const std::string &what) const {
		throw ParserException("syntax error: expected " + what + " but found " + Describe(Peek()), Peek().pos);
	}

	[[noreturn]] void Error(const std::string &message, SourcePosition pos) const {
		throw ParserException(message, pos);
	}

	//! Identifiers and non-reserved keywords can name things.
	bool PeekIsName(size_t offset = 0) const {
		auto &token = Peek(offset);
		return token.type == TokenType::Identifier || token.type == TokenType::QuotedIdentifier ||
		       (token.type == TokenType::Keyword && !IsReservedKeyword(string_util::Upper(token.text)));
	}

	std::string ParseName(const char *what) {
		if (!PeekIsName()) {
			ErrorExpected(what);
		}
		return Advance().text;
	}

	//! Any word, including reserved keywords. Used where no clause keyword can follow, e.g. the LLM source slot.
	std::string ParseAnyWord(const char *what) {
		if (!PeekIsName() && Peek().type != TokenType::Keyword) {
			ErrorExpected(what);
		}
		return Advance().text;
	}

	std::string ParseStringLiteral(const char *what) {
		if (Peek().type != TokenType::String) {
			ErrorExpected(what);
		}
		return Advance().text;
	}

	Statement ParseStatement() {
		auto &token = Peek();
		if (token.IsKeyword("SELECT")) {
			return ParseSelect();
		}
		if (token.IsKeyword("CREATE")) {
			if (Peek(1).IsKeyword("TABLE")) {
				return ParseCreateTable();
			}
			return ParseCreateModel();
		}
		if (token.IsKeyword("INSERT")) {
			return ParseInsert();
		}
		if (token.IsKeyword("ALTER")) {
			return ParseAlter();
		}
		if (token.IsKeyword("SET")) {
			return ParseSet();
		}
		if (token.IsKeyword("DROP")) {
			return ParseDrop();
		}
		if (token.IsKeyword("EXPLAIN")) {
			return ParseExplain();
		}
		ErrorExpected("SELECT, CREATE, INSERT, ALTER, SET, DROP or EXPLAIN");
	}

	// ---- SELECT ----

	SelectStatement ParseSelect() {
		ExpectKeyword("SELECT");
		SelectStatement select;
		select.distinct = MatchKeyword("DISTINCT");
		do {
			select.select_list.push_back(ParseSelectItem());
		} while (MatchOperator(","));
		if (MatchKeyword("FROM")) {
			select.from = ParseTableRef();
		}
		if (MatchKeyword("WHERE")) {
			select.where = ParseExpression();
		}
		if (MatchKeyword("GROUP")) {
			ExpectKeyword("BY");
			do {
				select.group_by.push_back(ParseExpression());
			} while (MatchOperator(","));
		}
		if (MatchKeyword("HAVING")) {
			select.having = ParseExpression();
		}
		if (MatchKeyword("ORDER")) {
			ExpectKeyword("BY");
			do {
				OrderItem item;
				item.expression = ParseExpression();
				if (MatchKeyword("DESC")) {
					item.descending = true;
				} else {
					MatchKeyword("ASC");
				}
				select.order_by.push_back(std::move(item));
			} while (MatchOperator(","));
		}
		if (MatchKeyword("LIMIT")) {
			if (Peek().type != TokenType::Integer) {
				ErrorExpected("integer LIMIT");
			}
			auto &token = Advance();
			auto limit = string_util::ParseInteger(token.text);
			if (!limit) {
				Error("LIMIT out of range", token.pos);
			}
			select.limit = *limit;
		}
		return select;
	}

	SelectItem ParseSelectItem() {
		SelectItem item;
		if (Peek().IsOperator("*")) {
			item.expression.type = ExpressionType::Star;
			item.expression.pos = Advance().pos;
			return item;
		}
		if (PeekIsName() && Peek(1).IsOperator(".") && Peek(2).IsOperator("*")) {
			item.expression.type = ExpressionType::Star;
			item.expression.pos = Peek().pos;
			item.expression.column_name.push_back(Advance().text);
			Advance();
			Advance();
			return item;
		}
		allow_agg_ = true;
		item.expression = ParseExpression();
		allow_agg_ = false;
		item.alias = ParseOptionalAlias();
		return item;
	}

	std::string ParseOptionalAlias() {
		if (MatchKeyword("AS")) {
			return ParseName("alias");
		}
		if (Peek().type == TokenType::Identifier || Peek().type == TokenType::QuotedIdentifier) {
			return Advance().text;
		}
		return "";
	}

	TableRef ParseTableRef() {
		auto left = ParseTableRefPrimary();
		while (true) {
			JoinType join_type;
			if (MatchOperator(",")) {
				join_type = JoinType::Cross;
			} else if (MatchKeyword("CROSS")) {
				ExpectKeyword("JOIN");
				join_type = JoinType::Cross;
			} else if (MatchKeyword("NATURAL")) {
				ExpectKeyword("JOIN");
				join_type = JoinType::Natural;
			} else if (MatchKeyword("INNER")) {
				ExpectKeyword("JOIN");
				join_type = JoinType::Inner;
			} else if (MatchKeyword("JOIN")) {
				join_type = JoinType::Inner;
			} else {
				return left;
			}
			TableRef join;
			join.type = TableRefType::Join;
			join.join_type = join_type;
			join.left = Box<TableRef>(std::move(left));
			join.right = Box<TableRef>(ParseTableRefPrimary());
			if (join_type == JoinType::Inner) {
				if (MatchKeyword("ON")) {
					join.condition = ParseExpression();
				} else {
					join.join_type = JoinType::Cross;
				}
			}
			left = std::move(join);
		}
	}

	TableRef ParseTableRefPrimary() {
		TableRef ref;
		if (MatchOperator("(")) {
			if (Peek().IsKeyword("SELECT")) {
				ref.type = TableRefType::Subquery;
				ref.subquery = Box<SelectStatement>(ParseSelect());
				ExpectOperator(")");
			} else {
				ref = ParseTableRef();
				ExpectOperator(")");
				if (ref.type == TableRefType::Join) {
					return ref;
				}
			}
		} else if (Peek().IsKeyword("LLM") || Peek().IsKeyword("PREDICT")) {
			ref.type = TableRefType::Semantic;
			ref.semantic = Box<SemanticCall>(ParseSemanticCall(true));
		} else {
			ref.type = TableRefType::Base;
			ref.name = ParseName("table name");
		}
		ref.alias = ParseOptionalAlias();
		return ref;
	}

	//! Source relation inside an LLM/PREDICT clause.
	TableRef ParseSourceRef() {
		if (Peek().IsOperator("(") || Peek().IsKeyword("LLM") || Peek().IsKeyword("PREDICT")) {
			return ParseTableRefPrimary();
		}
		TableRef ref;
		ref.type = TableRefType::Base;
		ref.name = ParseAnyWord("source table name");
		ref.alias = ParseOptionalAlias();
		return ref;
	}

	SemanticCall ParseSemanticCall(bool from_position) {
		SemanticCall call;
		auto start = Peek().pos;
		if (MatchKeyword("PREDICT")) {
			call.type = SemanticCallType::Predict;
			call.model = ParseName("model name");
			ExpectOperator("(");
			if (from_position) {
				call.source = Box<TableRef>(ParseSourceRef());
			} else {
				do {
					if (Peek().IsKeyword("OPTIONS") && Peek(1).IsOperator("{")) {
						break;
					}
					call.arguments.push_back(ParseExpression());
				} while (MatchOperator(","));
			}
			if (MatchOperator(",") || Peek().IsKeyword("OPTIONS")) {
				ExpectKeyword("OPTIONS");
				call.options = ParseOptionsBody();
			}
			ExpectOperator(")");
			return call;
		}
		ExpectKeyword("LLM");
		call.type = SemanticCallType::Llm;
		if (MatchKeyword("AGG")) {
			if (from_position || !allow_agg_) {
				Error("LLM AGG is only allowed in the select list", start);
			}
			call.agg = true;
		}
		call.model = ParseName("model name");
		ExpectOperator("(");
		ExpectKeyword("PROMPT");
		if (Peek().type != TokenType::String) {
			ErrorExpected("prompt string");
		}
		auto &prompt_token = Advance();
		try {
			call.prompt = PromptTemplate::Parse(prompt_token.text);
		} catch (ParserException &ex) {
			throw ParserException(ex.RawMessage(), PromptPosition(prompt_token, ex.Position().column - 1));
		}
		bool has_options = false;
		while (MatchOperator(",")) {
			if (Peek().IsKeyword("OPTIONS") && Peek(1).IsOperator("{")) {
				if (has_options) {
					Error("duplicate OPTIONS in LLM clause", Peek().pos);
				}
				Advance();
				call.options = ParseOptionsBody();
				has_options = true;
			} else if (from_position && !call.source && !has_options) {
				call.source = Box<TableRef>(ParseSourceRef());
			} else {
				ErrorExpected(from_position ? "OPTIONS" : "OPTIONS (an input relation is only allowed in FROM)");
			}
		}
		ExpectOperator(")");
		return call;
	}

	//! Maps an offset inside a prompt literal back to the SQL text.
	static SourcePosition PromptPosition(const Token &token, size_t offset) {
		SourcePosition pos = token.pos;
		pos.column++; // opening quote
		for (size_t i = 0; i < offset && i < token.text.size(); i++) {
			if (token.text[i] == '\n') {
				pos.line++;
				pos.column = 1;
			} else if ((static_cast<unsigned char>(token.text[i]) & 0xC0) != 0x80) {
				pos.column++;
			}
		}
		return pos;
	}

	// ---- expressions ----

	ParsedExpression ParseExpression() {
		return ParseOr();
	}

	ParsedExpression ParseOr() {
		auto left = ParseAnd();
		while (Peek().IsKeyword("OR")) {
			Advance();
			left = ParsedExpression::Binary("OR", std::move(left), ParseAnd());
		}
		return left;
	}

	ParsedExpression ParseAnd() {
		auto left = ParseNot();
		while (Peek().IsKeyword("AND")) {
			Advance();
			left = ParsedExpression::Binary("AND", std::move(left), ParseNot());
		}
		return left;
	}

	ParsedExpression ParseNot() {
		if (Peek().IsKeyword("NOT")) {
			auto pos = Advance().pos;
			return MakeUnary("NOT", ParseNot(), pos);
		}
		return ParseComparison();
	}

	static ParsedExpression MakeUnary(std::string op, ParsedExpression child, SourcePosition pos) {
		ParsedExpression expression;
		expression.type = ExpressionType::Unary;
		expression.op = std::move(op);
		expression.pos = pos;
		expression.children.push_back(std::move(child));
		return expression;
	}

	ParsedExpression ParseComparison() {
		auto left = ParseAdditive();
		while (true) {
			auto &token = Peek();
			if (token.type == TokenType::Operator &&
			    (token.text == "=" || token.text == "<>" || token.text == "!=" || token.text == "<" ||
			     token.text == "<=" || token.text == ">" || token.text == ">=")) {
				std::string op = token.text == "!=" ? "<>" : token.text;
				Advance();
				left = ParsedExpression::Binary(op, std::move(left), ParseAdditive());
			} else if (token.IsKeyword("LIKE")) {
				Advance();
				left = ParsedExpression::Binary("LIKE", std::move(left), ParseAdditive());
			} else if (token.IsKeyword("NOT") && Peek(1).IsKeyword("LIKE")) {
				auto pos = Advance().pos;
				Advance();
				left = MakeUnary("NOT", ParsedExpression::Binary("LIKE", std::move(left), ParseAdditive()), pos);
			} else if (token.IsKeyword("IS")) {
				auto pos = Advance().pos;
				ParsedExpression is_null;
				is_null.type = ExpressionType::IsNull;
				is_null.pos = pos;
				is_null.negated = MatchKeyword("NOT");
				ExpectKeyword("NULL");
				is_null.children.push_back(std::move(left));
				left = std::move(is_null);
			} else {
				return left;
			}
		}
	}

	ParsedExpression ParseAdditive() {
		auto left = ParseMultiplicative();
		while (Peek().IsOperator("+") || Peek().IsOperator("-") || Peek().IsOperator("||")) {
			std::string op = Advance().text;
			left = ParsedExpression::Binary(op, std::move(left), ParseMultiplicative());
		}
		return left;
	}

	ParsedExpression ParseMultiplicative() {
		auto left = ParseUnary();
		while (Peek().IsOperator("*") || Peek().IsOperator("/") || Peek().IsOperator("%")) {
			std::string op = Advance().text;
			left = ParsedExpression::Binary(op, std::move(left), ParseUnary());
		}
		return left;
	}

	ParsedExpression ParseUnary() {
		if (Peek().IsOperator("-")) {
			auto pos = Advance().pos;
			auto child = ParseUnary();
			// fold negative literals so printing and reparsing agree
			if (child.type == ExpressionType::Constant && child.value.Type() == LogicalType::Integer &&
			    child.value.GetInteger() != INT64_MIN) {
				return ParsedExpression::Constant(Value::Integer(-child.value.GetInteger()), pos);
			}
			if (child.type == ExpressionType::Constant && child.value.Type() == LogicalType::Double) {
				return ParsedExpression::Constant(Value::Double(-child.value.GetDouble()), pos);
			}
			return MakeUnary("-", std::move(child), pos);
		}
		if (Peek().IsOperator("+")) {
			Advance();
			return ParseUnary();
		}
		return ParsePrimary();
	}

	ParsedExpression ParsePrimary() {
		auto &token = Peek();
		auto pos = token.pos;
		switch (token.type) {
		case TokenType::Integer: {
			auto value = string_util::ParseInteger(token.text);
			if (!value) {
				auto as_double = string_util::ParseDouble(token.text);
				if (!as_double) {
					Error("malformed integer literal '" + token.text + "'", pos);
				}
				Advance();
				return ParsedExpression::Constant(Value::Double(*as_double), pos);
			}
			Advance();
			return ParsedExpression::Constant(Value::Integer(*value), pos);
		}
		case TokenType::Float: {
			auto value = string_util::ParseDouble(token.text);
			if (!value) {
				Error("malformed number literal '" + token.text + "'", pos);
			}
			Advance();
			return ParsedExpression::Constant(Value::Double(*value), pos);
		}
		case TokenType::String: {
			auto text = Advance().text;
			return ParsedExpression::Constant(Value::Varchar(std::move(text)), pos);
		}
		default:
			break;
		}
		if (MatchKeyword("TRUE")) {
			return ParsedExpression::Constant(Value::Boolean(true), pos);
		}
		if (MatchKeyword("FALSE")) {
			return ParsedExpression::Constant(Value::Boolean(false), pos);
		}
		if (MatchKeyword("NULL")) {
			return ParsedExpression::Constant(Value::Null(), pos);
		}
		if (MatchOperator("(")) {
			if (Peek().IsKeyword("SELECT")) {
				Error("subqueries are only supported in FROM", Peek().pos);
			}
			auto inner = ParseExpression();
			ExpectOperator(")");
			return inner;
		}
		if (token.IsKeyword("LLM") || token.IsKeyword("PREDICT")) {
			ParsedExpression expression;
			expression.type = ExpressionType::Semantic;
			expression.pos = pos;
			expression.semantic = Box<SemanticCall>(ParseSemanticCall(false));
			return expression;
		}
		if (token.IsKeyword("CAST") && Peek(1).IsOperator("(")) {
			Advance();
			Advance();
			ParsedExpression cast;
			cast.type = ExpressionType::Cast;
			cast.pos = pos;
			cast.children.push_back(ParseExpression());
			ExpectKeyword("AS");
			cast.cast_type = ParseType();
			ExpectOperator(")");
			return cast;
		}
		if (token.IsOperator("*")) {
			Advance();
			ParsedExpression star;
			star.type = ExpressionType::Star;
			star.pos = pos;
			return star;
		}
		if (!PeekIsName()) {
			ErrorExpected("expression");
		}
		bool quoted = token.type == TokenType::QuotedIdentifier;
		std::string name = Advance().text;
		if (!quoted && Peek().IsOperator("(")) {
			return ParseFunction(string_util::Lower(name), pos);
		}
		std::vector<std::string> parts {std::move(name)};
		while (Peek().IsOperator(".")) {
			Advance();
			parts.push_back(ParseName("column name"));
		}
		auto column = ParsedExpression::Column(std::move(parts), pos);
		column.quoted = quoted && column.column_name.size() == 1;
		return column;
	}

	ParsedExpression ParseFunction(std::string name, SourcePosition pos) {
		ExpectOperator("(");
		ParsedExpression function;
		function.type = ExpressionType::Function;
		function.op = std::move(name);
		function.pos = pos;
		if (MatchOperator(")")) {
			return function;
		}
		if (MatchOperator("*")) {
			function.star_argument = true;
			ExpectOperator(")");
			return function;
		}
		function.distinct = MatchKeyword("DISTINCT");
		do {
			function.children.push_back(ParseExpression());
		} while (MatchOperator(","));
		ExpectOperator(")");
		return function;
	}

	LogicalType ParseType() {
		auto &token = Peek();
		if (!token.IsWord()) {
			ErrorExpected("type name");
		}
		auto type = TypeFromName(token.text);
		if (!type || *type == LogicalType::Null) {
			Error("unknown type '" + token.text + "'", token.pos);
		}
		Advance();
		// VARCHAR(n) and DECIMAL(p, s) style modifiers are accepted and ignored
		if (MatchOperator("(")) {
			while (!MatchOperator(")")) {
				if (Peek().type == TokenType::End) {
					ErrorExpected("')'");
				}
				Advance();
			}
		}
		return *type;
	}

	// ---- OPTIONS ----

	OptionMap ParseOptionsBody() {
		ExpectOperator("{");
		OptionMap options;
		if (MatchOperator("}")) {
			return options;
		}
		while (true) {
			auto &key_token = Peek();
			if (key_token.type != TokenType::String && !PeekIsName()) {
				ErrorExpected("option key");
			}
			auto key = Advance().text;
			ExpectOperator(":");
			auto value = ParseOptionValue();
			if (!options.Insert(key, std::move(value))) {
				Error("duplicate option key '" + key + "'", key_token.pos);
			}
			if (MatchOperator(",")) {
				if (MatchOperator("}")) {
					return options;
				}
				continue;
			}
			ExpectOperator("}");
			return options;
		}
	}

	OptionValue ParseOptionValue() {
		auto &token = Peek();
		bool negative = false;
		if (token.IsOperator("-")) {
			negative = true;
			Advance();
		}
		auto &literal = Peek();
		if (literal.type == TokenType::Integer) {
			auto value = string_util::ParseInteger((negative ? "-" : "") + literal.text);
			if (!value) {
				Error("malformed option value '" + literal.text + "'", literal.pos);
			}
			Advance();
			return OptionValue(*value);
		}
		if (literal.type == TokenType::Float) {
			auto value = string_util::ParseDouble(literal.text);
			if (!value) {
				Error("malformed option value '" + literal.text + "'", literal.pos);
			}
			Advance();
			return OptionValue(negative ? -*value : *value);
		}
		if (negative) {
			ErrorExpected("number after '-'");
		}
		if (literal.type == TokenType::String) {
			return OptionValue(std::string(Advance().text));
		}
		if (MatchKeyword("TRUE")) {
			return OptionValue(true);
		}
		if (MatchKeyword("FALSE")) {
			return OptionValue(false);
		}
		Error("malformed option value " + Describe(literal) + ": expected a number, string, TRUE or FALSE",
		      literal.pos);
	}

	// ---- DDL / utility ----

	CreateModelStatement ParseCreateModel() {
		auto start = Peek().pos;
		ExpectKeyword("CREATE");
		CreateModelStatement stmt;
		if (MatchKeyword("LLM")) {
			stmt.type = ModelType::Llm;
		} else if (MatchKeyword("TABULAR")) {
			stmt.type = ModelType::Tabular;
		} else if (MatchKeyword("EMBED")) {
			stmt.type = ModelType::Embed;
		} else {
			ErrorExpected("LLM, TABULAR, EMBED or TABLE");
		}
		ExpectKeyword("MODEL");
		stmt.name = ParseName("model name");
		bool has_path = false, has_options = false, has_features = false, has_output = false;
		auto duplicate = [&](bool seen, const char *clause) {
			if (seen) {
				Error(std::string("duplicate ") + clause + " clause", Peek().pos);
			}
		};
		while (Peek().type != TokenType::End && !Peek().IsOperator(";")) {
			if (Peek().IsKeyword("PATH")) {
				duplicate(has_path, "PATH");
				Advance();
				stmt.path = ParseStringLiteral("model path string");
				has_path = true;
			} else if (Peek().IsKeyword("ON") && Peek(1).IsKeyword("PROMPT")) {
				duplicate(stmt.on_prompt, "ON PROMPT");
				Advance();
				Advance();
				stmt.on_prompt = true;
			} else if (Peek().IsKeyword("ON") && Peek(1).IsKeyword("TABLE")) {
				duplicate(stmt.table.has_value(), "ON TABLE");
				Advance();
				Advance();
				stmt.table = ParseName("table name");
			} else if (Peek().IsKeyword("API")) {
				duplicate(stmt.api.has_value(), "API");
				Advance();
				stmt.api = ParseStringLiteral("API URL string");
			} else if (Peek().IsKeyword("SECRET")) {
				duplicate(stmt.secret.has_value(), "SECRET");
				Advance();
				stmt.secret = Peek().type == TokenType::String ? Advance().text : ParseName("secret name");
			} else if (Peek().IsKeyword("FEATURES")) {
				duplicate(has_features, "FEATURES");
				Advance();
				ExpectOperator("(");
				do {
					stmt.features.push_back(ParseName("feature column"));
				} while (MatchOperator(","));
				ExpectOperator(")");
				has_features = true;
			} else if (Peek().IsKeyword("OUTPUT")) {
				duplicate(has_output, "OUTPUT");
				Advance();
				ExpectOperator("(");
				do {
					ColumnDefinition column;
					column.name = ParseName("output column");
					column.type = ParseType();
					stmt.outputs.push_back(std::move(column));
				} while (MatchOperator(","));
				ExpectOperator(")");
				has_output = true;
			} else if (Peek().IsKeyword("OPTIONS")) {
				duplicate(has_options, "OPTIONS");
				Advance();
				stmt.options = ParseOptionsBody();
				has_options = true;
			} else {
				ErrorExpected("PATH, ON PROMPT, ON TABLE, API, SECRET, FEATURES, OUTPUT or OPTIONS");
			}
		}
		if (!has_path) {
			Error("CREATE MODEL requires a PATH clause", start);
		}
		bool io_declared = has_features || has_output;
		if (stmt.type == ModelType::Tabular) {
			if (stmt.on_prompt) {
				Error("TABULAR models cannot be declared ON PROMPT", start);
			}
			if (!has_features || !has_output) {
				Error("TABULAR models require FEATURES and OUTPUT", start);
			}
		} else if (stmt.on_prompt && io_declared) {
			Error("ON PROMPT models take their inputs and outputs from the query prompt; remove FEATURES/OUTPUT",
			      start);
		} else if (stmt.type == ModelType::Llm && !io_declared) {
			// an LLM without declared features/outputs is prompt-driven
			stmt.on_prompt = true;
		} else if (has_features != has_output) {
			Error("FEATURES and OUTPUT must be declared together", start);
		}
		return stmt;
	}

	CreateTableStatement ParseCreateTable() {
		ExpectKeyword("CREATE");
		ExpectKeyword("TABLE");
		CreateTableStatement stmt;
		stmt.name = ParseName("table name");
		if (MatchKeyword("AS")) {
			stmt.query = Box<SelectStatement>(ParseSelect());
			return stmt;
		}
		ExpectOperator("(");
		do {
			if (MatchKeyword("PRIMARY")) {
				ExpectKeyword("KEY");
				SetPrimaryKey(stmt.primary_key, ParseParenthesizedName());
			} else if (Peek().IsKeyword("FOREIGN")) {
				stmt.foreign_keys.push_back(ParseForeignKey());
			} else {
				ColumnDefinition column;
				column.name = ParseName("column name");
				column.type = ParseType();
				if (MatchKeyword("PRIMARY")) {
					ExpectKeyword("KEY");
					SetPrimaryKey(stmt.primary_key, column.name);
				}
				stmt.columns.push_back(std::move(column));
			}
		} while (MatchOperator(","));
		ExpectOperator(")");
		return stmt;
	}

	void SetPrimaryKey(std::optional<std::string> &target, std::string column) {
		if (target) {
			Error("multiple primary keys declared", Peek().pos);
		}
		target = std::move(column);
	}

	std::string ParseParenthesizedName() {
		ExpectOperator("(");
		auto name = ParseName("column name");
		ExpectOperator(")");
		return name;
	}

	ForeignKeyDefinition ParseForeignKey() {
		ExpectKeyword("FOREIGN");
		ExpectKeyword("KEY");
		ForeignKeyDefinition key;
		key.column = ParseParenthesizedName();
		ExpectKeyword("REFERENCES");
		key.referenced_table = ParseName("referenced table");
		key.referenced_column = ParseParenthesizedName();
		return key;
	}

	InsertStatement ParseInsert() {
		ExpectKeyword("INSERT");
		ExpectKeyword("INTO");
		InsertStatement stmt;
		stmt.table = ParseName("table name");
		if (MatchOperator("(")) {
			do {
				stmt.columns.push_back(ParseName("column name"));
			} while (MatchOperator(","));
			ExpectOperator(")");
		}
		if (Peek().IsKeyword("SELECT")) {
			stmt.query = Box<SelectStatement>(ParseSelect());
			return stmt;
		}
		ExpectKeyword("VALUES");
		do {
			ExpectOperator("(");
			std::vector<ParsedExpression> row;
			do {
				row.push_back(ParseExpression());
			} while (MatchOperator(","));
			ExpectOperator(")");
			stmt.rows.push_back(std::move(row));
		} while (MatchOperator(","));
		return stmt;
	}

	AlterTableStatement ParseAlter() {
		ExpectKeyword("ALTER");
		ExpectKeyword("TABLE");
		AlterTableStatement stmt;
		stmt.table = ParseName("table name");
		ExpectKeyword("ADD");
		if (MatchKeyword("PRIMARY")) {
			ExpectKeyword("KEY");
			stmt.primary_key = ParseParenthesizedName();
		} else if (Peek().IsKeyword("FOREIGN")) {
			stmt.foreign_key = ParseForeignKey();
		} else {
			ErrorExpected("PRIMARY KEY or FOREIGN KEY");
		}
		return stmt;
	}

	SetStatement ParseSet() {
		ExpectKeyword("SET");
		SetStatement stmt;
		stmt.name = ParseName("setting name");
		if (!MatchOperator("=") && !MatchKeyword("TO")) {
			ErrorExpected("'=' or TO");
		}
		if (PeekIsName() && !Peek().IsKeyword("TRUE") && !Peek().IsKeyword("FALSE")) {
			stmt.value = OptionValue(std::string(Advance().text));
		} else {
			stmt.value = ParseOptionValue();
		}
		return stmt;
	}

	DropStatement ParseDrop() {
		ExpectKeyword("DROP");
		DropStatement stmt;
		if (MatchKeyword("MODEL")) {
			stmt.type = DropType::Model;
		} else if (MatchKeyword("TABLE")) {
			stmt.type = DropType::Table;
		} else {
			ErrorExpected("MODEL or TABLE");
		}
		if (Peek().IsKeyword("IF")) {
			Advance();
			ExpectKeyword("EXISTS");
			stmt.if_exists = true;
		}
		stmt.name = ParseName("name");
		return stmt;
	}

	ExplainStatement ParseExplain() {
		ExpectKeyword("EXPLAIN");
		ExplainType type = ExplainType::Logical;
		if (MatchKeyword("OPTIMIZED")) {
			type = ExplainType::Optimized;
		} else if (MatchKeyword("ANALYZE")) {
			type = ExplainType::Analyze;
		}
		return ExplainStatement {type, Box<SelectStatement>(ParseSelect())};
	}

	std::string_view text_;
	std::vector<Token> tokens_;
	size_t index_ = 0;
	bool allow_agg_ = false;
};

} // namespace

ParsedExpression ParsedExpression::Constant(Value value, SourcePosition pos) {
	ParsedExpression expression;
	expression.type = ExpressionType::Constant;
	expression.value = std::move(value);
	expression.pos = pos;
	return expression;
}

ParsedExpression ParsedExpression::Column(std::vector<std::string> name, SourcePosition pos) {
	ParsedExpression expression;
	expression.type = ExpressionType::Column;
	expression.column_name = std::move(name);
	expression.pos = pos;
	return expression;
}

ParsedExpression ParsedExpression::Binary(std::string op, ParsedExpression left, ParsedExpression right) {
	ParsedExpression expression;
	expression.type = ExpressionType::Binary;
	expression.op = std::move(op);
	expression.pos = left.pos;
	expression.children.push_back(std::move(left));
	expression.children.push_back(std::move(right));
	return expression;
}

bool ParsedExpression::operator==(const ParsedExpression &other) const {
	return type == other.type && value == other.value && column_name == other.column_name &&
	       quoted == other.quoted && op == other.op && negated == other.negated && distinct == other.distinct &&
	       star_argument == other.star_argument && cast_type == other.cast_type && children == other.children &&
	       semantic == other.semantic;
}

const char *ModelTypeName(ModelType type) {
	switch (type) {
	case ModelType::Llm:
		return "LLM";
	case ModelType::Tabular:
		return "TABULAR";
	case ModelType::Embed:
		return "EMBED";
	}
	return "LLM";
}

std::vector<ParsedStatement> ParseScript(std::string_view text) {
	return Parser(text).ParseScript();
}

Statement ParseStatement(std::string_view text) {
	return Parser(text).ParseSingle();
}

ParsedExpression ParseExpression(std::string_view text) {
	return Parser(text).ParseStandaloneExpression();
}

OptionMap ParseOptions(std::string_view text) {
	return Parser(text).ParseStandaloneOptions();
}

} // namespace semaquery
