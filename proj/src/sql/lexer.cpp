#include "semaquery/common/string_util.hpp"
#include "semaquery/sql/token.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace semaquery {

namespace {

constexpr std::array kKeywords = {
    "ADD",      "AGG",     "ALTER",   "ANALYZE",  "AND",     "API",      "AS",      "ASC",     "BY",
    "CREATE",   "CROSS",   "DESC",    "DROP",     "EMBED",   "EXPLAIN",  "FALSE",   "FEATURES", "FOREIGN",
    "FROM",     "GROUP",   "HAVING",  "INNER",    "INSERT",  "INTO",     "IS",      "JOIN",    "KEY",
    "LIKE",     "LIMIT",   "LLM",     "MODEL",    "NATURAL", "NOT",      "NULL",    "ON",      "OPTIMIZED",
    "OPTIONS",  "OR",      "ORDER",   "OUTPUT",   "PATH",    "PREDICT",  "PRIMARY", "PROMPT",  "REFERENCES",
    "SECRET",   "SELECT",  "SET",     "TABLE",    "TABULAR", "TRUE",     "VALUES",  "WHERE",    "CAST",
    "DISTINCT", "EXISTS",  "IF",      "TO",
};

constexpr std::array kReserved = {
    "AND",   "AS",    "BY",     "CREATE", "CROSS", "FALSE",   "FROM",   "GROUP",   "HAVING", "INNER",
    "IS",    "JOIN",  "LIKE",   "LIMIT",  "LLM",   "NATURAL", "NOT",    "NULL",    "ON",     "OR",
    "ORDER", "PREDICT", "SELECT", "TRUE", "WHERE",
};

bool IsIdentStart(char c) {
	return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

bool IsIdentChar(char c) {
	return IsIdentStart(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '$';
}

class Lexer {
public:
	explicit Lexer(std::string_view text) : text_(text) {
	}

	std::vector<Token> Run() {
		std::vector<Token> tokens;
		while (true) {
			SkipWhitespaceAndComments();
			if (pos_ >= text_.size()) {
				tokens.push_back(Token {TokenType::End, "", Position(), pos_, 0});
				return tokens;
			}
			auto begin = pos_;
			auto token = NextToken();
			token.offset = begin;
			token.length = pos_ - begin;
			tokens.push_back(std::move(token));
		}
	}

private:
	SourcePosition Position() const {
		return SourcePosition {line_, column_};
	}

	char Peek(size_t offset = 0) const {
		return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0';
	}

	void Advance() {
		if (text_[pos_] == '\n') {
			line_++;
			column_ = 1;
		} else if ((static_cast<unsigned char>(text_[pos_]) & 0xC0) != 0x80) {
			// count code points, not continuation bytes
			column_++;
		}
		pos_++;
	}

	void SkipWhitespaceAndComments() {
		while (pos_ < text_.size()) {
			char c = Peek();
			if (std::isspace(static_cast<unsigned char>(c))) {
				Advance();
			} else if (c == '-' && Peek(1) == '-') {
				while (pos_ < text_.size() && Peek() != '\n') {
					Advance();
				}
			} else if (c == '/' && Peek(1) == '*') {
				auto start = Position();
				Advance();
				Advance();
				bool closed = false;
				while (pos_ < text_.size()) {
					if (Peek() == '*' && Peek(1) == '/') {
						Advance();
						Advance();
						closed = true;
						break;
					}
					Advance();
				}
				if (!closed) {
					throw ParserException("unterminated block comment", start);
				}
			} else {
				return;
			}
		}
	}

	Token NextToken() {
		auto start = Position();
		char c = Peek();
		if (c == '\'') {
			return Token {TokenType::String, ReadQuoted('\'', "string literal", start), start};
		}
		if (c == '"') {
			return Token {TokenType::QuotedIdentifier, ReadQuoted('"', "quoted identifier", start), start};
		}
		if (std::isdigit(static_cast<unsigned char>(c)) ||
		    (c == '.' && std::isdigit(static_cast<unsigned char>(Peek(1))))) {
			return ReadNumber(start);
		}
		if (IsIdentStart(c)) {
			size_t begin = pos_;
			while (pos_ < text_.size() && IsIdentChar(Peek())) {
				Advance();
			}
			std::string word(text_.substr(begin, pos_ - begin));
			auto upper = string_util::Upper(word);
			if (IsKeyword(upper)) {
				return Token {TokenType::Keyword, word, start};
			}
			return Token {TokenType::Identifier, word, start};
		}
		static constexpr std::array<std::string_view, 6> kTwoChar {"<>", "!=", "<=", ">=", "||", "=="};
		for (auto op : kTwoChar) {
			if (c == op[0] && Peek(1) == op[1]) {
				Advance();
				Advance();
				return Token {TokenType::Operator, op == "==" ? "=" : std::string(op), start};
			}
		}
		static constexpr std::string_view kSingle = "(),;.*=<>+-/%{}:[]";
		if (kSingle.find(c) != std::string_view::npos) {
			Advance();
			return Token {TokenType::Operator, std::string(1, c), start};
		}
		throw ParserException(std::string("unexpected character '") + c + "'", start);
	}

	std::string ReadQuoted(char quote, const char *what, SourcePosition start) {
		Advance();
		std::string value;
		while (pos_ < text_.size()) {
			char c = Peek();
			if (c == quote) {
				if (Peek(1) == quote) {
					value += quote;
					Advance();
					Advance();
					continue;
				}
				Advance();
				return value;
			}
			value += c;
			Advance();
		}
		throw ParserException(std::string("unterminated ") + what, start);
	}

	Token ReadNumber(SourcePosition start) {
		size_t begin = pos_;
		bool is_float = false;
		while (std::isdigit(static_cast<unsigned char>(Peek()))) {
			Advance();
		}
		if (Peek() == '.' && std::isdigit(static_cast<unsigned char>(Peek(1)))) {
			is_float = true;
			Advance();
			while (std::isdigit(static_cast<unsigned char>(Peek()))) {
				Advance();
			}
		} else if (Peek() == '.' && !IsIdentStart(Peek(1))) {
			is_float = true;
			Advance();
		}
		if ((Peek() == 'e' || Peek() == 'E') &&
		    (std::isdigit(static_cast<unsigned char>(Peek(1))) ||
		     ((Peek(1) == '+' || Peek(1) == '-') && std::isdigit(static_cast<unsigned char>(Peek(2)))))) {
			is_float = true;
			Advance();
			Advance();
			while (std::isdigit(static_cast<unsigned char>(Peek()))) {
				Advance();
			}
		}
		if (IsIdentStart(Peek())) {
			throw ParserException("malformed number literal", start);
		}
		return Token {is_float ? TokenType::Float : TokenType::Integer, std::string(text_.substr(begin, pos_ - begin)),
		              start};
	}

	std::string_view text_;
	size_t pos_ = 0;
	uint32_t line_ = 1;
	uint32_t column_ = 1;
};

} // namespace

const char *TokenTypeName(TokenType type) {
	switch (type) {
	case TokenType::Identifier:
		return "identifier";
	case TokenType::QuotedIdentifier:
		return "quoted identifier";
	case TokenType::Keyword:
		return "keyword";
	case TokenType::String:
		return "string";
	case TokenType::Integer:
		return "integer";
	case TokenType::Float:
		return "number";
	case TokenType::Operator:
		return "operator";
	case TokenType::End:
		return "end of input";
	}
	return "token";
}

bool Token::KeywordEquals(std::string_view upper) const {
	return string_util::EqualsIgnoreCase(text, upper);
}

bool IsKeyword(std::string_view upper_word) {
	return std::find(kKeywords.begin(), kKeywords.end(), upper_word) != kKeywords.end();
}

bool IsReservedKeyword(std::string_view upper_word) {
	return std::find(kReserved.begin(), kReserved.end(), upper_word) != kReserved.end();
}

std::vector<Token> Tokenize(std::string_view text) {
	return Lexer(text).Run();
}

} // namespace semaquery
