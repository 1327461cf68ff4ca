#pragma once

#include "semaquery/common/exception.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace semaquery {

enum class TokenType : uint8_t {
	Identifier,       //!< bare word that is not a keyword
	QuotedIdentifier, //!< "double quoted" identifier
	Keyword,          //!< bare word found in the keyword table (text keeps the source spelling)
	String,           //!< 'single quoted' literal, quotes removed and '' unescaped; braces kept verbatim
	Integer,
	Float,
	Operator, //!< punctuation and operators: ( ) , ; . * = <> != < <= > >= + - / % || { } :
	End
};

struct Token {
	TokenType type = TokenType::End;
	std::string text;
	SourcePosition pos;
	//! Byte range in the source text.
	size_t offset = 0;
	size_t length = 0;

	bool IsKeyword(std::string_view keyword) const {
		return type == TokenType::Keyword && KeywordEquals(keyword);
	}
	bool IsOperator(std::string_view op) const {
		return type == TokenType::Operator && text == op;
	}
	//! Bare words and keywords can both serve as names in unambiguous positions.
	bool IsWord() const {
		return type == TokenType::Identifier || type == TokenType::Keyword;
	}
	bool operator==(const Token &) const = default;

private:
	bool KeywordEquals(std::string_view upper) const;
};

const char *TokenTypeName(TokenType type);

//! True when the upper-cased word is in the dialect keyword table.
bool IsKeyword(std::string_view upper_word);
//! Keywords that may never be used as an implicit alias or unquoted column name.
bool IsReservedKeyword(std::string_view upper_word);

//! Splits SQL text into tokens; the last token is always End.
//! Throws ParserException with line:column for unterminated strings, quoted identifiers and block comments.
std::vector<Token> Tokenize(std::string_view text);

} // namespace semaquery
