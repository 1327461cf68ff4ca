#pragma once

#include "semaquery/sql/ast.hpp"

#include <string_view>
#include <vector>

namespace semaquery {

//! Parses a `;`-separated script. Empty statements are skipped.
//! Throws ParserException with line and column and an expected-token diagnostic.
std::vector<ParsedStatement> ParseScript(std::string_view text);
//! Parses exactly one statement (a trailing `;` is allowed).
Statement ParseStatement(std::string_view text);
//! Parses a standalone expression; used by tests and the REPL.
ParsedExpression ParseExpression(std::string_view text);

//! Canonical SQL text. Reparsing the output yields an equal AST.
std::string ToSQL(const Statement &statement);
std::string ToSQL(const SelectStatement &statement);
std::string ToSQL(const ParsedExpression &expression);
std::string ToSQL(const TableRef &ref);
//! Quotes an identifier when it is not a plain non-reserved word.
std::string QuoteIdentifier(const std::string &name);
//! 'text' with '' escaping.
std::string QuoteString(const std::string &text);

} // namespace semaquery
