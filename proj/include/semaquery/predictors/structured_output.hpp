#pragma once

#include "semaquery/sql/prompt_template.hpp"

#include "json.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace semaquery {

//! JSON schema of one output record: every output is a required property, no extra properties.
//! VARCHAR -> string, INTEGER -> integer, DOUBLE -> number, DATETIME -> string/date-time, BOOLEAN -> boolean.
//! With `with_row_id` an integer row_id property comes first.
nlohmann::ordered_json BuildJsonSchema(const std::vector<PromptOutput> &outputs, bool with_row_id = false);

//! The structured-output request parameter: an object wrapping a `predictions` array of records.
nlohmann::ordered_json BuildResponseFormat(const std::vector<PromptOutput> &outputs);

//! BNF grammar (GBNF dialect) generating exactly the JSON arrays of {"row_id": int, <outputs in order>} objects
//! with typed values (null allowed). The start symbol is `root`.
std::string BuildBnfGrammar(const std::vector<PromptOutput> &outputs);

//! Reference recognizer for the GBNF subset produced above: `name ::= alternatives`, quoted literals with
//! backslash escapes, character classes with ranges and negation, parentheses, and the postfix operators
//! ? * + {n} {n,m}. Left recursion is not supported.
class GrammarChecker {
public:
	//! Throws ParserException on malformed grammar text or undefined rules.
	explicit GrammarChecker(std::string_view grammar);
	~GrammarChecker();

	//! True when `start` derives exactly `text`.
	bool Accepts(std::string_view text, const std::string &start = "root") const;

	struct Node;

private:
	std::vector<std::string> names_;
	std::vector<std::unique_ptr<Node>> rules_;
};

} // namespace semaquery
