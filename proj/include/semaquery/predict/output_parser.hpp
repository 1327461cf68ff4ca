#pragma once

#include "semaquery/core/data_chunk.hpp"
#include "semaquery/sql/prompt_template.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semaquery {

struct ParsedRecord {
	//! One value per expected output, in declaration order.
	Row values;
	//! A field was missing or could not be coerced to its declared type.
	bool flagged = false;
};

//! Finds the JSON payload in raw model text: code fences and surrounding prose are stripped. Returns the list of
//! records, accepting a bare array, an object holding an array member (e.g. {"predictions": [...]}) or a single
//! record object. Throws MalformedOutputException when no JSON payload can be recovered.
nlohmann::json ExtractJsonRecords(std::string_view raw);

//! Typed extraction of one field. Returns nullopt when the JSON value cannot represent the type:
//!  VARCHAR  strings verbatim, other scalars by their JSON text
//!  INTEGER  integer literals, integral decimals, strings of digits with optional sign
//!  DOUBLE   numeric literals and numeric strings
//!  DATETIME ISO-8601 or RFC-2822 strings
//!  BOOLEAN  true/false, and the strings true/false/yes/no in any case
//! JSON null always yields a NULL value.
std::optional<Value> CoerceJsonValue(const nlohmann::json &value, LogicalType type);

//! Parses marshaled output for `expected_rows` tuples. Records are matched by row_id when every record has a
//! distinct in-range row_id, otherwise by position. Unknown keys are ignored; missing keys yield NULL and flag
//! the record. Throws MalformedOutputException or RowCountMismatchException.
std::vector<ParsedRecord> ParseStructuredOutput(std::string_view raw, const std::vector<PromptOutput> &outputs,
                                                size_t expected_rows);

//! Parses table-generation output: any number of records, no row_id correlation.
std::vector<ParsedRecord> ParseGeneratedRows(std::string_view raw, const std::vector<PromptOutput> &outputs);

} // namespace semaquery
