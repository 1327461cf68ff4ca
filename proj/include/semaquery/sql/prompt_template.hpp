#pragma once

#include "semaquery/common/value.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace semaquery {

//! A `{{column}}` or `{{alias.column}}` placeholder.
struct PromptInput {
	std::string qualifier;
	std::string column;

	//! The placeholder text as written, used as the JSON key when tuples are marshaled.
	std::string Key() const {
		return qualifier.empty() ? column : qualifier + "." + column;
	}
	bool operator==(const PromptInput &) const = default;
};

//! A `{name TYPE}` placeholder.
struct PromptOutput {
	std::string name;
	LogicalType type = LogicalType::Varchar;
	bool operator==(const PromptOutput &) const = default;
};

enum class PromptSegmentKind : uint8_t { Literal, Input, Output };

struct PromptSegment {
	PromptSegmentKind kind = PromptSegmentKind::Literal;
	//! Literal text, or unused for placeholders.
	std::string text;
	//! Index into inputs/outputs for placeholder segments.
	size_t index = 0;
	bool operator==(const PromptSegment &) const = default;
};

//! Parsed prompt ⟨instruction, In, Out⟩.
//!
//! Grammar of the raw text:
//!   {{col}} / {{alias.col}}  input placeholder
//!   {name TYPE}              output placeholder, TYPE in VARCHAR, INTEGER, DOUBLE, DATETIME, BOOLEAN (BOOL)
//!   {col}                    untyped single-brace reference, treated as an input placeholder
//!   \{ and \}                literal braces
class PromptTemplate {
public:
	PromptTemplate() = default;

	//! Throws ParserException (line 1, column = 1-based offset into the prompt) on malformed placeholders,
	//! unknown output types, unbalanced braces and duplicate output names.
	static PromptTemplate Parse(std::string_view raw);
	//! Builds a template from already-parsed parts (used when merging prompts).
	static PromptTemplate FromParts(std::string raw, std::vector<PromptSegment> segments,
	                                std::vector<PromptInput> inputs, std::vector<PromptOutput> outputs);

	const std::string &Raw() const {
		return raw_;
	}
	const std::vector<PromptSegment> &Segments() const {
		return segments_;
	}
	const std::vector<PromptInput> &Inputs() const {
		return inputs_;
	}
	const std::vector<PromptOutput> &Outputs() const {
		return outputs_;
	}

	//! Throws ParserException when the template declares no outputs.
	void RequireOutputs() const;

	//! Literal segments interleaved with caller-provided placeholder text.
	std::string Render(const std::function<std::string(size_t)> &input_text,
	                   const std::function<std::string(size_t)> &output_text) const;
	//! Instruction text with placeholders replaced by their names ("what is the language of the movie title").
	std::string Instruction() const;
	//! Stable hash of the raw text; part of dedup cache keys.
	uint64_t Hash() const;

	bool operator==(const PromptTemplate &other) const {
		return raw_ == other.raw_ && segments_ == other.segments_ && inputs_ == other.inputs_ &&
		       outputs_ == other.outputs_;
	}

private:
	std::string raw_;
	std::vector<PromptSegment> segments_;
	std::vector<PromptInput> inputs_;
	std::vector<PromptOutput> outputs_;
};

} // namespace semaquery
