#pragma once

#include "semaquery/predictors/predictor.hpp"

#include <string>
#include <vector>

namespace semaquery {

//! Schema type names used in prompt preambles ("string", "integer", "number", "boolean", ...).
const char *PromptTypeName(LogicalType type);

//! Builds the system and user messages for a predict call. Output is a pure function of its inputs.
//!
//! The system message states the output schema and asks for a JSON array only. The user message holds the
//! instruction (placeholders replaced by their names), the number of tuples, and the tuples as a compact JSON
//! array of objects with a 0-based row_id followed by the input keys in prompt order.
class PromptRenderer {
public:
	explicit PromptRenderer(const PredictInfo &info);

	//! `tuples` must already carry row_id members. A single row still renders as a one-element array.
	void Render(PredictRequest &request, const ordered_json &tuples, bool strict) const;
	//! Table generation: no tuples, no row_id, any number of records.
	void RenderGeneration(PredictRequest &request, bool strict) const;

	//! Marshals one row of typed inputs (in PredictInfo::inputs order).
	ordered_json Tuple(size_t row_id, const Row &inputs) const;
	//! Marshals one group: each input key maps to the array of its member values.
	ordered_json GroupTuple(size_t row_id, const std::vector<Row> &members) const;

	const std::vector<PromptOutput> &Outputs() const {
		return outputs_;
	}

private:
	std::string SchemaLines(bool with_row_id) const;

	const PredictInfo &info_;
	std::string instruction_;
	std::vector<PromptOutput> outputs_;
};

} // namespace semaquery
