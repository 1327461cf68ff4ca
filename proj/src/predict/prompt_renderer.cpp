#include "semaquery/predict/prompt_renderer.hpp"

#include "semaquery/common/string_util.hpp"

namespace semaquery {

const char *PromptTypeName(LogicalType type) {
	switch (type) {
	case LogicalType::Boolean:
		return "boolean";
	case LogicalType::Integer:
		return "integer";
	case LogicalType::Double:
		return "number";
	case LogicalType::Datetime:
		return "string (ISO-8601 date-time)";
	default:
		return "string";
	}
}

ordered_json ValueToJson(const Value &value) {
	switch (value.Type()) {
	case LogicalType::Null:
		return nullptr;
	case LogicalType::Boolean:
		return value.GetBoolean();
	case LogicalType::Integer:
		return value.GetInteger();
	case LogicalType::Double:
		return value.GetDouble();
	case LogicalType::Varchar:
		return value.GetString();
	case LogicalType::Datetime:
		return FormatDatetime(value.GetDatetime());
	}
	return nullptr;
}

PromptRenderer::PromptRenderer(const PredictInfo &info) : info_(info) {
	instruction_ = std::string(string_util::Trim(info.prompt.Instruction()));
	for (auto &output : info.outputs) {
		outputs_.push_back(PromptOutput {output.name, output.type});
	}
}

std::string PromptRenderer::SchemaLines(bool with_row_id) const {
	std::string result;
	if (with_row_id) {
		result += "  row_id: integer (copied from the input row)\n";
	}
	for (auto &output : outputs_) {
		result += "  " + output.name + ": " + PromptTypeName(output.type) + "\n";
	}
	return result;
}

void PromptRenderer::Render(PredictRequest &request, const ordered_json &tuples, bool strict) const {
	auto count = std::to_string(tuples.size());
	std::string system = "You fill in structured fields for database rows.\n"
	                     "For every input row return one JSON object with exactly these fields:\n" +
	                     SchemaLines(true);
	system += "Answer with a parsable JSON array of these objects and nothing else.";
	if (strict) {
		system += "\nYour previous answer could not be parsed. Reply with the JSON array only: the first character "
		          "must be '[' and the last must be ']'. No markdown, no code fences, no commentary.\n"
		          "Required fields again:\n" +
		          SchemaLines(true);
	}
	std::string user;
	if (!instruction_.empty()) {
		user += instruction_ + "\n";
	}
	user += "Process the following " + count + " row(s) and return exactly " + count + " JSON object(s):\n";
	user += tuples.dump();
	request.mode = info_.mode;
	request.info = &info_;
	request.system = std::move(system);
	request.user = std::move(user);
	request.tuples = tuples;
	request.strict = strict;
}

void PromptRenderer::RenderGeneration(PredictRequest &request, bool strict) const {
	std::string system = "You produce database rows from your own knowledge.\n"
	                     "Every row is a JSON object with exactly these fields:\n" +
	                     SchemaLines(false);
	system += "Answer with a parsable JSON array of these objects and nothing else. Use [] when no rows apply.";
	if (strict) {
		system += "\nYour previous answer could not be parsed. Reply with the JSON array only: the first character "
		          "must be '[' and the last must be ']'. No markdown, no code fences, no commentary.\n"
		          "Required fields again:\n" +
		          SchemaLines(false);
	}
	request.mode = PredictMode::TableGeneration;
	request.info = &info_;
	request.system = std::move(system);
	request.user = instruction_ + "\nReturn all matching rows as a JSON array.";
	request.tuples = ordered_json::array();
	request.strict = strict;
}

ordered_json PromptRenderer::Tuple(size_t row_id, const Row &inputs) const {
	ordered_json tuple = ordered_json::object();
	tuple["row_id"] = row_id;
	for (size_t i = 0; i < info_.inputs.size(); i++) {
		tuple[info_.inputs[i].key] = ValueToJson(inputs[i]);
	}
	return tuple;
}

ordered_json PromptRenderer::GroupTuple(size_t row_id, const std::vector<Row> &members) const {
	ordered_json tuple = ordered_json::object();
	tuple["row_id"] = row_id;
	for (size_t i = 0; i < info_.inputs.size(); i++) {
		auto values = ordered_json::array();
		for (auto &member : members) {
			values.push_back(ValueToJson(member[i]));
		}
		tuple[info_.inputs[i].key] = std::move(values);
	}
	return tuple;
}

} // namespace semaquery
