#include "semaquery/predict/output_parser.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <cmath>
#include <set>

namespace semaquery {

using nlohmann::json;

namespace {

std::optional<json> TryParse(std::string_view text) {
	auto parsed = json::parse(text.begin(), text.end(), nullptr, false);
	if (parsed.is_discarded()) {
		return std::nullopt;
	}
	return parsed;
}

//! Content of the first fenced block (```lang ... ```), if any.
std::optional<std::string_view> FencedBlock(std::string_view raw) {
	auto open = raw.find("```");
	if (open == std::string_view::npos) {
		return std::nullopt;
	}
	auto body_start = raw.find('\n', open);
	if (body_start == std::string_view::npos) {
		return std::nullopt;
	}
	body_start++;
	auto close = raw.find("```", body_start);
	if (close == std::string_view::npos) {
		close = raw.size();
	}
	return raw.substr(body_start, close - body_start);
}

//! Outermost bracketed span starting at the first `open` and ending at the last `close`.
std::optional<json> BracketedSpan(std::string_view text, char open, char close) {
	auto begin = text.find(open);
	auto end = text.rfind(close);
	if (begin == std::string_view::npos || end == std::string_view::npos || end < begin) {
		return std::nullopt;
	}
	return TryParse(text.substr(begin, end - begin + 1));
}

std::optional<json> FindPayload(std::string_view text) {
	text = string_util::Trim(text);
	if (auto parsed = TryParse(text)) {
		if (parsed->is_array() || parsed->is_object()) {
			return parsed;
		}
	}
	// Prefer whichever bracket opens first so prose around a single object still parses.
	auto array_pos = text.find('[');
	auto object_pos = text.find('{');
	if (array_pos != std::string_view::npos && (object_pos == std::string_view::npos || array_pos < object_pos)) {
		if (auto parsed = BracketedSpan(text, '[', ']')) {
			return parsed;
		}
		return BracketedSpan(text, '{', '}');
	}
	if (auto parsed = BracketedSpan(text, '{', '}')) {
		return parsed;
	}
	return BracketedSpan(text, '[', ']');
}

bool IsRecordArray(const json &value) {
	if (!value.is_array()) {
		return false;
	}
	for (auto &item : value) {
		if (!item.is_object()) {
			return false;
		}
	}
	return true;
}

std::string Preview(std::string_view raw) {
	constexpr size_t kMax = 80;
	std::string text(raw.substr(0, kMax));
	for (auto &c : text) {
		if (c == '\n' || c == '\r') {
			c = ' ';
		}
	}
	return raw.size() > kMax ? text + "..." : text;
}

std::optional<int64_t> RowId(const json &record) {
	auto it = record.find("row_id");
	if (it == record.end()) {
		return std::nullopt;
	}
	if (it->is_number_integer()) {
		return it->get<int64_t>();
	}
	if (it->is_string()) {
		return string_util::ParseInteger(string_util::Trim(it->get_ref<const std::string &>()));
	}
	return std::nullopt;
}

const json *FindField(const json &record, const std::string &name) {
	auto it = record.find(name);
	if (it != record.end()) {
		return &*it;
	}
	for (auto &[key, value] : record.items()) {
		if (string_util::EqualsIgnoreCase(key, name)) {
			return &value;
		}
	}
	return nullptr;
}

ParsedRecord ExtractRecord(const json &record, const std::vector<PromptOutput> &outputs) {
	ParsedRecord result;
	result.values.reserve(outputs.size());
	for (auto &output : outputs) {
		auto field = FindField(record, output.name);
		if (!field) {
			result.values.push_back(Value::Null());
			result.flagged = true;
			continue;
		}
		auto value = CoerceJsonValue(*field, output.type);
		if (!value) {
			result.values.push_back(Value::Null());
			result.flagged = true;
			continue;
		}
		result.values.push_back(std::move(*value));
	}
	return result;
}

} // namespace

json ExtractJsonRecords(std::string_view raw) {
	std::optional<json> payload;
	if (auto fenced = FencedBlock(raw)) {
		payload = FindPayload(*fenced);
	}
	if (!payload) {
		payload = FindPayload(raw);
	}
	if (!payload) {
		throw MalformedOutputException("model output is not JSON: \"" + Preview(raw) + "\"");
	}
	if (payload->is_array()) {
		if (!IsRecordArray(*payload)) {
			throw MalformedOutputException("model output array must contain only objects: \"" + Preview(raw) + "\"");
		}
		return *payload;
	}
	for (auto &[key, value] : payload->items()) {
		if (value.is_array() && IsRecordArray(value)) {
			return value;
		}
	}
	return json::array({*payload});
}

std::optional<Value> CoerceJsonValue(const json &value, LogicalType type) {
	if (value.is_null()) {
		return Value::Null();
	}
	switch (type) {
	case LogicalType::Varchar:
		if (value.is_string()) {
			return Value::Varchar(value.get<std::string>());
		}
		return Value::Varchar(value.dump());
	case LogicalType::Integer:
		if (value.is_number_integer()) {
			if (value.is_number_unsigned() && value.get<uint64_t>() > static_cast<uint64_t>(INT64_MAX)) {
				return std::nullopt;
			}
			return Value::Integer(value.get<int64_t>());
		}
		if (value.is_number_float()) {
			auto d = value.get<double>();
			if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9.2e18) {
				return Value::Integer(static_cast<int64_t>(d));
			}
			return std::nullopt;
		}
		if (value.is_string()) {
			if (auto parsed = string_util::ParseInteger(string_util::Trim(value.get_ref<const std::string &>()))) {
				return Value::Integer(*parsed);
			}
		}
		return std::nullopt;
	case LogicalType::Double:
		if (value.is_number()) {
			return Value::Double(value.get<double>());
		}
		if (value.is_string()) {
			if (auto parsed = string_util::ParseDouble(string_util::Trim(value.get_ref<const std::string &>()))) {
				return Value::Double(*parsed);
			}
		}
		return std::nullopt;
	case LogicalType::Datetime:
		if (value.is_string()) {
			auto text = string_util::Trim(value.get_ref<const std::string &>());
			if (auto parsed = ParseIsoDatetime(text)) {
				return Value::Timestamp(*parsed);
			}
			if (auto parsed = ParseRfc2822Datetime(text)) {
				return Value::Timestamp(*parsed);
			}
		}
		return std::nullopt;
	case LogicalType::Boolean:
		if (value.is_boolean()) {
			return Value::Boolean(value.get<bool>());
		}
		if (value.is_string()) {
			auto text = string_util::Lower(string_util::Trim(value.get_ref<const std::string &>()));
			if (text == "true" || text == "yes") {
				return Value::Boolean(true);
			}
			if (text == "false" || text == "no") {
				return Value::Boolean(false);
			}
		}
		return std::nullopt;
	case LogicalType::Null:
		return Value::Null();
	}
	return std::nullopt;
}

std::vector<ParsedRecord> ParseStructuredOutput(std::string_view raw, const std::vector<PromptOutput> &outputs,
                                                size_t expected_rows) {
	auto records = ExtractJsonRecords(raw);
	if (records.size() != expected_rows) {
		throw RowCountMismatchException(expected_rows, records.size());
	}
	std::vector<const json *> ordered(expected_rows, nullptr);
	bool by_id = true;
	for (auto &record : records) {
		auto id = RowId(record);
		if (!id || *id < 0 || static_cast<size_t>(*id) >= expected_rows || ordered[*id]) {
			by_id = false;
			break;
		}
		ordered[*id] = &record;
	}
	if (!by_id) {
		for (size_t i = 0; i < expected_rows; i++) {
			ordered[i] = &records[i];
		}
	}
	std::vector<ParsedRecord> result;
	result.reserve(expected_rows);
	for (auto record : ordered) {
		result.push_back(ExtractRecord(*record, outputs));
	}
	return result;
}

std::vector<ParsedRecord> ParseGeneratedRows(std::string_view raw, const std::vector<PromptOutput> &outputs) {
	auto text = string_util::Trim(raw);
	// An empty object or array is a valid "no rows" answer.
	if (auto parsed = TryParse(text); parsed && parsed->empty() && (parsed->is_array() || parsed->is_object())) {
		return {};
	}
	auto records = ExtractJsonRecords(raw);
	std::vector<ParsedRecord> result;
	result.reserve(records.size());
	for (auto &record : records) {
		result.push_back(ExtractRecord(record, outputs));
	}
	return result;
}

} // namespace semaquery
