#include "semaquery/sql/prompt_template.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <cctype>

namespace semaquery {

namespace {

bool IsNameChar(char c) {
	return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

bool IsName(std::string_view s) {
	if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) {
		return false;
	}
	for (char c : s) {
		if (!IsNameChar(c)) {
			return false;
		}
	}
	return true;
}

[[noreturn]] void Fail(const std::string &msg, size_t offset) {
	throw ParserException("invalid prompt: " + msg, SourcePosition {1, static_cast<uint32_t>(offset + 1)});
}

class PromptParser {
public:
	explicit PromptParser(std::string_view raw) : raw_(raw) {
	}

	PromptTemplate Run() {
		size_t pos = 0;
		while (pos < raw_.size()) {
			char c = raw_[pos];
			if (c == '\\' && pos + 1 < raw_.size() && (raw_[pos + 1] == '{' || raw_[pos + 1] == '}')) {
				literal_ += raw_[pos + 1];
				pos += 2;
			} else if (c == '{' && pos + 1 < raw_.size() && raw_[pos + 1] == '{') {
				auto close = raw_.find("}}", pos + 2);
				if (close == std::string_view::npos) {
					Fail("unbalanced '{{'", pos);
				}
				auto body = raw_.substr(pos + 2, close - pos - 2);
				if (body.find_first_of("{}") != std::string_view::npos) {
					Fail("nested braces in input placeholder", pos);
				}
				AddInput(string_util::Trim(body), pos);
				pos = close + 2;
			} else if (c == '{') {
				auto close = raw_.find('}', pos + 1);
				if (close == std::string_view::npos) {
					Fail("unbalanced '{'", pos);
				}
				auto body = raw_.substr(pos + 1, close - pos - 1);
				if (body.find('{') != std::string_view::npos) {
					Fail("nested '{' in output placeholder", pos);
				}
				ParseSingleBrace(string_util::Trim(body), pos);
				pos = close + 1;
			} else if (c == '}') {
				Fail("unbalanced '}'", pos);
			} else {
				literal_ += c;
				pos++;
			}
		}
		FlushLiteral();
		return PromptTemplate::FromParts(std::string(raw_), std::move(segments_), std::move(inputs_),
		                                 std::move(outputs_));
	}

private:
	void FlushLiteral() {
		if (!literal_.empty()) {
			segments_.push_back(PromptSegment {PromptSegmentKind::Literal, std::move(literal_), 0});
			literal_.clear();
		}
	}

	void AddInput(std::string_view body, size_t offset) {
		PromptInput input;
		auto dot = body.find('.');
		if (dot == std::string_view::npos) {
			input.column = std::string(body);
		} else {
			input.qualifier = std::string(string_util::Trim(body.substr(0, dot)));
			input.column = std::string(string_util::Trim(body.substr(dot + 1)));
			if (!IsName(input.qualifier)) {
				Fail("malformed input placeholder '" + std::string(body) + "'", offset);
			}
		}
		if (!IsName(input.column)) {
			Fail("malformed input placeholder '" + std::string(body) + "'", offset);
		}
		FlushLiteral();
		size_t index = inputs_.size();
		for (size_t i = 0; i < inputs_.size(); i++) {
			if (string_util::EqualsIgnoreCase(inputs_[i].Key(), input.Key())) {
				index = i;
			}
		}
		if (index == inputs_.size()) {
			inputs_.push_back(std::move(input));
		}
		segments_.push_back(PromptSegment {PromptSegmentKind::Input, "", index});
	}

	void ParseSingleBrace(std::string_view body, size_t offset) {
		auto space = body.find_first_of(" \t\r\n");
		if (space == std::string_view::npos) {
			// untyped `{col}` is read as a column reference
			AddInput(body, offset);
			return;
		}
		auto name = body.substr(0, space);
		auto type_name = string_util::Trim(body.substr(space));
		if (!IsName(name)) {
			Fail("malformed output placeholder '{" + std::string(body) + "}'", offset);
		}
		auto type = TypeFromName(type_name);
		if (!type || !IsAllowedOutputType(string_util::Upper(type_name))) {
			Fail("unknown output type '" + std::string(type_name) + "' for '" + std::string(name) + "'", offset);
		}
		for (auto &existing : outputs_) {
			if (string_util::EqualsIgnoreCase(existing.name, name)) {
				Fail("duplicate output name '" + std::string(name) + "'", offset);
			}
		}
		FlushLiteral();
		segments_.push_back(PromptSegment {PromptSegmentKind::Output, "", outputs_.size()});
		outputs_.push_back(PromptOutput {std::string(name), *type});
	}

	static bool IsAllowedOutputType(const std::string &upper) {
		return upper == "VARCHAR" || upper == "INTEGER" || upper == "DOUBLE" || upper == "DATETIME" ||
		       upper == "BOOLEAN" || upper == "BOOL";
	}

	std::string_view raw_;
	std::string literal_;
	std::vector<PromptSegment> segments_;
	std::vector<PromptInput> inputs_;
	std::vector<PromptOutput> outputs_;
};

} // namespace

PromptTemplate PromptTemplate::Parse(std::string_view raw) {
	return PromptParser(raw).Run();
}

PromptTemplate PromptTemplate::FromParts(std::string raw, std::vector<PromptSegment> segments,
                                         std::vector<PromptInput> inputs, std::vector<PromptOutput> outputs) {
	PromptTemplate result;
	result.raw_ = std::move(raw);
	result.segments_ = std::move(segments);
	result.inputs_ = std::move(inputs);
	result.outputs_ = std::move(outputs);
	return result;
}

void PromptTemplate::RequireOutputs() const {
	if (outputs_.empty()) {
		throw ParserException("prompt declares no output placeholder such as {name VARCHAR}", SourcePosition {});
	}
}

std::string PromptTemplate::Render(const std::function<std::string(size_t)> &input_text,
                                   const std::function<std::string(size_t)> &output_text) const {
	std::string result;
	for (auto &segment : segments_) {
		switch (segment.kind) {
		case PromptSegmentKind::Literal:
			result += segment.text;
			break;
		case PromptSegmentKind::Input:
			result += input_text(segment.index);
			break;
		case PromptSegmentKind::Output:
			result += output_text(segment.index);
			break;
		}
	}
	return result;
}

std::string PromptTemplate::Instruction() const {
	return Render([&](size_t i) { return inputs_[i].Key(); }, [&](size_t i) { return outputs_[i].name; });
}

uint64_t PromptTemplate::Hash() const {
	return string_util::Fnv1a(raw_);
}

} // namespace semaquery
