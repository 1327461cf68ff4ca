#include "semaquery/predictors/structured_output.hpp"

#include "semaquery/common/exception.hpp"

#include <cctype>
#include <climits>
#include <map>
#include <set>

namespace semaquery {

using nlohmann::ordered_json;

namespace {

ordered_json TypeSchema(LogicalType type) {
	switch (type) {
	case LogicalType::Integer:
		return {{"type", "integer"}};
	case LogicalType::Double:
		return {{"type", "number"}};
	case LogicalType::Boolean:
		return {{"type", "boolean"}};
	case LogicalType::Datetime:
		return {{"type", "string"}, {"format", "date-time"}};
	default:
		return {{"type", "string"}};
	}
}

const char *GrammarRule(LogicalType type) {
	switch (type) {
	case LogicalType::Integer:
		return "integer";
	case LogicalType::Double:
		return "number";
	case LogicalType::Boolean:
		return "boolean";
	case LogicalType::Datetime:
		return "datetime";
	default:
		return "string";
	}
}

//! A grammar literal matching the JSON-encoded key, e.g. "\"row_id\"".
std::string KeyLiteral(const std::string &name) {
	auto encoded = ordered_json(name).dump();
	std::string result = "\"";
	for (char c : encoded) {
		if (c == '"' || c == '\\') {
			result += '\\';
		}
		result += c;
	}
	return result + "\"";
}

} // namespace

ordered_json BuildJsonSchema(const std::vector<PromptOutput> &outputs, bool with_row_id) {
	ordered_json properties = ordered_json::object();
	ordered_json required = ordered_json::array();
	if (with_row_id) {
		properties["row_id"] = {{"type", "integer"}};
		required.push_back("row_id");
	}
	for (auto &output : outputs) {
		properties[output.name] = TypeSchema(output.type);
		required.push_back(output.name);
	}
	ordered_json schema = ordered_json::object();
	schema["type"] = "object";
	schema["properties"] = std::move(properties);
	schema["required"] = std::move(required);
	schema["additionalProperties"] = false;
	return schema;
}

ordered_json BuildResponseFormat(const std::vector<PromptOutput> &outputs) {
	ordered_json wrapper = ordered_json::object();
	wrapper["type"] = "object";
	wrapper["properties"] = ordered_json::object();
	wrapper["properties"]["predictions"] = {{"type", "array"}, {"items", BuildJsonSchema(outputs, true)}};
	wrapper["required"] = ordered_json::array({"predictions"});
	wrapper["additionalProperties"] = false;
	ordered_json json_schema = ordered_json::object();
	json_schema["name"] = "predictions";
	json_schema["strict"] = true;
	json_schema["schema"] = std::move(wrapper);
	ordered_json result = ordered_json::object();
	result["type"] = "json_schema";
	result["json_schema"] = std::move(json_schema);
	return result;
}

std::string BuildBnfGrammar(const std::vector<PromptOutput> &outputs) {
	std::string record = "record ::= \"{\" ws " + KeyLiteral("row_id") + " ws \":\" ws integer";
	for (auto &output : outputs) {
		record += " ws \",\" ws " + KeyLiteral(output.name) + " ws \":\" ws ( " + GrammarRule(output.type) + " | null )";
	}
	record += " ws \"}\"\n";
	return "root ::= ws \"[\" ws ( record ( ws \",\" ws record )* )? ws \"]\" ws\n" + record +
	       "string ::= \"\\\"\" ( [^\"\\\\\\x00-\\x1f] | \"\\\\\" ( [\"\\\\/bfnrt] | \"u\" [0-9a-fA-F]{4} ) )* \"\\\"\"\n"
	       "integer ::= \"-\"? ( \"0\" | [1-9] [0-9]* )\n"
	       "number ::= \"-\"? ( \"0\" | [1-9] [0-9]* ) ( \".\" [0-9]+ )? ( [eE] [-+]? [0-9]+ )?\n"
	       "boolean ::= \"true\" | \"false\"\n"
	       "datetime ::= \"\\\"\" [0-9]{4} \"-\" [0-9]{2} \"-\" [0-9]{2} ( [T ] [0-9]{2} \":\" [0-9]{2} ( \":\" [0-9]{2} "
	       "( \".\" [0-9]+ )? )? ( \"Z\" | [+-] [0-9]{2} \":\" [0-9]{2} )? )? \"\\\"\"\n"
	       "null ::= \"null\"\n"
	       "ws ::= [ \\t\\n\\r]*\n";
}

struct GrammarChecker::Node {
	enum class Kind : uint8_t { Literal, Class, Ref, Alternation, Sequence } kind = Kind::Sequence;
	std::string text;
	std::vector<std::pair<unsigned char, unsigned char>> ranges;
	bool negated = false;
	std::string ref_name;
	size_t rule = 0;
	std::vector<std::unique_ptr<Node>> children;
	size_t min = 1;
	size_t max = 1;
};

namespace {

using Node = GrammarChecker::Node;
using Kind = GrammarChecker::Node::Kind;
constexpr size_t kUnbounded = SIZE_MAX;

class GrammarParser {
public:
	explicit GrammarParser(std::string_view text) : text_(text) {
	}

	void Parse(std::vector<std::string> &names, std::vector<std::unique_ptr<Node>> &rules) {
		SkipSpace();
		while (pos_ < text_.size()) {
			auto name = Identifier();
			SkipSpace();
			Expect("::=");
			for (auto &existing : names) {
				if (existing == name) {
					Fail("rule " + name + " defined twice");
				}
			}
			names.push_back(name);
			rules.push_back(Alternation());
			SkipSpace();
		}
	}

private:
	[[noreturn]] void Fail(const std::string &message) const {
		throw ParserException("grammar: " + message, SourcePosition {1, static_cast<uint32_t>(pos_ + 1)});
	}

	void SkipSpace() {
		while (pos_ < text_.size()) {
			if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
				pos_++;
			} else if (text_[pos_] == '#') {
				while (pos_ < text_.size() && text_[pos_] != '\n') {
					pos_++;
				}
			} else {
				break;
			}
		}
	}

	static bool IsNameChar(char c) {
		return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
	}

	std::string Identifier() {
		auto start = pos_;
		while (pos_ < text_.size() && IsNameChar(text_[pos_])) {
			pos_++;
		}
		if (start == pos_) {
			Fail("expected a rule name");
		}
		return std::string(text_.substr(start, pos_ - start));
	}

	void Expect(std::string_view token) {
		if (text_.substr(pos_, token.size()) != token) {
			Fail("expected '" + std::string(token) + "'");
		}
		pos_ += token.size();
	}

	//! An identifier followed by ::= starts the next rule.
	bool AtRuleStart() const {
		auto p = pos_;
		while (p < text_.size() && IsNameChar(text_[p])) {
			p++;
		}
		if (p == pos_) {
			return false;
		}
		while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) {
			p++;
		}
		return text_.substr(p, 3) == "::=";
	}

	std::unique_ptr<Node> Alternation() {
		auto node = std::make_unique<Node>();
		node->kind = Kind::Alternation;
		node->children.push_back(Sequence());
		SkipSpace();
		while (pos_ < text_.size() && text_[pos_] == '|') {
			pos_++;
			node->children.push_back(Sequence());
			SkipSpace();
		}
		return node;
	}

	std::unique_ptr<Node> Sequence() {
		auto node = std::make_unique<Node>();
		node->kind = Kind::Sequence;
		while (true) {
			SkipSpace();
			if (pos_ >= text_.size() || text_[pos_] == '|' || text_[pos_] == ')' || AtRuleStart()) {
				break;
			}
			node->children.push_back(Item());
		}
		return node;
	}

	unsigned char Escape() {
		if (pos_ >= text_.size()) {
			Fail("dangling escape");
		}
		char c = text_[pos_++];
		switch (c) {
		case 'n':
			return '\n';
		case 't':
			return '\t';
		case 'r':
			return '\r';
		case 'x': {
			if (pos_ + 2 > text_.size()) {
				Fail("short \\x escape");
			}
			auto hex = std::string(text_.substr(pos_, 2));
			pos_ += 2;
			return static_cast<unsigned char>(std::stoi(hex, nullptr, 16));
		}
		default:
			return static_cast<unsigned char>(c);
		}
	}

	std::unique_ptr<Node> Item() {
		auto node = std::make_unique<Node>();
		char c = text_[pos_];
		if (c == '"') {
			pos_++;
			node->kind = Kind::Literal;
			while (pos_ < text_.size() && text_[pos_] != '"') {
				if (text_[pos_] == '\\') {
					pos_++;
					node->text += static_cast<char>(Escape());
				} else {
					node->text += text_[pos_++];
				}
			}
			Expect("\"");
		} else if (c == '[') {
			pos_++;
			node->kind = Kind::Class;
			if (pos_ < text_.size() && text_[pos_] == '^') {
				node->negated = true;
				pos_++;
			}
			while (pos_ < text_.size() && text_[pos_] != ']') {
				auto low = ClassChar();
				auto high = low;
				if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] != ']') {
					pos_++;
					high = ClassChar();
				}
				node->ranges.emplace_back(low, high);
			}
			Expect("]");
		} else if (c == '(') {
			pos_++;
			node = Alternation();
			SkipSpace();
			Expect(")");
		} else {
			node->kind = Kind::Ref;
			node->ref_name = Identifier();
		}
		Postfix(*node);
		return node;
	}

	unsigned char ClassChar() {
		char c = text_[pos_++];
		if (c == '\\') {
			return Escape();
		}
		return static_cast<unsigned char>(c);
	}

	size_t Number() {
		auto start = pos_;
		while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
			pos_++;
		}
		if (start == pos_) {
			Fail("expected a repetition count");
		}
		return std::stoul(std::string(text_.substr(start, pos_ - start)));
	}

	void Postfix(Node &node) {
		if (pos_ >= text_.size()) {
			return;
		}
		char c = text_[pos_];
		if (c == '?') {
			node.min = 0;
			node.max = 1;
		} else if (c == '*') {
			node.min = 0;
			node.max = kUnbounded;
		} else if (c == '+') {
			node.min = 1;
			node.max = kUnbounded;
		} else if (c == '{') {
			pos_++;
			node.min = Number();
			node.max = node.min;
			if (pos_ < text_.size() && text_[pos_] == ',') {
				pos_++;
				node.max = pos_ < text_.size() && text_[pos_] == '}' ? kUnbounded : Number();
			}
			if (pos_ >= text_.size() || text_[pos_] != '}') {
				Fail("expected '}'");
			}
		} else {
			return;
		}
		pos_++;
	}

	std::string_view text_;
	size_t pos_ = 0;
};

void ResolveRefs(Node &node, const std::vector<std::string> &names) {
	if (node.kind == Kind::Ref) {
		for (size_t i = 0; i < names.size(); i++) {
			if (names[i] == node.ref_name) {
				node.rule = i;
				return;
			}
		}
		throw ParserException("grammar: undefined rule " + node.ref_name, SourcePosition {});
	}
	for (auto &child : node.children) {
		ResolveRefs(*child, names);
	}
}

using Positions = std::set<size_t>;

class Matcher {
public:
	Matcher(const std::vector<std::unique_ptr<Node>> &rules, std::string_view text) : rules_(rules), text_(text) {
	}

	Positions Repeated(const Node &node, size_t pos) {
		Positions current {pos};
		for (size_t k = 0; k < node.min; k++) {
			Positions next;
			for (auto p : current) {
				auto ends = Once(node, p);
				next.insert(ends.begin(), ends.end());
			}
			current = std::move(next);
			if (current.empty()) {
				return current;
			}
		}
		Positions result = current;
		Positions frontier = current;
		for (size_t k = node.min; k < node.max && !frontier.empty(); k++) {
			Positions next;
			for (auto p : frontier) {
				auto ends = Once(node, p);
				next.insert(ends.begin(), ends.end());
			}
			frontier.clear();
			for (auto p : next) {
				if (result.insert(p).second) {
					frontier.insert(p);
				}
			}
		}
		return result;
	}

	Positions Rule(size_t rule, size_t pos) {
		auto key = std::make_pair(rule, pos);
		auto it = memo_.find(key);
		if (it != memo_.end()) {
			return it->second;
		}
		// Guard against left recursion: a re-entrant lookup sees no matches.
		memo_[key] = {};
		auto result = Repeated(*rules_[rule], pos);
		memo_[key] = result;
		return result;
	}

private:
	Positions Once(const Node &node, size_t pos) {
		switch (node.kind) {
		case Kind::Literal:
			if (text_.substr(pos, node.text.size()) == node.text) {
				return {pos + node.text.size()};
			}
			return {};
		case Kind::Class: {
			if (pos >= text_.size()) {
				return {};
			}
			auto c = static_cast<unsigned char>(text_[pos]);
			bool in = false;
			for (auto &[low, high] : node.ranges) {
				in |= c >= low && c <= high;
			}
			if (in != node.negated) {
				return {pos + 1};
			}
			return {};
		}
		case Kind::Ref:
			return Rule(node.rule, pos);
		case Kind::Alternation: {
			Positions result;
			for (auto &child : node.children) {
				auto ends = Repeated(*child, pos);
				result.insert(ends.begin(), ends.end());
			}
			return result;
		}
		case Kind::Sequence: {
			Positions current {pos};
			for (auto &child : node.children) {
				Positions next;
				for (auto p : current) {
					auto ends = Repeated(*child, p);
					next.insert(ends.begin(), ends.end());
				}
				current = std::move(next);
				if (current.empty()) {
					break;
				}
			}
			return current;
		}
		}
		return {};
	}

	const std::vector<std::unique_ptr<Node>> &rules_;
	std::string_view text_;
	std::map<std::pair<size_t, size_t>, Positions> memo_;
};

} // namespace

GrammarChecker::GrammarChecker(std::string_view grammar) {
	GrammarParser(grammar).Parse(names_, rules_);
	for (auto &rule : rules_) {
		ResolveRefs(*rule, names_);
	}
}

GrammarChecker::~GrammarChecker() = default;

bool GrammarChecker::Accepts(std::string_view text, const std::string &start) const {
	for (size_t i = 0; i < names_.size(); i++) {
		if (names_[i] == start) {
			Matcher matcher(rules_, text);
			return matcher.Rule(i, 0).count(text.size()) > 0;
		}
	}
	throw ParserException("grammar: undefined start rule " + start, SourcePosition {});
}

} // namespace semaquery
