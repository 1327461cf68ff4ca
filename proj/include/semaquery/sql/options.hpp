#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace semaquery {

using OptionValue = std::variant<bool, int64_t, double, std::string>;

//! `'key': 'text'` style rendering of an option value.
std::string OptionValueToSQL(const OptionValue &value);
//! Plain rendering without quotes.
std::string OptionValueToString(const OptionValue &value);

//! Insertion-ordered key/value map from an OPTIONS clause. Keys compare case-insensitively.
class OptionMap {
public:
	using Entry = std::pair<std::string, OptionValue>;

	//! Returns false when the key already exists (the map is left unchanged).
	bool Insert(std::string key, OptionValue value);
	//! Inserts or replaces.
	void Set(std::string key, OptionValue value);
	const OptionValue *Find(std::string_view key) const;
	bool Contains(std::string_view key) const {
		return Find(key) != nullptr;
	}
	bool Erase(std::string_view key);

	size_t Size() const {
		return entries_.size();
	}
	bool Empty() const {
		return entries_.empty();
	}
	std::vector<Entry>::const_iterator begin() const {
		return entries_.begin();
	}
	std::vector<Entry>::const_iterator end() const {
		return entries_.end();
	}

	//! `{'a': 1, 'b': 'x'}`
	std::string ToSQL() const;

	bool operator==(const OptionMap &) const = default;

private:
	std::vector<Entry> entries_;
};

//! Parses a brace-enclosed OPTIONS body such as `{ 'n_threads': 1, 'temperature': 0.5 }`.
//! A trailing comma before `}` is accepted. Throws ParserException on duplicate keys or malformed literals.
OptionMap ParseOptions(std::string_view text);

} // namespace semaquery
