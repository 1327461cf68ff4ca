#include "semaquery/sql/options.hpp"

#include "semaquery/common/string_util.hpp"
#include "semaquery/common/value.hpp"
#include "semaquery/sql/parser.hpp"

#include <algorithm>

namespace semaquery {

std::string OptionValueToString(const OptionValue &value) {
	return std::visit(
	    [](const auto &v) -> std::string {
		    using T = std::decay_t<decltype(v)>;
		    if constexpr (std::is_same_v<T, bool>) {
			    return v ? "true" : "false";
		    } else if constexpr (std::is_same_v<T, int64_t>) {
			    return std::to_string(v);
		    } else if constexpr (std::is_same_v<T, double>) {
			    return FormatDouble(v);
		    } else {
			    return v;
		    }
	    },
	    value);
}

std::string OptionValueToSQL(const OptionValue &value) {
	if (auto text = std::get_if<std::string>(&value)) {
		return QuoteString(*text);
	}
	if (auto flag = std::get_if<bool>(&value)) {
		return *flag ? "TRUE" : "FALSE";
	}
	return OptionValueToString(value);
}

bool OptionMap::Insert(std::string key, OptionValue value) {
	if (Contains(key)) {
		return false;
	}
	entries_.emplace_back(std::move(key), std::move(value));
	return true;
}

void OptionMap::Set(std::string key, OptionValue value) {
	for (auto &entry : entries_) {
		if (string_util::EqualsIgnoreCase(entry.first, key)) {
			entry.second = std::move(value);
			return;
		}
	}
	entries_.emplace_back(std::move(key), std::move(value));
}

const OptionValue *OptionMap::Find(std::string_view key) const {
	for (auto &entry : entries_) {
		if (string_util::EqualsIgnoreCase(entry.first, key)) {
			return &entry.second;
		}
	}
	return nullptr;
}

bool OptionMap::Erase(std::string_view key) {
	auto it = std::find_if(entries_.begin(), entries_.end(),
	                       [&](const Entry &entry) { return string_util::EqualsIgnoreCase(entry.first, key); });
	if (it == entries_.end()) {
		return false;
	}
	entries_.erase(it);
	return true;
}

std::string OptionMap::ToSQL() const {
	std::string result = "{";
	for (size_t i = 0; i < entries_.size(); i++) {
		if (i > 0) {
			result += ", ";
		}
		result += QuoteString(entries_[i].first) + ": " + OptionValueToSQL(entries_[i].second);
	}
	return result + "}";
}

} // namespace semaquery
