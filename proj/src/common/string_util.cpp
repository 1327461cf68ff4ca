#include "semaquery/common/string_util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace semaquery::string_util {

std::string Upper(std::string_view s) {
	std::string result(s);
	std::transform(result.begin(), result.end(), result.begin(),
	               [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
	return result;
}

std::string Lower(std::string_view s) {
	std::string result(s);
	std::transform(result.begin(), result.end(), result.begin(),
	               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
	return result;
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
	if (a.size() != b.size()) {
		return false;
	}
	for (size_t i = 0; i < a.size(); i++) {
		if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
			return false;
		}
	}
	return true;
}

std::string_view Trim(std::string_view s) {
	size_t begin = 0;
	while (begin < s.size() && std::isspace(static_cast<unsigned char>(s[begin]))) {
		begin++;
	}
	size_t end = s.size();
	while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
		end--;
	}
	return s.substr(begin, end - begin);
}

std::vector<std::string> Split(std::string_view s, char delimiter) {
	std::vector<std::string> result;
	size_t start = 0;
	while (true) {
		auto pos = s.find(delimiter, start);
		if (pos == std::string_view::npos) {
			result.emplace_back(s.substr(start));
			break;
		}
		result.emplace_back(s.substr(start, pos - start));
		start = pos + 1;
	}
	return result;
}

std::string Join(const std::vector<std::string> &parts, std::string_view separator) {
	std::string result;
	for (size_t i = 0; i < parts.size(); i++) {
		if (i > 0) {
			result += separator;
		}
		result += parts[i];
	}
	return result;
}

bool StartsWith(std::string_view s, std::string_view prefix) {
	return s.substr(0, prefix.size()) == prefix;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
	return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool Contains(std::string_view haystack, std::string_view needle) {
	return haystack.find(needle) != std::string_view::npos;
}

std::optional<int64_t> ParseInteger(std::string_view s) {
	if (s.empty()) {
		return std::nullopt;
	}
	size_t offset = 0;
	if (s[0] == '+') {
		offset = 1;
	}
	if (offset == s.size()) {
		return std::nullopt;
	}
	int64_t value = 0;
	auto [ptr, ec] = std::from_chars(s.data() + offset, s.data() + s.size(), value);
	if (ec != std::errc() || ptr != s.data() + s.size()) {
		return std::nullopt;
	}
	return value;
}

std::optional<double> ParseDouble(std::string_view s) {
	if (s.empty()) {
		return std::nullopt;
	}
	size_t offset = s[0] == '+' ? 1 : 0;
	if (offset == s.size()) {
		return std::nullopt;
	}
	// from_chars accepts "inf"/"nan"; reject anything that is not a decimal literal
	for (size_t i = offset; i < s.size(); i++) {
		char c = s[i];
		if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '-' ||
		      c == '+')) {
			return std::nullopt;
		}
	}
	double value = 0;
	auto [ptr, ec] = std::from_chars(s.data() + offset, s.data() + s.size(), value);
	if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
		return std::nullopt;
	}
	return value;
}

uint64_t Fnv1a(std::string_view data, uint64_t seed) {
	uint64_t hash = seed;
	for (unsigned char c : data) {
		hash ^= c;
		hash *= 1099511628211ULL;
	}
	return hash;
}

} // namespace semaquery::string_util
