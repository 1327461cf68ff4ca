#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semaquery::string_util {

std::string Upper(std::string_view s);
std::string Lower(std::string_view s);
bool EqualsIgnoreCase(std::string_view a, std::string_view b);
std::string_view Trim(std::string_view s);
std::vector<std::string> Split(std::string_view s, char delimiter);
std::string Join(const std::vector<std::string> &parts, std::string_view separator);
bool StartsWith(std::string_view s, std::string_view prefix);
bool EndsWith(std::string_view s, std::string_view suffix);
bool Contains(std::string_view haystack, std::string_view needle);

//! Strict integer parse: optional sign, digits only, no surrounding garbage.
std::optional<int64_t> ParseInteger(std::string_view s);
//! Strict decimal parse (accepts exponents); rejects trailing garbage, inf and nan.
std::optional<double> ParseDouble(std::string_view s);

//! 64-bit FNV-1a; stable across platforms and runs.
uint64_t Fnv1a(std::string_view data, uint64_t seed = 14695981039346656037ULL);

} // namespace semaquery::string_util
