#pragma once

#include "semaquery/common/exception.hpp"
#include "semaquery/predict/output_parser.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace semaquery::test {

//! Runs every case of a coercion fixture file through ParseStructuredOutput. Returns one message per mismatch;
//! `count` receives the number of cases.
inline std::vector<std::string> CheckCoercionCases(const std::filesystem::path &file, size_t &count) {
	std::ifstream in(file);
	auto document = nlohmann::json::parse(in);
	std::vector<std::string> failures;
	count = 0;
	for (auto &item : document.at("cases")) {
		count++;
		auto name = item.at("name").get<std::string>();
		std::vector<PromptOutput> outputs;
		for (auto &output : item.at("outputs")) {
			outputs.push_back({output.at(0).get<std::string>(), TypeFromName(output.at(1).get<std::string>()).value()});
		}
		auto rows = item.at("rows").get<size_t>();
		auto raw = item.at("raw").get<std::string>();
		std::string error;
		std::vector<ParsedRecord> parsed;
		try {
			parsed = ParseStructuredOutput(raw, outputs, rows);
		} catch (const MalformedOutputException &) {
			error = "malformed";
		} catch (const RowCountMismatchException &) {
			error = "row_count";
		}
		if (item.contains("error")) {
			if (error != item["error"].get<std::string>()) {
				failures.push_back(name + ": expected error " + item["error"].get<std::string>() + ", got '" + error +
				                   "'");
			}
			continue;
		}
		if (!error.empty()) {
			failures.push_back(name + ": unexpected error " + error);
			continue;
		}
		auto &expect = item.at("expect");
		if (parsed.size() != expect.size()) {
			failures.push_back(name + ": wrong record count");
			continue;
		}
		std::vector<size_t> flagged;
		for (size_t r = 0; r < parsed.size(); r++) {
			if (parsed[r].flagged) {
				flagged.push_back(r);
			}
			for (size_t c = 0; c < outputs.size(); c++) {
				auto &value = parsed[r].values.at(c);
				auto &wanted = expect[r].at(c);
				if (wanted.is_null()) {
					if (!value.IsNull()) {
						failures.push_back(name + ": expected NULL, got " + value.ToString());
					}
				} else if (value.IsNull() || value.Type() != outputs[c].type || value.ToString() != wanted.get<std::string>()) {
					failures.push_back(name + ": expected " + wanted.get<std::string>() + ", got " +
					                   (value.IsNull() ? std::string("NULL") : value.ToString()));
				}
			}
		}
		auto expected_flags = item.value("flagged", std::vector<size_t> {});
		if (flagged != expected_flags) {
			failures.push_back(name + ": flagged rows differ");
		}
	}
	return failures;
}

} // namespace semaquery::test
