#pragma once

#include "semaquery/main/database.hpp"
#include "semaquery/predictors/mock_predictor.hpp"
#include "semaquery/sql/parser.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace semaquery::test {

inline std::filesystem::path DataPath(const std::string &relative) {
	return std::filesystem::path(SEMAQUERY_TEST_DATA) / relative;
}

inline std::string ReadFile(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	std::stringstream buffer;
	buffer << in.rdbuf();
	return buffer.str();
}

//! Executes every statement; returns the last result.
inline QueryResult RunScript(Session &session, const std::string &sql) {
	QueryResult last;
	for (auto &parsed : ParseScript(sql)) {
		last = session.Execute(parsed.statement);
	}
	return last;
}

inline std::vector<Row> Sorted(std::vector<Row> rows) {
	std::sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) {
		return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), Value::SortLess);
	});
	return rows;
}

inline std::shared_ptr<const MockFixture> Fixture(const std::string &name) {
	return MockFixture::Load(DataPath("fixtures/" + name));
}

//! Fresh temporary directory removed on destruction.
class TempDir {
public:
	TempDir() {
		auto base = std::filesystem::temp_directory_path();
		for (;;) {
			path_ = base / ("semaquery-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
			if (std::filesystem::create_directory(path_)) {
				break;
			}
		}
	}
	~TempDir() {
		std::error_code ignored;
		std::filesystem::remove_all(path_, ignored);
	}
	const std::filesystem::path &Path() const {
		return path_;
	}

private:
	static inline int counter_ = 0;
	std::filesystem::path path_;
};

} // namespace semaquery::test
