#pragma once

#include "semaquery/predict/output_parser.hpp"

#include <atomic>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace semaquery {

//! Parsed predictions keyed by (model, template hash, input values). Lives as long as one predict operator.
//! Concurrent inserts of the same key overwrite each other; the values are equal because backends are pure.
class DedupCache {
public:
	static std::string Key(const std::string &model, uint64_t template_hash, const std::string &inputs_json);

	std::optional<ParsedRecord> Lookup(const std::string &key);
	void Insert(const std::string &key, ParsedRecord record);

	size_t Size() const;
	uint64_t Hits() const {
		return hits_;
	}
	uint64_t Misses() const {
		return misses_;
	}

private:
	mutable std::shared_mutex mutex_;
	std::unordered_map<std::string, ParsedRecord> entries_;
	std::atomic<uint64_t> hits_ {0};
	std::atomic<uint64_t> misses_ {0};
};

} // namespace semaquery
