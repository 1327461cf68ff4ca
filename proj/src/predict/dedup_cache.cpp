#include "semaquery/predict/dedup_cache.hpp"

#include <mutex>

namespace semaquery {

std::string DedupCache::Key(const std::string &model, uint64_t template_hash, const std::string &inputs_json) {
	return model + '\x1f' + std::to_string(template_hash) + '\x1f' + inputs_json;
}

std::optional<ParsedRecord> DedupCache::Lookup(const std::string &key) {
	std::shared_lock lock(mutex_);
	auto it = entries_.find(key);
	if (it == entries_.end()) {
		misses_++;
		return std::nullopt;
	}
	hits_++;
	return it->second;
}

void DedupCache::Insert(const std::string &key, ParsedRecord record) {
	std::unique_lock lock(mutex_);
	entries_[key] = std::move(record);
}

size_t DedupCache::Size() const {
	std::shared_lock lock(mutex_);
	return entries_.size();
}

} // namespace semaquery
