#include "semaquery/predict/call_stats.hpp"

#include <algorithm>
#include <cstdio>

namespace semaquery {

bool CallStatsSnapshot::operator==(const CallStatsSnapshot &other) const {
	return calls == other.calls && retries == other.retries && reprompts == other.reprompts &&
	       fallback_batches == other.fallback_batches && failed_rows == other.failed_rows &&
	       flagged_rows == other.flagged_rows && cache_hits == other.cache_hits &&
	       cache_misses == other.cache_misses && null_inputs == other.null_inputs &&
	       input_tokens == other.input_tokens && output_tokens == other.output_tokens;
}

CallStatsSnapshot &CallStatsSnapshot::operator+=(const CallStatsSnapshot &other) {
	calls += other.calls;
	retries += other.retries;
	reprompts += other.reprompts;
	fallback_batches += other.fallback_batches;
	failed_rows += other.failed_rows;
	flagged_rows += other.flagged_rows;
	cache_hits += other.cache_hits;
	cache_misses += other.cache_misses;
	null_inputs += other.null_inputs;
	input_tokens += other.input_tokens;
	output_tokens += other.output_tokens;
	call_micros += other.call_micros;
	max_call_micros = std::max(max_call_micros, other.max_call_micros);
	wall_micros += other.wall_micros;
	return *this;
}

std::string CallStatsSnapshot::ToString() const {
	char wall[32];
	std::snprintf(wall, sizeof(wall), "%.1fms", static_cast<double>(wall_micros) / 1000.0);
	return "calls=" + std::to_string(calls) + " retries=" + std::to_string(retries) +
	       " reprompts=" + std::to_string(reprompts) + " fallback_batches=" + std::to_string(fallback_batches) +
	       " failed_rows=" + std::to_string(failed_rows) + " flagged_rows=" + std::to_string(flagged_rows) +
	       " cache_hits=" + std::to_string(cache_hits) + " cache_misses=" + std::to_string(cache_misses) +
	       " tokens_in=" + std::to_string(input_tokens) + " tokens_out=" + std::to_string(output_tokens) +
	       " wall=" + wall;
}

void CallStats::RecordCallTime(uint64_t micros) {
	call_micros += micros;
	auto current = max_call_micros.load();
	while (micros > current && !max_call_micros.compare_exchange_weak(current, micros)) {
	}
}

CallStatsSnapshot CallStats::Snapshot() const {
	CallStatsSnapshot result;
	result.calls = calls;
	result.retries = retries;
	result.reprompts = reprompts;
	result.fallback_batches = fallback_batches;
	result.failed_rows = failed_rows;
	result.flagged_rows = flagged_rows;
	result.cache_hits = cache_hits;
	result.cache_misses = cache_misses;
	result.null_inputs = null_inputs;
	result.input_tokens = input_tokens;
	result.output_tokens = output_tokens;
	result.call_micros = call_micros;
	result.max_call_micros = max_call_micros;
	result.wall_micros = wall_micros;
	return result;
}

} // namespace semaquery
