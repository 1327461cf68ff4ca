#pragma once

#include <atomic>
#include <cstdint>
#include <string>

namespace semaquery {

//! Plain copy of the counters. Equality ignores timings, which vary run to run.
struct CallStatsSnapshot {
	//! First attempts of every request plus strict re-prompts. Retries are counted separately.
	uint64_t calls = 0;
	uint64_t retries = 0;
	uint64_t reprompts = 0;
	uint64_t fallback_batches = 0;
	//! Rows that still had no prediction after fallback and retries.
	uint64_t failed_rows = 0;
	//! Rows whose output lacked a field or held an uncoercible value.
	uint64_t flagged_rows = 0;
	uint64_t cache_hits = 0;
	uint64_t cache_misses = 0;
	//! Rows answered Null without a call because every input was Null.
	uint64_t null_inputs = 0;
	uint64_t input_tokens = 0;
	uint64_t output_tokens = 0;
	uint64_t call_micros = 0;
	uint64_t max_call_micros = 0;
	uint64_t wall_micros = 0;

	bool operator==(const CallStatsSnapshot &other) const;
	CallStatsSnapshot &operator+=(const CallStatsSnapshot &other);
	//! One line, e.g. "calls=4 retries=0 ... tokens_in=812 tokens_out=96 wall=3.1ms".
	std::string ToString() const;
};

//! Counters updated concurrently by predict workers.
class CallStats {
public:
	std::atomic<uint64_t> calls {0};
	std::atomic<uint64_t> retries {0};
	std::atomic<uint64_t> reprompts {0};
	std::atomic<uint64_t> fallback_batches {0};
	std::atomic<uint64_t> failed_rows {0};
	std::atomic<uint64_t> flagged_rows {0};
	std::atomic<uint64_t> cache_hits {0};
	std::atomic<uint64_t> cache_misses {0};
	std::atomic<uint64_t> null_inputs {0};
	std::atomic<uint64_t> input_tokens {0};
	std::atomic<uint64_t> output_tokens {0};
	std::atomic<uint64_t> call_micros {0};
	std::atomic<uint64_t> max_call_micros {0};
	std::atomic<uint64_t> wall_micros {0};

	void RecordCallTime(uint64_t micros);
	CallStatsSnapshot Snapshot() const;
};

} // namespace semaquery
