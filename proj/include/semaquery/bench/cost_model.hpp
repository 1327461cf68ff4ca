#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semaquery {

//! Inputs of the marshaling-vs-parallelism latency analysis.
struct LatencyModel {
	//! Mean seconds per call by rows per prompt. Must be nondecreasing in batch size.
	std::map<size_t, double> latency;
	//! Vendor requests-per-minute limit; none means unlimited.
	std::optional<double> rate_limit_rpm;
	size_t workers = 16;
	size_t tuples = 10000;
	//! Set for the built-in table, which is not measured data.
	bool synthetic = false;

	//! latency(b) = 0.8 + 0.15 * b seconds for b = 1, 2, 4, ..., 1024; 10000 tuples, 500 requests per minute.
	static LatencyModel Synthetic();
	//! CSV with header `batch_size,seconds`. Throws IOException / ConfigException.
	static LatencyModel LoadCsv(const std::filesystem::path &path);

	//! Seconds per call. Linear interpolation between neighbouring table entries and linear extrapolation from
	//! the two nearest entries outside the table (clamped at the first entry below it).
	double CallLatency(size_t batch_size) const;
	//! Throws ConfigException for an empty or decreasing table.
	void Validate() const;
};

struct LatencyEstimate {
	size_t calls = 0;
	//! ceil(calls / workers) * latency(b).
	double serial_bound = 0;
	//! (calls - 1) * 60 / rpm + latency(b): the last call cannot start before its token, then takes one call.
	double rate_bound = 0;
	double total = 0;
};

//! Closed form: total = max(serial bound, rate bound), calls = ceil(tuples / batch_size).
LatencyEstimate PredictTotalLatency(const LatencyModel &model, size_t batch_size);

//! Discrete-event simulation of the executor's dispatch: `workers` identical workers take calls in order, each
//! call waits for a free worker and for a rate-limiter token (bucket of one, refilled at rpm / 60 per second).
//! `jitter` > 0 scales every call duration by a uniform factor in [1 - jitter, 1 + jitter] drawn from `seed`.
double SimulateTotalLatency(const LatencyModel &model, size_t batch_size, double jitter = 0, uint64_t seed = 0);

//! Runs the real predict operator against the mock backend with the model's latency and rate limit scaled by
//! `milliseconds_per_second`, and returns the wall time converted back to model seconds.
double MeasureTotalLatency(const LatencyModel &model, size_t batch_size, double milliseconds_per_second);

struct SweepPoint {
	size_t batch_size = 0;
	size_t workers = 0;
	size_t calls = 0;
	double predicted = 0;
	double simulated = 0;
	std::optional<double> measured;
};

struct SweepOptions {
	double jitter = 0;
	uint64_t seed = 42;
	//! Also run the real operator for each point; 0 disables.
	double measure_milliseconds_per_second = 0;
};

std::vector<SweepPoint> Sweep(const LatencyModel &model, const std::vector<size_t> &batch_sizes,
                              const std::vector<size_t> &workers, const SweepOptions &options = {});
//! Columns: batch_size,workers,calls,predicted_s,simulated_s,measured_s (empty when not measured).
void WriteSweepCsv(std::ostream &out, const std::vector<SweepPoint> &points);

} // namespace semaquery
