#include "semaquery/bench/cost_model.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"
#include "semaquery/core/csv.hpp"
#include "semaquery/main/database.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

namespace semaquery {

namespace {

size_t CallCount(const LatencyModel &model, size_t batch_size) {
	return (model.tuples + batch_size - 1) / batch_size;
}

std::string Seconds(double value) {
	char buffer[32];
	std::snprintf(buffer, sizeof(buffer), "%.4f", value);
	return buffer;
}

} // namespace

LatencyModel LatencyModel::Synthetic() {
	LatencyModel model;
	for (size_t b = 1; b <= 1024; b *= 2) {
		model.latency[b] = 0.8 + 0.15 * static_cast<double>(b);
	}
	model.rate_limit_rpm = 500;
	model.workers = 16;
	model.tuples = 10000;
	model.synthetic = true;
	return model;
}

LatencyModel LatencyModel::LoadCsv(const std::filesystem::path &path) {
	std::ifstream in(path);
	if (!in) {
		throw IOException("cannot open latency table " + path.string());
	}
	std::stringstream text;
	text << in.rdbuf();
	LatencyModel model;
	auto records = ParseCsvRecords(text.str());
	for (size_t i = 1; i < records.size(); i++) {
		auto &fields = records[i].fields;
		if (fields.size() != 2 || !fields[0] || !fields[1]) {
			throw ConfigException("latency table line " + std::to_string(records[i].line) +
			                      ": expected batch_size,seconds");
		}
		auto batch = string_util::ParseInteger(*fields[0]);
		auto seconds = string_util::ParseDouble(*fields[1]);
		if (!batch || *batch < 1 || !seconds || *seconds < 0) {
			throw ConfigException("latency table line " + std::to_string(records[i].line) + ": bad value");
		}
		model.latency[static_cast<size_t>(*batch)] = *seconds;
	}
	model.Validate();
	return model;
}

void LatencyModel::Validate() const {
	if (latency.empty()) {
		throw ConfigException("latency table is empty");
	}
	double previous = 0;
	for (auto &[batch, seconds] : latency) {
		if (seconds < previous) {
			throw ConfigException("latency must not decrease with batch size (batch " + std::to_string(batch) + ")");
		}
		previous = seconds;
	}
}

double LatencyModel::CallLatency(size_t batch_size) const {
	Validate();
	auto exact = latency.find(batch_size);
	if (exact != latency.end()) {
		return exact->second;
	}
	if (latency.size() == 1) {
		return latency.begin()->second;
	}
	auto upper = latency.upper_bound(batch_size);
	if (upper == latency.begin()) {
		return latency.begin()->second;
	}
	if (upper == latency.end()) {
		--upper;
	}
	auto lower = std::prev(upper);
	auto x0 = static_cast<double>(lower->first);
	auto x1 = static_cast<double>(upper->first);
	auto t = (static_cast<double>(batch_size) - x0) / (x1 - x0);
	return lower->second + t * (upper->second - lower->second);
}

LatencyEstimate PredictTotalLatency(const LatencyModel &model, size_t batch_size) {
	if (batch_size == 0 || model.workers == 0) {
		throw ConfigException("batch size and workers must be at least 1");
	}
	LatencyEstimate estimate;
	estimate.calls = CallCount(model, batch_size);
	if (estimate.calls == 0) {
		return estimate;
	}
	auto latency = model.CallLatency(batch_size);
	auto rounds = (estimate.calls + model.workers - 1) / model.workers;
	estimate.serial_bound = static_cast<double>(rounds) * latency;
	if (model.rate_limit_rpm) {
		estimate.rate_bound = static_cast<double>(estimate.calls - 1) * 60.0 / *model.rate_limit_rpm + latency;
	}
	estimate.total = std::max(estimate.serial_bound, estimate.rate_bound);
	return estimate;
}

double SimulateTotalLatency(const LatencyModel &model, size_t batch_size, double jitter, uint64_t seed) {
	if (batch_size == 0 || model.workers == 0) {
		throw ConfigException("batch size and workers must be at least 1");
	}
	auto calls = CallCount(model, batch_size);
	auto latency = model.CallLatency(batch_size);
	auto interval = model.rate_limit_rpm ? 60.0 / *model.rate_limit_rpm : 0.0;
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> noise(1.0 - jitter, 1.0 + jitter);

	std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
	for (size_t w = 0; w < std::min(model.workers, calls); w++) {
		free_at.push(0.0);
	}
	double next_token = 0;
	double finish = 0;
	for (size_t call = 0; call < calls; call++) {
		auto worker = free_at.top();
		free_at.pop();
		auto start = std::max(worker, next_token);
		next_token = start + interval;
		auto end = start + (jitter > 0 ? latency * noise(rng) : latency);
		finish = std::max(finish, end);
		free_at.push(end);
	}
	return finish;
}

double MeasureTotalLatency(const LatencyModel &model, size_t batch_size, double milliseconds_per_second) {
	if (!(milliseconds_per_second > 0)) {
		throw ConfigException("time scale must be positive");
	}
	Database database;
	Session session(database);
	auto table = std::make_shared<Table>("bench_input", std::vector<ColumnSchema> {{"id", LogicalType::Integer},
	                                                                                {"text", LogicalType::Varchar}});
	for (size_t i = 0; i < model.tuples; i++) {
		table->AppendRow({Value::Integer(static_cast<int64_t>(i)), Value::Varchar("item " + std::to_string(i))});
	}
	database.Tables().CreateTable(table);
	session.Execute("CREATE LLM MODEL bench PATH 'bench' ON PROMPT");

	ordered_json header = {{"version", 1},
	                       {"latency", {{"base_ms", model.CallLatency(batch_size) * milliseconds_per_second}}}};
	session.SetFixture(MockFixture::Parse(header.dump() + "\n{\"default\": true, \"echo\": true}\n"));
	session.Set("batch_size", static_cast<int64_t>(batch_size));
	session.Set("n_threads", static_cast<int64_t>(model.workers));
	session.Set("use_dedup", false);
	// One chunk, so every batch of the run is in flight together as in the model.
	session.Set("chunk_capacity", static_cast<int64_t>(std::max<size_t>(model.tuples, 1)));
	if (model.rate_limit_rpm) {
		session.Set("rate_limit_rpm", *model.rate_limit_rpm * 1000.0 / milliseconds_per_second);
	}
	auto start = std::chrono::steady_clock::now();
	session.Execute("SELECT LLM bench (PROMPT 'label {{text}} as {label VARCHAR}') FROM bench_input");
	auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
	return elapsed / milliseconds_per_second;
}

std::vector<SweepPoint> Sweep(const LatencyModel &model, const std::vector<size_t> &batch_sizes,
                              const std::vector<size_t> &workers, const SweepOptions &options) {
	std::vector<SweepPoint> points;
	for (auto batch : batch_sizes) {
		for (auto count : workers) {
			auto scenario = model;
			scenario.workers = count;
			SweepPoint point;
			point.batch_size = batch;
			point.workers = count;
			auto estimate = PredictTotalLatency(scenario, batch);
			point.calls = estimate.calls;
			point.predicted = estimate.total;
			point.simulated = SimulateTotalLatency(scenario, batch, options.jitter, options.seed);
			if (options.measure_milliseconds_per_second > 0) {
				point.measured = MeasureTotalLatency(scenario, batch, options.measure_milliseconds_per_second);
			}
			points.push_back(point);
		}
	}
	return points;
}

void WriteSweepCsv(std::ostream &out, const std::vector<SweepPoint> &points) {
	out << "batch_size,workers,calls,predicted_s,simulated_s,measured_s\n";
	for (auto &point : points) {
		out << point.batch_size << "," << point.workers << "," << point.calls << "," << Seconds(point.predicted) << ","
		    << Seconds(point.simulated) << "," << (point.measured ? Seconds(*point.measured) : "") << "\n";
	}
}

} // namespace semaquery
