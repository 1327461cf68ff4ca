#include "semaquery/predict/predict_executor.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/predict/worker_pool.hpp"

#include <chrono>
#include <thread>
#include <unordered_map>

namespace semaquery {

namespace {

using Micros = std::chrono::microseconds;

uint64_t ElapsedMicros(std::chrono::steady_clock::time_point start) {
	return static_cast<uint64_t>(std::chrono::duration_cast<Micros>(std::chrono::steady_clock::now() - start).count());
}

bool AllNull(const Row &row) {
	for (auto &value : row) {
		if (!value.IsNull()) {
			return false;
		}
	}
	return true;
}

} // namespace

PredictExecutor::PredictExecutor(std::shared_ptr<const PredictInfo> info, PredictConfig config,
                                 std::shared_ptr<Predictor> predictor, std::shared_ptr<RateLimiter> limiter,
                                 CallStats &stats, WarningSink warn)
    : info_(std::move(info)), config_(std::move(config)), predictor_(std::move(predictor)),
      limiter_(std::move(limiter)), stats_(stats), warn_(std::move(warn)), renderer_(*info_) {
}

void PredictExecutor::Warn(const std::string &message) const {
	if (warn_) {
		warn_(message);
	}
}

void PredictExecutor::Backoff(size_t attempt) const {
	if (config_.retry_backoff_ms <= 0) {
		return;
	}
	auto delay = config_.retry_backoff_ms << std::min<size_t>(attempt - 1, 20);
	std::this_thread::sleep_for(std::chrono::milliseconds(delay));
}

PredictResponse PredictExecutor::Invoke(const PredictRequest &request) {
	if (limiter_) {
		limiter_->Acquire();
	}
	auto start = std::chrono::steady_clock::now();
	auto response = predictor_->Predict(request);
	stats_.RecordCallTime(ElapsedMicros(start));
	stats_.input_tokens += response.input_tokens;
	stats_.output_tokens += response.output_tokens;
	stats_.retries += response.retries;
	return response;
}

std::vector<ParsedRecord> PredictExecutor::Decode(const PredictResponse &response, size_t expected) const {
	if (response.records) {
		auto &records = *response.records;
		if (records.size() != expected) {
			throw RowCountMismatchException(expected, records.size());
		}
		std::vector<ParsedRecord> result;
		for (auto &record : records) {
			result.push_back(ParsedRecord {record, false});
		}
		return result;
	}
	return ParseStructuredOutput(response.text, renderer_.Outputs(), expected);
}

PredictRequest PredictExecutor::BuildRequest(const std::vector<Unit> &units, const std::vector<size_t> &batch,
                                             bool strict) const {
	auto tuples = ordered_json::array();
	PredictRequest request;
	for (size_t k = 0; k < batch.size(); k++) {
		auto &unit = units[batch[k]];
		ordered_json tuple = ordered_json::object();
		tuple["row_id"] = k;
		for (auto &[key, value] : unit.payload.items()) {
			tuple[key] = value;
		}
		tuples.push_back(std::move(tuple));
		if (!unit.inputs.empty()) {
			request.rows.push_back(unit.inputs);
		}
	}
	renderer_.Render(request, tuples, strict);
	return request;
}

std::vector<std::vector<size_t>> PredictExecutor::MakeBatches(const std::vector<Unit> &units) const {
	auto size = config_.EffectiveBatchSize();
	std::vector<std::vector<size_t>> pending;
	for (size_t i = 0; i < units.size(); i += size) {
		std::vector<size_t> batch;
		for (size_t j = i; j < std::min(units.size(), i + size); j++) {
			batch.push_back(j);
		}
		pending.push_back(std::move(batch));
	}
	// Batches over the prompt budget are halved until they fit; a single oversized row is sent as is.
	std::vector<std::vector<size_t>> result;
	while (!pending.empty()) {
		auto batch = std::move(pending.front());
		pending.erase(pending.begin());
		if (batch.size() > 1) {
			auto request = BuildRequest(units, batch, false);
			if (static_cast<int64_t>(request.system.size() + request.user.size()) > config_.max_prompt_chars) {
				auto half = batch.size() / 2;
				std::vector<size_t> first(batch.begin(), batch.begin() + half);
				std::vector<size_t> second(batch.begin() + half, batch.end());
				pending.insert(pending.begin(), std::move(second));
				pending.insert(pending.begin(), std::move(first));
				continue;
			}
		}
		result.push_back(std::move(batch));
	}
	return result;
}

bool PredictExecutor::RunBatch(const std::vector<Unit> &units, const std::vector<size_t> &batch,
                               std::vector<Outcome> &outcomes) {
	stats_.calls++;
	std::vector<ParsedRecord> records;
	try {
		try {
			records = Decode(Invoke(BuildRequest(units, batch, false)), batch.size());
		} catch (MalformedOutputException &) {
			stats_.reprompts++;
			stats_.calls++;
			records = Decode(Invoke(BuildRequest(units, batch, true)), batch.size());
		}
	} catch (BackendException &) {
		return false;
	} catch (MalformedOutputException &) {
		return false;
	} catch (RowCountMismatchException &) {
		return false;
	}
	for (size_t k = 0; k < batch.size(); k++) {
		outcomes[batch[k]].record = std::move(records[k]);
	}
	return true;
}

PredictExecutor::Outcome PredictExecutor::RunSingle(const Unit &unit) {
	std::vector<Unit> single {unit};
	std::vector<size_t> batch {0};
	bool strict = false;
	size_t attempt = 0;
	stats_.calls++;
	while (true) {
		std::string error;
		bool retryable = true;
		try {
			return Outcome {Decode(Invoke(BuildRequest(single, batch, strict)), 1)[0], ""};
		} catch (MalformedOutputException &ex) {
			if (!strict) {
				strict = true;
				stats_.reprompts++;
				stats_.calls++;
				continue;
			}
			error = ex.what();
		} catch (RowCountMismatchException &ex) {
			error = ex.what();
		} catch (BackendException &ex) {
			error = ex.what();
			retryable = ex.Retryable();
		}
		if (!retryable || attempt >= static_cast<size_t>(config_.max_retries)) {
			return Outcome {std::nullopt, error};
		}
		attempt++;
		stats_.retries++;
		Backoff(attempt);
	}
}

std::vector<PredictExecutor::Outcome> PredictExecutor::Dispatch(const std::vector<Unit> &units) {
	std::vector<Outcome> outcomes(units.size());
	auto batches = MakeBatches(units);
	auto threads = static_cast<size_t>(config_.n_threads);
	std::vector<char> batch_failed(batches.size(), 0);
	RunParallel(threads, batches.size(), [&](size_t b) {
		auto &batch = batches[b];
		if (batch.size() == 1) {
			outcomes[batch[0]] = RunSingle(units[batch[0]]);
			return;
		}
		batch_failed[b] = !RunBatch(units, batch, outcomes);
	});
	std::vector<size_t> fallback;
	for (size_t b = 0; b < batches.size(); b++) {
		if (batch_failed[b]) {
			stats_.fallback_batches++;
			fallback.insert(fallback.end(), batches[b].begin(), batches[b].end());
		}
	}
	RunParallel(threads, fallback.size(), [&](size_t k) { outcomes[fallback[k]] = RunSingle(units[fallback[k]]); });
	return outcomes;
}

std::vector<Row> PredictExecutor::PredictRows(const std::vector<Row> &inputs) {
	auto start = std::chrono::steady_clock::now();
	auto width = info_->outputs.size();
	std::vector<Row> result(inputs.size(), Row(width));
	std::vector<Unit> units;
	std::unordered_map<std::string, size_t> pending;
	auto hash = info_->prompt.Hash();
	for (size_t i = 0; i < inputs.size(); i++) {
		auto &row = inputs[i];
		if (AllNull(row)) {
			stats_.null_inputs++;
			continue;
		}
		ordered_json payload = ordered_json::object();
		for (size_t c = 0; c < info_->inputs.size(); c++) {
			payload[info_->inputs[c].key] = ValueToJson(row[c]);
		}
		if (!config_.use_dedup) {
			stats_.cache_misses++;
			units.push_back(Unit {"", row, std::move(payload), {i}});
			continue;
		}
		auto key = DedupCache::Key(info_->ModelName(), hash, payload.dump());
		if (auto hit = cache_.Lookup(key)) {
			stats_.cache_hits++;
			result[i] = hit->values;
			continue;
		}
		// A key already waiting in this chunk is sent once and its answer shared.
		auto it = pending.find(key);
		if (it != pending.end()) {
			stats_.cache_hits++;
			units[it->second].rows.push_back(i);
			continue;
		}
		stats_.cache_misses++;
		pending.emplace(key, units.size());
		units.push_back(Unit {std::move(key), row, std::move(payload), {i}});
	}

	auto outcomes = Dispatch(units);
	size_t failed = 0;
	std::string first_error;
	for (size_t u = 0; u < units.size(); u++) {
		auto &unit = units[u];
		auto &outcome = outcomes[u];
		if (!outcome.record) {
			failed += unit.rows.size();
			if (first_error.empty()) {
				first_error = outcome.error;
			}
			continue;
		}
		if (outcome.record->flagged) {
			stats_.flagged_rows += unit.rows.size();
		}
		for (auto row : unit.rows) {
			result[row] = outcome.record->values;
		}
		if (config_.use_dedup) {
			cache_.Insert(unit.key, std::move(*outcome.record));
		}
	}
	stats_.failed_rows += failed;
	stats_.wall_micros += ElapsedMicros(start);
	if (failed > 0) {
		auto message = "model " + info_->ModelName() + ": " + std::to_string(failed) +
		               " row(s) have no prediction after fallback and retries: " + first_error;
		if (config_.error_policy == ErrorPolicy::Fail) {
			throw ExecutionException(message);
		}
		Warn(message + "; predicted columns are NULL for those rows");
	}
	return result;
}

std::vector<Value> PredictExecutor::PredictGroups(const std::vector<std::vector<Row>> &groups) {
	auto start = std::chrono::steady_clock::now();
	std::vector<Value> result(groups.size());
	std::vector<Unit> units;
	std::unordered_map<std::string, size_t> pending;
	auto hash = info_->prompt.Hash();
	for (size_t g = 0; g < groups.size(); g++) {
		bool any = false;
		for (auto &member : groups[g]) {
			any |= !AllNull(member);
		}
		if (!any) {
			stats_.null_inputs++;
			continue;
		}
		auto tuple = renderer_.GroupTuple(0, groups[g]);
		tuple.erase("row_id");
		auto key = DedupCache::Key(info_->ModelName(), hash, tuple.dump());
		if (config_.use_dedup) {
			if (auto hit = cache_.Lookup(key)) {
				stats_.cache_hits++;
				result[g] = hit->values[0];
				continue;
			}
			auto it = pending.find(key);
			if (it != pending.end()) {
				stats_.cache_hits++;
				units[it->second].rows.push_back(g);
				continue;
			}
			pending.emplace(key, units.size());
		}
		stats_.cache_misses++;
		units.push_back(Unit {std::move(key), Row(), std::move(tuple), {g}});
	}

	std::vector<Outcome> outcomes(units.size());
	RunParallel(static_cast<size_t>(config_.n_threads), units.size(),
	            [&](size_t u) { outcomes[u] = RunSingle(units[u]); });
	size_t failed = 0;
	std::string first_error;
	for (size_t u = 0; u < units.size(); u++) {
		auto &outcome = outcomes[u];
		if (!outcome.record) {
			failed += units[u].rows.size();
			if (first_error.empty()) {
				first_error = outcome.error;
			}
			continue;
		}
		if (outcome.record->flagged) {
			stats_.flagged_rows += units[u].rows.size();
		}
		for (auto g : units[u].rows) {
			result[g] = outcome.record->values[0];
		}
		if (config_.use_dedup) {
			cache_.Insert(units[u].key, std::move(*outcome.record));
		}
	}
	stats_.failed_rows += failed;
	stats_.wall_micros += ElapsedMicros(start);
	if (failed > 0) {
		auto message = "model " + info_->ModelName() + ": " + std::to_string(failed) +
		               " group(s) have no aggregate after retries: " + first_error;
		if (config_.error_policy == ErrorPolicy::Fail) {
			throw ExecutionException(message);
		}
		Warn(message + "; the aggregate is NULL for those groups");
	}
	return result;
}

std::vector<Row> PredictExecutor::Generate() {
	auto start = std::chrono::steady_clock::now();
	bool strict = false;
	size_t attempt = 0;
	std::vector<ParsedRecord> records;
	stats_.calls++;
	while (true) {
		PredictRequest request;
		renderer_.RenderGeneration(request, strict);
		try {
			auto response = Invoke(request);
			if (response.records) {
				for (auto &record : *response.records) {
					records.push_back(ParsedRecord {record, false});
				}
			} else {
				records = ParseGeneratedRows(response.text, renderer_.Outputs());
			}
			break;
		} catch (MalformedOutputException &ex) {
			if (!strict) {
				strict = true;
				stats_.reprompts++;
				stats_.calls++;
				continue;
			}
			if (attempt >= static_cast<size_t>(config_.max_retries)) {
				throw;
			}
		} catch (BackendException &ex) {
			if (!ex.Retryable() || attempt >= static_cast<size_t>(config_.max_retries)) {
				throw;
			}
		}
		attempt++;
		stats_.retries++;
		Backoff(attempt);
	}
	auto cap = static_cast<size_t>(config_.max_generated_rows);
	if (records.size() > cap) {
		Warn("model " + info_->ModelName() + " generated " + std::to_string(records.size()) +
		     " rows; keeping the first " + std::to_string(cap) + " (max_generated_rows)");
		records.resize(cap);
	}
	std::vector<Row> result;
	result.reserve(records.size());
	for (auto &record : records) {
		if (record.flagged) {
			stats_.flagged_rows++;
		}
		result.push_back(std::move(record.values));
	}
	stats_.wall_micros += ElapsedMicros(start);
	return result;
}

} // namespace semaquery
