#include "semaquery/bench/ablation.hpp"

#include "semaquery/bench/datasets.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

namespace semaquery {

namespace {

std::vector<Row> SortedRows(std::vector<Row> rows) {
	std::sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) {
		return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), Value::SortLess);
	});
	return rows;
}

void Apply(Session &session, const AblationToggles &toggles) {
	session.Set("use_dedup", toggles.dedup);
	session.Set("use_batching", toggles.marshaling);
	session.Set("n_threads", static_cast<int64_t>(toggles.parallelism ? 16 : 1));
	session.Set("optimizer_rules", toggles.pull_up
	                                   ? std::string("all")
	                                   : std::string("guard_pushdown,merge_semantic_predicates,order_semantic_predicates"));
}

} // namespace

std::string AblationToggles::Label() const {
	if (dedup && marshaling && parallelism && pull_up) {
		return "all_on";
	}
	std::string label;
	auto off = [&](bool enabled, const char *name) {
		if (!enabled) {
			label += (label.empty() ? "" : "+") + std::string(name);
		}
	};
	off(dedup, "no_dedup");
	off(marshaling, "no_marshaling");
	off(parallelism, "no_parallelism");
	off(pull_up, "no_pull_up");
	return label;
}

std::vector<AblationToggles> OneAtATimeToggles() {
	std::vector<AblationToggles> result(5);
	result[1].dedup = false;
	result[2].marshaling = false;
	result[3].parallelism = false;
	result[4].pull_up = false;
	return result;
}

bool AblationReport::AllResultsEqual() const {
	return std::all_of(rows.begin(), rows.end(), [](const AblationRow &row) { return row.same_result; });
}

const AblationRow *AblationReport::Find(const std::string &query, const std::string &toggles) const {
	for (auto &row : rows) {
		if (row.query == query && row.toggles == toggles) {
			return &row;
		}
	}
	return nullptr;
}

void AblationReport::WriteCsv(std::ostream &out) const {
	out << "query,toggles,seconds,calls,input_tokens,output_tokens,cache_hits,same_result\n";
	for (auto &row : rows) {
		char seconds[32];
		std::snprintf(seconds, sizeof(seconds), "%.4f", row.seconds);
		out << row.query << "," << row.toggles << "," << seconds << "," << row.stats.calls << ","
		    << row.stats.input_tokens << "," << row.stats.output_tokens << "," << row.stats.cache_hits << ","
		    << (row.same_result ? "true" : "false") << "\n";
	}
}

AblationReport RunOptAblation(Session &session, const std::vector<AblationQuery> &queries,
                              const std::vector<AblationToggles> &toggles) {
	AblationReport report;
	for (auto &query : queries) {
		std::vector<Row> baseline;
		for (size_t t = 0; t < toggles.size(); t++) {
			Apply(session, toggles[t]);
			auto start = std::chrono::steady_clock::now();
			auto result = session.Execute(query.sql);
			AblationRow row;
			row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
			row.query = query.name;
			row.toggles = toggles[t].Label();
			row.stats = result.stats;
			auto sorted = SortedRows(std::move(result.rows));
			if (t == 0) {
				baseline = std::move(sorted);
			} else {
				row.same_result = sorted == baseline;
			}
			report.rows.push_back(std::move(row));
		}
	}
	return report;
}

std::vector<AblationQuery> PrepareAblationFixture(Session &session, double milliseconds_per_call) {
	auto &tables = session.GetDatabase().Tables();
	CreateReviewDataset(tables);
	CreateDuplicateDataset(tables, "Items", 1000, 50);
	if (!session.GetDatabase().Models().TryLookup("bench")) {
		session.Execute("CREATE LLM MODEL bench PATH 'bench' ON PROMPT");
	}
	ordered_json header = {
	    {"version", 1},
	    {"latency", {{"base_ms", milliseconds_per_call}, {"per_row_ms", milliseconds_per_call / 10.0}}}};
	std::string fixture = header.dump() + "\n";
	fixture += R"({"when_contains": {"review": "awful"}, "output": {"negative": true}})" "\n";
	fixture += R"({"default": true, "output": {"negative": false, "topic": "general"}})" "\n";
	session.SetFixture(MockFixture::Parse(fixture));
	return {
	    {"pull_up", "SELECT r.review FROM Movie AS m JOIN Review AS r ON m.movie_id = r.movie_id "
	                "WHERE LLM bench (PROMPT 'is the sentiment of the {{r.review}} {negative BOOLEAN}?') "
	                "AND m.title = 'Titanic'"},
	    {"duplicates", "SELECT text, LLM bench (PROMPT 'what {topic VARCHAR} is {{text}} about') FROM Items"},
	};
}

} // namespace semaquery
