#pragma once

#include "semaquery/main/database.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace semaquery {

//! Which intra-operator optimizations are enabled for one ablation run.
struct AblationToggles {
	bool dedup = true;
	bool marshaling = true;
	bool parallelism = true;
	//! Off disables pull_up_predict and order_select_vs_join; the other rules stay on.
	bool pull_up = true;

	std::string Label() const;
};

//! All on, then each optimization switched off alone.
std::vector<AblationToggles> OneAtATimeToggles();

struct AblationQuery {
	std::string name;
	std::string sql;
};

struct AblationRow {
	std::string query;
	std::string toggles;
	double seconds = 0;
	CallStatsSnapshot stats;
	//! Result multiset equals the first configuration's.
	bool same_result = true;
};

struct AblationReport {
	std::vector<AblationRow> rows;

	bool AllResultsEqual() const;
	const AblationRow *Find(const std::string &query, const std::string &toggles) const;
	//! Columns: query,toggles,seconds,calls,input_tokens,output_tokens,cache_hits,same_result.
	void WriteCsv(std::ostream &out) const;
};

//! Runs every query under every toggle set on `session` and compares results. Session settings touched by the
//! toggles are overwritten.
AblationReport RunOptAblation(Session &session, const std::vector<AblationQuery> &queries,
                              const std::vector<AblationToggles> &toggles);

//! Review dataset, duplicate-heavy Items table, the `bench` model and a fixture with per-call latency
//! (`milliseconds_per_call` base plus a tenth of it per row). Returns the default ablation queries.
std::vector<AblationQuery> PrepareAblationFixture(Session &session, double milliseconds_per_call = 2.0);

} // namespace semaquery
