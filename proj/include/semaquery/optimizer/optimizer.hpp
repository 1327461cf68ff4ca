#pragma once

#include "semaquery/planner/logical_operator.hpp"

#include <memory>
#include <string>
#include <vector>

namespace semaquery {

//! Rule names accepted by `SET optimizer_rules`, in the order the driver tries them.
constexpr const char *kGuardPushdown = "guard_pushdown";
constexpr const char *kPullUpPredict = "pull_up_predict";
constexpr const char *kOrderSelectVsJoin = "order_select_vs_join";
constexpr const char *kMergeSemanticPredicates = "merge_semantic_predicates";
constexpr const char *kOrderSemanticPredicates = "order_semantic_predicates";

const std::vector<std::string> &AllRewriteRules();

struct RewriteEntry {
	std::string rule;
	//! Subtree at the rewrite site before and after. Empty `after` marks a decline.
	std::string before;
	std::string after;
	bool applied = true;
	std::string reason;
};

//! Ordered log of rule applications. Replaying the applied rule names on the original plan reproduces
//! the final plan, because every rule rewrites exactly one deterministic site per application.
struct RewriteTrace {
	std::vector<RewriteEntry> entries;

	std::vector<std::string> AppliedRules() const;
	std::vector<const RewriteEntry *> Declines() const;
	std::string ToString() const;
};

struct OptimizerConfig {
	std::vector<std::string> rules = AllRewriteRules();
	double merge_selectivity_threshold = 0.5;
	size_t max_iterations = 32;

	//! Comma-separated rule names; "all" or "none" (or empty) are accepted. Throws ConfigException on
	//! unknown names.
	static std::vector<std::string> ParseRuleList(const std::string &text);
	bool Enabled(const std::string &rule) const;
};

//! Per-Predict estimates used for ordering decisions.
struct CostAnnotation {
	double input_rows = 0;
	double avg_input_bytes = 0;
	double selectivity = 0.5;
	double quality = 1.0;
};

//! Estimates from the base tables under `predict`. Predicted or derived inputs count as 16 bytes.
CostAnnotation AnnotatePredict(const LogicalPredict &predict);

class Optimizer {
public:
	explicit Optimizer(OptimizerConfig config = OptimizerConfig());

	//! Applies enabled rules to a fixpoint (bounded by max_iterations passes).
	std::unique_ptr<LogicalOperator> Optimize(std::unique_ptr<LogicalOperator> plan, RewriteTrace *trace = nullptr) const;
	//! Applies the named rules once each, in order.
	std::unique_ptr<LogicalOperator> Replay(std::unique_ptr<LogicalOperator> plan,
	                                        const std::vector<std::string> &rules) const;
	//! Applies a single rule at its first matching site. Returns false when nothing matched.
	bool ApplyRule(const std::string &rule, std::unique_ptr<LogicalOperator> &plan, RewriteTrace *trace) const;

private:
	OptimizerConfig config_;
};

//! Classical filter pushdown. With `guard` set, conjuncts over predicted columns stay where they are; without it
//! this is the baseline optimizer that treats inference as free.
std::unique_ptr<LogicalOperator> PushdownFilters(std::unique_ptr<LogicalOperator> plan, bool guard);

namespace rules {
bool GuardPushdown(std::unique_ptr<LogicalOperator> &plan, RewriteTrace *trace, bool guard = true);
bool PullUpPredict(std::unique_ptr<LogicalOperator> &plan, RewriteTrace *trace);
bool OrderSelectVsJoin(std::unique_ptr<LogicalOperator> &plan, RewriteTrace *trace);
bool MergeSemanticPredicates(std::unique_ptr<LogicalOperator> &plan, RewriteTrace *trace, double threshold);
bool OrderSemanticPredicates(std::unique_ptr<LogicalOperator> &plan, RewriteTrace *trace);
} // namespace rules

} // namespace semaquery
