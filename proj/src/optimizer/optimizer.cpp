#include "semaquery/optimizer/optimizer.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <algorithm>

namespace semaquery {

namespace {

constexpr double kUnknownInputBytes = 16;
constexpr size_t kSampleRows = 256;

std::string Indent(const std::string &text, size_t width) {
	std::string result;
	for (auto &line : string_util::Split(text, '\n')) {
		if (!line.empty()) {
			result += std::string(width, ' ') + line + "\n";
		}
	}
	return result;
}

} // namespace

const std::vector<std::string> &AllRewriteRules() {
	static const std::vector<std::string> rules {kGuardPushdown, kPullUpPredict, kOrderSelectVsJoin,
	                                             kMergeSemanticPredicates, kOrderSemanticPredicates};
	return rules;
}

std::vector<std::string> RewriteTrace::AppliedRules() const {
	std::vector<std::string> result;
	for (auto &entry : entries) {
		if (entry.applied) {
			result.push_back(entry.rule);
		}
	}
	return result;
}

std::vector<const RewriteEntry *> RewriteTrace::Declines() const {
	std::vector<const RewriteEntry *> result;
	for (auto &entry : entries) {
		if (!entry.applied) {
			result.push_back(&entry);
		}
	}
	return result;
}

std::string RewriteTrace::ToString() const {
	std::string result;
	size_t step = 0;
	for (auto &entry : entries) {
		if (entry.applied) {
			result += std::to_string(++step) + ". " + entry.rule + "\n";
			result += "   before:\n" + Indent(entry.before, 5);
			result += "   after:\n" + Indent(entry.after, 5);
		} else {
			result += "-  " + entry.rule + " declined: " + entry.reason + "\n" + Indent(entry.before, 5);
		}
	}
	if (result.empty()) {
		result = "(no rewrites)\n";
	}
	return result;
}

std::vector<std::string> OptimizerConfig::ParseRuleList(const std::string &text) {
	std::vector<std::string> result;
	auto trimmed = string_util::Lower(string_util::Trim(text));
	if (trimmed.empty() || trimmed == "none") {
		return result;
	}
	if (trimmed == "all") {
		return AllRewriteRules();
	}
	for (auto &part : string_util::Split(trimmed, ',')) {
		auto name = std::string(string_util::Trim(part));
		if (name.empty()) {
			continue;
		}
		auto &all = AllRewriteRules();
		if (std::find(all.begin(), all.end(), name) == all.end()) {
			throw ConfigException("unknown optimizer rule: " + name + " (known: " + string_util::Join(all, ", ") + ")");
		}
		result.push_back(name);
	}
	return result;
}

bool OptimizerConfig::Enabled(const std::string &rule) const {
	return std::find(rules.begin(), rules.end(), rule) != rules.end();
}

CostAnnotation AnnotatePredict(const LogicalPredict &predict) {
	CostAnnotation result;
	result.selectivity = predict.info->Selectivity();
	result.quality = predict.info->Quality();
	if (predict.children.empty()) {
		return result;
	}
	auto &child = *predict.children[0];
	std::optional<double> rows;
	for (auto &input : predict.info->inputs) {
		const LogicalGet *source = nullptr;
		size_t index = 0;
		VisitPlan(child, [&](const LogicalOperator &op) {
			if (source || op.type != LogicalOperatorType::Get) {
				return;
			}
			auto &get = op.Cast<LogicalGet>();
			for (size_t i = 0; i < get.bindings.size(); i++) {
				if (get.bindings[i].id == input.column && get.table) {
					source = &get;
					index = i;
				}
			}
		});
		if (!source || source->table->RowCount() == 0) {
			result.avg_input_bytes += kUnknownInputBytes;
			continue;
		}
		auto &table = *source->table;
		rows = std::max(rows.value_or(0), static_cast<double>(table.RowCount()));
		double bytes = 0;
		size_t sampled = 0;
		for (auto &chunk : table.Chunks()) {
			for (size_t r = 0; r < chunk.RowCount() && sampled < kSampleRows; r++, sampled++) {
				auto &value = chunk.GetValue(index, r);
				bytes += value.IsNull() ? 0 : static_cast<double>(value.ToString().size());
			}
			if (sampled >= kSampleRows) {
				break;
			}
		}
		result.avg_input_bytes += bytes / static_cast<double>(sampled);
	}
	result.input_rows = rows.value_or(0);
	return result;
}

Optimizer::Optimizer(OptimizerConfig config) : config_(std::move(config)) {
}

bool Optimizer::ApplyRule(const std::string &rule, std::unique_ptr<LogicalOperator> &plan, RewriteTrace *trace) const {
	if (rule == kGuardPushdown) {
		return rules::GuardPushdown(plan, trace);
	}
	if (rule == kPullUpPredict) {
		return rules::PullUpPredict(plan, trace);
	}
	if (rule == kOrderSelectVsJoin) {
		return rules::OrderSelectVsJoin(plan, trace);
	}
	if (rule == kMergeSemanticPredicates) {
		return rules::MergeSemanticPredicates(plan, trace, config_.merge_selectivity_threshold);
	}
	if (rule == kOrderSemanticPredicates) {
		return rules::OrderSemanticPredicates(plan, trace);
	}
	throw ConfigException("unknown optimizer rule: " + rule);
}

std::unique_ptr<LogicalOperator> Optimizer::Optimize(std::unique_ptr<LogicalOperator> plan, RewriteTrace *trace) const {
	for (size_t iteration = 0; iteration < config_.max_iterations; iteration++) {
		bool changed = false;
		for (auto &rule : AllRewriteRules()) {
			if (!config_.Enabled(rule)) {
				continue;
			}
			// Each rule runs to exhaustion before the next; the per-pass budget keeps pathological plans bounded.
			for (size_t applied = 0; applied < 1024 && ApplyRule(rule, plan, trace); applied++) {
				changed = true;
			}
		}
		if (!changed) {
			break;
		}
	}
	return plan;
}

std::unique_ptr<LogicalOperator> Optimizer::Replay(std::unique_ptr<LogicalOperator> plan,
                                                   const std::vector<std::string> &rules) const {
	for (auto &rule : rules) {
		if (!ApplyRule(rule, plan, nullptr)) {
			throw ExecutionException("replay diverged: " + rule + " found no site");
		}
	}
	return plan;
}

std::unique_ptr<LogicalOperator> PushdownFilters(std::unique_ptr<LogicalOperator> plan, bool guard) {
	while (rules::GuardPushdown(plan, nullptr, guard)) {
	}
	return plan;
}

} // namespace semaquery
