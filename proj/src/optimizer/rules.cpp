#include "semaquery/common/string_util.hpp"
#include "semaquery/optimizer/optimizer.hpp"

#include <functional>
#include <tuple>

namespace semaquery {
namespace rules {

namespace {

using Slot = std::unique_ptr<LogicalOperator>;

//! Pre-order over child slots. The callback gets the slot and its parent (null at the root); returning true stops.
bool VisitSlots(Slot &slot, LogicalOperator *parent, const std::function<bool(Slot &, LogicalOperator *)> &callback) {
	if (callback(slot, parent)) {
		return true;
	}
	auto *node = slot.get();
	for (auto &child : node->children) {
		if (VisitSlots(child, node, callback)) {
			return true;
		}
	}
	return false;
}

std::set<ColumnId> PredictedIds(const LogicalOperator &plan) {
	std::set<ColumnId> result;
	VisitPlan(plan, [&](const LogicalOperator &op) {
		if (op.type == LogicalOperatorType::Predict) {
			for (auto &output : op.Cast<LogicalPredict>().info->outputs) {
				result.insert(output.id);
			}
		}
	});
	return result;
}

bool ReferencesAny(const BoundExpression &expression, const std::set<ColumnId> &ids) {
	for (auto id : expression.Columns()) {
		if (ids.count(id)) {
			return true;
		}
	}
	return false;
}

std::set<ColumnId> OutputIds(const PredictInfo &info) {
	std::set<ColumnId> result;
	for (auto &output : info.outputs) {
		result.insert(output.id);
	}
	return result;
}

void Record(RewriteTrace *trace, const char *rule, std::string before, const Slot &after) {
	if (trace) {
		trace->entries.push_back({rule, std::move(before), ExplainPlan(*after), true, ""});
	}
}

void RecordDecline(RewriteTrace *trace, const char *rule, const LogicalOperator &site, std::string reason) {
	if (!trace) {
		return;
	}
	auto before = ExplainPlan(site);
	for (auto &entry : trace->entries) {
		if (!entry.applied && entry.rule == rule && entry.before == before && entry.reason == reason) {
			return;
		}
	}
	trace->entries.push_back({rule, std::move(before), "", false, std::move(reason)});
}

//! A semantic selection: Filter directly over a row-preserving Predict whose output it reads.
LogicalPredict *AsSemanticPair(LogicalOperator &node) {
	if (node.type != LogicalOperatorType::Filter || node.children[0]->type != LogicalOperatorType::Predict) {
		return nullptr;
	}
	auto &predict = node.children[0]->Cast<LogicalPredict>();
	auto mode = predict.info->mode;
	if (mode != PredictMode::Scalar && mode != PredictMode::TableInference) {
		return nullptr;
	}
	auto outputs = OutputIds(*predict.info);
	for (auto &condition : node.Cast<LogicalFilter>().conditions) {
		if (ReferencesAny(condition, outputs)) {
			return &predict;
		}
	}
	return nullptr;
}

bool HasFilteringOperator(const LogicalOperator &plan) {
	bool found = false;
	VisitPlan(plan, [&](const LogicalOperator &op) {
		found |= op.type == LogicalOperatorType::Filter || op.type == LogicalOperatorType::Limit;
	});
	return found;
}

struct BaseColumn {
	std::shared_ptr<const Table> table;
	std::string column;
};

std::optional<BaseColumn> ResolveBaseColumn(const LogicalOperator &plan, ColumnId id) {
	std::optional<BaseColumn> result;
	VisitPlan(plan, [&](const LogicalOperator &op) {
		if (result || op.type != LogicalOperatorType::Get) {
			return;
		}
		auto &get = op.Cast<LogicalGet>();
		for (auto &binding : get.bindings) {
			if (binding.id == id && get.table) {
				result = BaseColumn {get.table, get.table->Schema()[&binding - get.bindings.data()].name};
			}
		}
	});
	return result;
}

} // namespace

// ---------------------------------------------------------------------------------------------------------------
// guard_pushdown
// ---------------------------------------------------------------------------------------------------------------

namespace {

struct Destination {
	Slot *slot = nullptr;
	LogicalFilter *merge_into = nullptr;
	LogicalJoin *join = nullptr;
};

//! Where a conjunct over `columns` ends up when pushed from directly above `start`. Returns nothing when it
//! cannot move past anything but other filters.
std::optional<Destination> FindDestination(Slot &start, const std::set<ColumnId> &columns) {
	Slot *current = &start;
	LogicalFilter *last_filter = nullptr;
	bool moved = false;
	while (true) {
		auto &node = **current;
		Slot *next = nullptr;
		switch (node.type) {
		case LogicalOperatorType::Filter:
			last_filter = &node.Cast<LogicalFilter>();
			current = &node.children[0];
			continue;
		case LogicalOperatorType::Join: {
			auto &join = node.Cast<LogicalJoin>();
			for (auto &child : node.children) {
				if (child->ProducesAll(columns)) {
					next = &child;
					break;
				}
			}
			if (!next) {
				return Destination {nullptr, nullptr, &join};
			}
			break;
		}
		case LogicalOperatorType::Project: {
			auto &project = node.Cast<LogicalProject>();
			if (project.IsPassThrough() && !project.is_root && node.children[0]->ProducesAll(columns)) {
				next = &node.children[0];
			}
			break;
		}
		case LogicalOperatorType::Predict: {
			auto &predict = node.Cast<LogicalPredict>();
			if (!node.children.empty() && node.children[0]->ProducesAll(columns) &&
			    predict.info->mode != PredictMode::Aggregate) {
				next = &node.children[0];
			}
			break;
		}
		default:
			break;
		}
		if (!next) {
			break;
		}
		moved = true;
		last_filter = nullptr;
		current = next;
	}
	if (!moved) {
		return std::nullopt;
	}
	return Destination {current, last_filter, nullptr};
}

} // namespace

bool GuardPushdown(Slot &plan, RewriteTrace *trace, bool guard) {
	auto predicted = PredictedIds(*plan);
	return VisitSlots(plan, nullptr, [&](Slot &slot, LogicalOperator *) {
		if (slot->type != LogicalOperatorType::Filter) {
			return false;
		}
		auto &filter = slot->Cast<LogicalFilter>();
		for (size_t i = 0; i < filter.conditions.size(); i++) {
			auto &condition = filter.conditions[i];
			if (guard && ReferencesAny(condition, predicted)) {
				continue;
			}
			auto columns = condition.Columns();
			auto destination = FindDestination(filter.children[0], columns);
			if (!destination) {
				continue;
			}
			auto before = trace ? ExplainPlan(*slot) : std::string();
			auto moved = std::move(filter.conditions[i]);
			filter.conditions.erase(filter.conditions.begin() + static_cast<std::ptrdiff_t>(i));
			if (destination->join) {
				destination->join->conditions.push_back(std::move(moved));
				destination->join->join_type = LogicalJoinType::Inner;
			} else if (destination->merge_into) {
				destination->merge_into->conditions.push_back(std::move(moved));
			} else {
				auto inserted = std::make_unique<LogicalFilter>(std::vector<BoundExpression> {std::move(moved)});
				inserted->children.push_back(std::move(*destination->slot));
				*destination->slot = std::move(inserted);
			}
			if (filter.conditions.empty()) {
				slot = std::move(filter.children[0]);
			}
			Record(trace, kGuardPushdown, std::move(before), slot);
			return true;
		}
		return false;
	});
}

// ---------------------------------------------------------------------------------------------------------------
// pull_up_predict
// ---------------------------------------------------------------------------------------------------------------

bool PullUpPredict(Slot &plan, RewriteTrace *trace) {
	return VisitSlots(plan, nullptr, [&](Slot &slot, LogicalOperator *) {
		auto &parent = *slot;
		for (size_t k = 0; k < parent.children.size(); k++) {
			auto &pair = *parent.children[k];
			auto predict = AsSemanticPair(pair);
			if (!predict || predict->pinned) {
				continue;
			}
			auto outputs = OutputIds(*predict->info);
			auto &filter = pair.Cast<LogicalFilter>();
			switch (parent.type) {
			case LogicalOperatorType::Filter:
				for (auto &condition : parent.Cast<LogicalFilter>().conditions) {
					if (ReferencesAny(condition, outputs)) {
						return false;
					}
				}
				break;
			case LogicalOperatorType::Join:
				for (auto &condition : parent.Cast<LogicalJoin>().conditions) {
					if (ReferencesAny(condition, outputs)) {
						return false;
					}
				}
				break;
			case LogicalOperatorType::Project: {
				auto &project = parent.Cast<LogicalProject>();
				if (project.is_root || !project.IsPassThrough()) {
					return false;
				}
				std::set<ColumnId> needed = predict->info->InputColumns();
				for (auto &condition : filter.conditions) {
					for (auto id : condition.Columns()) {
						if (!outputs.count(id)) {
							needed.insert(id);
						}
					}
				}
				std::set<ColumnId> kept;
				for (auto &binding : project.bindings) {
					kept.insert(binding.id);
				}
				for (auto id : needed) {
					if (!kept.count(id)) {
						RecordDecline(trace, kPullUpPredict, parent,
						              "projection drops input column of " + predict->info->ModelName());
						return false;
					}
				}
				break;
			}
			default:
				return false;
			}

			auto before = trace ? ExplainPlan(parent) : std::string();
			if (parent.type == LogicalOperatorType::Project) {
				auto &project = parent.Cast<LogicalProject>();
				for (size_t i = project.bindings.size(); i-- > 0;) {
					if (outputs.count(project.bindings[i].id)) {
						project.bindings.erase(project.bindings.begin() + static_cast<std::ptrdiff_t>(i));
						project.expressions.erase(project.expressions.begin() + static_cast<std::ptrdiff_t>(i));
					}
				}
			}
			auto parent_owned = std::move(slot);
			auto filter_owned = std::move(parent_owned->children[k]);
			auto predict_owned = std::move(filter_owned->children[0]);
			parent_owned->children[k] = std::move(predict_owned->children[0]);
			predict_owned->children[0] = std::move(parent_owned);
			filter_owned->children[0] = std::move(predict_owned);
			slot = std::move(filter_owned);
			Record(trace, kPullUpPredict, std::move(before), slot);
			return true;
		}
		return false;
	});
}

// ---------------------------------------------------------------------------------------------------------------
// order_select_vs_join
// ---------------------------------------------------------------------------------------------------------------

bool OrderSelectVsJoin(Slot &plan, RewriteTrace *trace) {
	return VisitSlots(plan, nullptr, [&](Slot &slot, LogicalOperator *) {
		auto predict = AsSemanticPair(*slot);
		if (!predict || predict->pinned || predict->children[0]->type != LogicalOperatorType::Join) {
			return false;
		}
		auto &join = predict->children[0]->Cast<LogicalJoin>();
		if (join.join_type != LogicalJoinType::Inner) {
			return false;
		}
		auto inputs = predict->info->InputColumns();
		size_t side;
		if (join.children[0]->ProducesAll(inputs)) {
			side = 0;
		} else if (join.children[1]->ProducesAll(inputs)) {
			side = 1;
		} else {
			return false;
		}
		auto &select_side = *join.children[side];
		auto &other_side = *join.children[1 - side];

		bool foreign_key_side = false;
		for (auto &condition : join.conditions) {
			if (condition.type != BoundExpressionType::Binary || condition.op != "=" ||
			    condition.children[0].type != BoundExpressionType::ColumnRef ||
			    condition.children[1].type != BoundExpressionType::ColumnRef) {
				continue;
			}
			auto a = condition.children[0].column;
			auto b = condition.children[1].column;
			if (!select_side.ProducesAll({a})) {
				std::swap(a, b);
			}
			auto mine = ResolveBaseColumn(select_side, a);
			auto theirs = ResolveBaseColumn(other_side, b);
			if (!mine || !theirs) {
				continue;
			}
			for (auto &fk : mine->table->Keys().foreign_keys) {
				if (string_util::EqualsIgnoreCase(fk.column, mine->column) &&
				    string_util::EqualsIgnoreCase(fk.referenced_table, theirs->table->Name()) &&
				    string_util::EqualsIgnoreCase(fk.referenced_column, theirs->column)) {
					foreign_key_side = true;
				}
			}
		}
		// Primary-key side, many-to-many, or no keys: keep above and let dedup absorb repeats. A filtered
		// primary-key side drops foreign-key rows in the join, so staying above saves calls there too.
		if (!foreign_key_side || HasFilteringOperator(other_side)) {
			return false;
		}
		auto before = trace ? ExplainPlan(*slot) : std::string();
		auto filter_owned = std::move(slot);
		auto predict_owned = std::move(filter_owned->children[0]);
		auto join_owned = std::move(predict_owned->children[0]);
		predict_owned->children[0] = std::move(join_owned->children[side]);
		predict_owned->Cast<LogicalPredict>().pinned = true;
		filter_owned->children[0] = std::move(predict_owned);
		join_owned->children[side] = std::move(filter_owned);
		slot = std::move(join_owned);
		Record(trace, kOrderSelectVsJoin, std::move(before), slot);
		return true;
	});
}

// ---------------------------------------------------------------------------------------------------------------
// merge_semantic_predicates
// ---------------------------------------------------------------------------------------------------------------

namespace {

bool Mergeable(const PredictInfo &info) {
	return !info.IsTabular() && (info.mode == PredictMode::Scalar || info.mode == PredictMode::TableInference);
}

bool ConsumedByFilter(const LogicalOperator *filter, const PredictInfo &info) {
	if (!filter || filter->type != LogicalOperatorType::Filter) {
		return false;
	}
	auto outputs = OutputIds(info);
	for (auto &condition : filter->Cast<LogicalFilter>().conditions) {
		if (ReferencesAny(condition, outputs)) {
			return true;
		}
	}
	return false;
}

std::shared_ptr<PredictInfo> MergeInfos(const PredictInfo &lower, const PredictInfo &upper) {
	auto merged = std::make_shared<PredictInfo>(lower);
	merged->prompt = PromptTemplate::Parse("Task 1: " + lower.prompt.Raw() + "; Task 2: " + upper.prompt.Raw());
	merged->inputs.clear();
	for (auto &input : merged->prompt.Inputs()) {
		auto key = input.Key();
		const PredictInput *source = nullptr;
		for (auto *info : {&lower, &upper}) {
			for (auto &candidate : info->inputs) {
				if (!source && candidate.key == key) {
					source = &candidate;
				}
			}
		}
		merged->inputs.push_back(*source);
	}
	merged->outputs.insert(merged->outputs.end(), upper.outputs.begin(), upper.outputs.end());
	for (auto &[key, value] : upper.hints) {
		if (!merged->hints.Contains(key)) {
			merged->hints.Insert(key, value);
		}
	}
	merged->mode = PredictMode::TableInference;
	merged->implicit_output = lower.implicit_output || upper.implicit_output;
	return merged;
}

} // namespace

bool MergeSemanticPredicates(Slot &plan, RewriteTrace *trace, double threshold) {
	return VisitSlots(plan, nullptr, [&](Slot &slot, LogicalOperator *parent) {
		if (slot->type != LogicalOperatorType::Predict) {
			return false;
		}
		auto &upper = slot->Cast<LogicalPredict>();
		if (!Mergeable(*upper.info) || upper.pinned) {
			return false;
		}
		LogicalOperator *below = upper.children[0].get();
		LogicalOperator *last_filter = nullptr;
		while (below->type == LogicalOperatorType::Filter) {
			last_filter = below;
			below = below->children[0].get();
		}
		if (below->type != LogicalOperatorType::Predict) {
			return false;
		}
		auto &lower = below->Cast<LogicalPredict>();
		if (!Mergeable(*lower.info) || lower.pinned ||
		    !string_util::EqualsIgnoreCase(lower.info->ModelName(), upper.info->ModelName()) ||
		    lower.info->InputColumns() != upper.info->InputColumns()) {
			return false;
		}
		for (auto &a : lower.info->outputs) {
			for (auto &b : upper.info->outputs) {
				if (string_util::EqualsIgnoreCase(a.name, b.name)) {
					return false;
				}
			}
		}
		bool upper_select = ConsumedByFilter(parent, *upper.info);
		bool lower_select = ConsumedByFilter(last_filter, *lower.info);
		if ((upper_select && upper.info->Selectivity() < threshold) ||
		    (lower_select && lower.info->Selectivity() < threshold)) {
			RecordDecline(trace, kMergeSemanticPredicates, *slot,
			              "semantic selection below selectivity threshold " + FormatDouble(threshold));
			return false;
		}
		auto before = trace ? ExplainPlan(*slot) : std::string();
		lower.info = MergeInfos(*lower.info, *upper.info);
		slot = std::move(upper.children[0]);
		Record(trace, kMergeSemanticPredicates, std::move(before), slot);
		return true;
	});
}

// ---------------------------------------------------------------------------------------------------------------
// order_semantic_predicates
// ---------------------------------------------------------------------------------------------------------------

bool OrderSemanticPredicates(Slot &plan, RewriteTrace *trace) {
	return VisitSlots(plan, nullptr, [&](Slot &slot, LogicalOperator *) {
		auto upper = AsSemanticPair(*slot);
		if (!upper || upper->info->mode != PredictMode::Scalar) {
			return false;
		}
		auto &lower_filter = *upper->children[0];
		auto lower = AsSemanticPair(lower_filter);
		if (!lower || lower->info->mode != PredictMode::Scalar) {
			return false;
		}
		auto lower_outputs = OutputIds(*lower->info);
		for (auto id : upper->info->InputColumns()) {
			if (lower_outputs.count(id)) {
				return false;
			}
		}
		for (auto &condition : slot->Cast<LogicalFilter>().conditions) {
			if (ReferencesAny(condition, lower_outputs)) {
				return false;
			}
		}
		auto a = AnnotatePredict(*upper);
		auto b = AnnotatePredict(*lower);
		auto key = [](const CostAnnotation &c) { return std::make_tuple(c.avg_input_bytes, c.selectivity, -c.quality); };
		if (!(key(a) < key(b))) {
			return false;
		}
		auto before = trace ? ExplainPlan(*slot) : std::string();
		auto upper_filter = std::move(slot);
		auto upper_predict = std::move(upper_filter->children[0]);
		auto lower_filter_owned = std::move(upper_predict->children[0]);
		auto lower_predict = std::move(lower_filter_owned->children[0]);
		upper_predict->children[0] = std::move(lower_predict->children[0]);
		upper_filter->children[0] = std::move(upper_predict);
		lower_predict->children[0] = std::move(upper_filter);
		lower_filter_owned->children[0] = std::move(lower_predict);
		slot = std::move(lower_filter_owned);
		Record(trace, kOrderSemanticPredicates, std::move(before), slot);
		return true;
	});
}

} // namespace rules
} // namespace semaquery
