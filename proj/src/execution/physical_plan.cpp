#include "semaquery/common/exception.hpp"
#include "semaquery/execution/expression_executor.hpp"
#include "semaquery/execution/physical_operator.hpp"
#include "semaquery/predict/predict_executor.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

namespace semaquery {

namespace {

struct RowHash {
	size_t operator()(const Row &row) const {
		size_t h = 0x9e3779b97f4a7c15ULL;
		for (auto &value : row) {
			h ^= value.Hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
		}
		return h;
	}
};

void AppendRows(DataChunk &target, const DataChunk &source) {
	for (size_t r = 0; r < source.RowCount(); r++) {
		target.AppendRow(source.GetRow(r));
	}
}

std::vector<BoundExpression> ResolveAll(const std::vector<BoundExpression> &expressions, const ColumnLayout &layout) {
	std::vector<BoundExpression> result;
	for (auto &expression : expressions) {
		result.push_back(ResolveExpression(expression, layout));
	}
	return result;
}

std::vector<size_t> InputIndexes(const PredictInfo &info, const ColumnLayout &layout) {
	std::vector<size_t> result;
	for (auto &input : info.inputs) {
		auto it = layout.find(input.column);
		if (it == layout.end()) {
			throw ExecutionException("prompt input {{" + input.key + "}} is not produced below the predict operator");
		}
		result.push_back(it->second);
	}
	return result;
}

std::unique_ptr<PredictExecutor> MakeExecutor(ExecutionContext &context, std::shared_ptr<const PredictInfo> info,
                                              CallStats &stats) {
	// Clause OPTIONS refine the model's own options for this call site.
	auto options = info->model->options;
	for (auto &[key, value] : info->hints) {
		options.Set(key, value);
	}
	auto config = PredictConfig::Resolve(options, context.settings);
	if (!context.predictor_factory) {
		throw ConfigException("no predictor backend configured");
	}
	auto predictor = context.predictor_factory(*info->model, config);
	auto limiter = context.Limiter(*info->model, config);
	return std::make_unique<PredictExecutor>(std::move(info), std::move(config), std::move(predictor),
	                                         std::move(limiter), stats,
	                                         [&context](const std::string &message) { context.Warn(message); });
}

std::string ExpressionList(const std::vector<BoundExpression> &expressions) {
	std::string result;
	for (size_t i = 0; i < expressions.size(); i++) {
		result += (i ? ", " : "") + expressions[i].ToString();
	}
	return result;
}

// ---------------------------------------------------------------------------------------------------------------

class PhysicalScan : public PhysicalOperator {
public:
	PhysicalScan(std::shared_ptr<const Table> table, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)), table_(std::move(table)) {
	}

	std::string Name() const override {
		return "SCAN";
	}
	std::string Detail() const override {
		return table_ ? table_->Name() : "(single row)";
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		if (!table_) {
			if (done_) {
				return false;
			}
			done_ = true;
			out = DataChunk(OutputSchema());
			out.AppendRow({});
			return true;
		}
		if (!scanner_) {
			scanner_ = std::make_unique<TableScanner>(table_, context.chunk_capacity);
		}
		return scanner_->Next(out);
	}

private:
	std::shared_ptr<const Table> table_;
	std::unique_ptr<TableScanner> scanner_;
	bool done_ = false;
};

class PhysicalFilter : public PhysicalOperator {
public:
	PhysicalFilter(std::vector<BoundExpression> conditions, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)), conditions_(std::move(conditions)) {
	}

	std::string Name() const override {
		return "FILTER";
	}
	std::string Detail() const override {
		return ExpressionList(conditions_);
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		DataChunk chunk;
		while (children[0]->Next(context, chunk)) {
			auto rows = SelectRows(conditions_, chunk);
			if (rows.empty()) {
				continue;
			}
			out = rows.size() == chunk.RowCount() ? std::move(chunk) : chunk.Select(rows);
			return true;
		}
		return false;
	}

private:
	std::vector<BoundExpression> conditions_;
};

class PhysicalProject : public PhysicalOperator {
public:
	PhysicalProject(std::vector<BoundExpression> expressions, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)), expressions_(std::move(expressions)) {
	}

	std::string Name() const override {
		return "PROJECT";
	}
	std::string Detail() const override {
		return ExpressionList(expressions_);
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		DataChunk chunk;
		if (!children[0]->Next(context, chunk)) {
			return false;
		}
		auto schema = OutputSchema();
		out = DataChunk();
		for (size_t e = 0; e < expressions_.size(); e++) {
			Vector values;
			values.reserve(chunk.RowCount());
			for (size_t r = 0; r < chunk.RowCount(); r++) {
				values.push_back(EvaluateExpression(expressions_[e], chunk, r));
			}
			out.AddColumn(schema[e], std::move(values));
		}
		return true;
	}

private:
	std::vector<BoundExpression> expressions_;
};

//! Inner/cross join. Equality conjuncts between the two sides drive a hash table on the right input; any other
//! conjuncts are checked on the combined row. Output order is left-major, then right input order.
class PhysicalJoin : public PhysicalOperator {
public:
	PhysicalJoin(const LogicalJoin &join, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)) {
		auto left_columns = join.children[0]->Columns();
		auto right_columns = join.children[1]->Columns();
		left_width_ = left_columns.size();
		auto left_layout = MakeLayout(left_columns);
		auto right_layout = MakeLayout(right_columns);
		auto combined = MakeLayout(this->columns);
		auto within = [](const BoundExpression &expression, const ColumnLayout &layout) {
			auto used = expression.Columns();
			if (used.empty()) {
				return false;
			}
			for (auto id : used) {
				if (!layout.count(id)) {
					return false;
				}
			}
			return true;
		};
		for (auto &condition : join.conditions) {
			if (condition.type == BoundExpressionType::Binary && condition.op == "=") {
				auto &a = condition.children[0];
				auto &b = condition.children[1];
				const BoundExpression *left = nullptr;
				const BoundExpression *right = nullptr;
				if (within(a, left_layout) && within(b, right_layout)) {
					left = &a;
					right = &b;
				} else if (within(b, left_layout) && within(a, right_layout)) {
					left = &b;
					right = &a;
				}
				if (left) {
					left_keys_.push_back(ResolveExpression(*left, left_layout));
					right_keys_.push_back(ResolveExpression(*right, right_layout));
					widen_.push_back(left->return_type != right->return_type && IsNumeric(left->return_type) &&
					                 IsNumeric(right->return_type));
					continue;
				}
			}
			residual_.push_back(ResolveExpression(condition, combined));
		}
	}

	std::string Name() const override {
		return left_keys_.empty() ? "NESTED_LOOP_JOIN" : "HASH_JOIN";
	}
	std::string Detail() const override {
		std::vector<BoundExpression> all;
		for (size_t k = 0; k < left_keys_.size(); k++) {
			all.push_back(BoundExpression::Binary("=", left_keys_[k], right_keys_[k], LogicalType::Boolean));
		}
		all.insert(all.end(), residual_.begin(), residual_.end());
		return ExpressionList(all);
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		if (!built_) {
			Build(context);
		}
		while (true) {
			DataChunk candidate(OutputSchema());
			bool exhausted = false;
			while (candidate.RowCount() < context.chunk_capacity) {
				if (!left_valid_ || left_row_ >= left_chunk_.RowCount()) {
					if (!children[0]->Next(context, left_chunk_)) {
						exhausted = true;
						break;
					}
					left_valid_ = true;
					left_row_ = 0;
					matches_ready_ = false;
				}
				if (!matches_ready_) {
					FindMatches();
				}
				if (match_pos_ < matches_->size()) {
					auto row = left_chunk_.GetRow(left_row_);
					while (match_pos_ < matches_->size() && candidate.RowCount() < context.chunk_capacity) {
						auto combined = row;
						auto &right = right_rows_[(*matches_)[match_pos_++]];
						combined.insert(combined.end(), right.begin(), right.end());
						candidate.AppendRow(combined);
					}
				}
				if (match_pos_ >= matches_->size()) {
					left_row_++;
					matches_ready_ = false;
				}
			}
			if (!residual_.empty() && !candidate.Empty()) {
				auto rows = SelectRows(residual_, candidate);
				candidate = rows.size() == candidate.RowCount() ? std::move(candidate) : candidate.Select(rows);
			}
			if (!candidate.Empty()) {
				out = std::move(candidate);
				return true;
			}
			if (exhausted) {
				return false;
			}
		}
	}

private:
	std::optional<Row> Key(const std::vector<BoundExpression> &keys, const DataChunk &chunk, size_t row) const {
		Row key;
		for (size_t k = 0; k < keys.size(); k++) {
			auto value = EvaluateExpression(keys[k], chunk, row);
			if (value.IsNull()) {
				return std::nullopt;
			}
			if (widen_[k] && value.Type() == LogicalType::Integer) {
				value = Value::Double(static_cast<double>(value.GetInteger()));
			}
			key.push_back(std::move(value));
		}
		return key;
	}

	void Build(ExecutionContext &context) {
		built_ = true;
		DataChunk chunk;
		while (children[1]->Next(context, chunk)) {
			for (size_t r = 0; r < chunk.RowCount(); r++) {
				if (!left_keys_.empty()) {
					if (auto key = Key(right_keys_, chunk, r)) {
						table_[*key].push_back(right_rows_.size());
					}
				}
				right_rows_.push_back(chunk.GetRow(r));
			}
		}
		all_.resize(right_rows_.size());
		for (size_t i = 0; i < all_.size(); i++) {
			all_[i] = i;
		}
	}

	void FindMatches() {
		matches_ready_ = true;
		match_pos_ = 0;
		if (left_keys_.empty()) {
			matches_ = &all_;
			return;
		}
		matches_ = &none_;
		if (auto key = Key(left_keys_, left_chunk_, left_row_)) {
			auto it = table_.find(*key);
			if (it != table_.end()) {
				matches_ = &it->second;
			}
		}
	}

	size_t left_width_ = 0;
	std::vector<BoundExpression> left_keys_;
	std::vector<BoundExpression> right_keys_;
	std::vector<bool> widen_;
	std::vector<BoundExpression> residual_;

	bool built_ = false;
	std::vector<Row> right_rows_;
	std::unordered_map<Row, std::vector<size_t>, RowHash> table_;
	std::vector<size_t> all_;
	const std::vector<size_t> none_;

	DataChunk left_chunk_;
	bool left_valid_ = false;
	size_t left_row_ = 0;
	bool matches_ready_ = false;
	const std::vector<size_t> *matches_ = nullptr;
	size_t match_pos_ = 0;
};

//! Hash aggregation. Groups are emitted in first-seen order; without GROUP BY exactly one row is produced.
class PhysicalAggregate : public PhysicalOperator {
public:
	PhysicalAggregate(const LogicalAggregate &aggregate, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)) {
		auto layout = MakeLayout(aggregate.children[0]->Columns());
		groups_ = ResolveAll(aggregate.groups, layout);
		for (auto &bound : aggregate.aggregates) {
			Spec spec;
			spec.function = bound.function;
			spec.distinct = bound.distinct;
			spec.return_type = bound.return_type;
			spec.arguments = ResolveAll(bound.arguments, layout);
			if (bound.predict) {
				spec.predict = bound.predict;
				spec.inputs = InputIndexes(*bound.predict, layout);
			}
			specs_.push_back(std::move(spec));
		}
	}

	std::string Name() const override {
		return "AGGREGATE";
	}
	std::string Detail() const override {
		return "groups=[" + ExpressionList(groups_) + "]";
	}
	const CallStats *Stats() const override {
		for (auto &spec : specs_) {
			if (spec.predict) {
				return &stats_;
			}
		}
		return nullptr;
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		if (!computed_) {
			Compute(context);
		}
		if (emitted_ >= result_.size()) {
			return false;
		}
		out = DataChunk(OutputSchema());
		while (emitted_ < result_.size() && out.RowCount() < context.chunk_capacity) {
			out.AppendRow(result_[emitted_++]);
		}
		return true;
	}

private:
	struct Spec {
		AggregateFunction function;
		bool distinct = false;
		LogicalType return_type;
		std::vector<BoundExpression> arguments;
		std::shared_ptr<PredictInfo> predict;
		std::vector<size_t> inputs;
	};
	struct State {
		int64_t count = 0;
		int64_t integer_sum = 0;
		double double_sum = 0;
		Value extreme;
		std::unordered_set<Value, ValueHash> seen;
		std::vector<Row> members;
	};

	void Update(const Spec &spec, State &state, const DataChunk &chunk, size_t row) {
		if (spec.function == AggregateFunction::CountStar) {
			state.count++;
			return;
		}
		if (spec.function == AggregateFunction::Semantic) {
			Row member;
			for (auto index : spec.inputs) {
				member.push_back(chunk.GetValue(index, row));
			}
			state.members.push_back(std::move(member));
			return;
		}
		auto value = EvaluateExpression(spec.arguments[0], chunk, row);
		if (value.IsNull()) {
			return;
		}
		if (spec.distinct && !state.seen.insert(value).second) {
			return;
		}
		state.count++;
		switch (spec.function) {
		case AggregateFunction::Sum:
		case AggregateFunction::Avg:
			if (value.Type() == LogicalType::Integer && spec.return_type == LogicalType::Integer) {
				if (__builtin_add_overflow(state.integer_sum, value.GetInteger(), &state.integer_sum)) {
					throw ExecutionException("integer overflow in sum()");
				}
			} else {
				state.double_sum += value.GetNumeric();
			}
			break;
		case AggregateFunction::Min:
		case AggregateFunction::Max: {
			if (state.extreme.IsNull()) {
				state.extreme = value;
				break;
			}
			auto order = Value::Compare(value, state.extreme);
			if (order && ((spec.function == AggregateFunction::Min && *order < 0) ||
			              (spec.function == AggregateFunction::Max && *order > 0))) {
				state.extreme = value;
			}
			break;
		}
		default:
			break;
		}
	}

	Value Finalize(const Spec &spec, const State &state) const {
		switch (spec.function) {
		case AggregateFunction::CountStar:
		case AggregateFunction::Count:
			return Value::Integer(state.count);
		case AggregateFunction::Sum:
			if (state.count == 0) {
				return Value::Null();
			}
			return spec.return_type == LogicalType::Integer ? Value::Integer(state.integer_sum)
			                                                : Value::Double(state.double_sum);
		case AggregateFunction::Avg:
			if (state.count == 0) {
				return Value::Null();
			}
			return Value::Double((static_cast<double>(state.integer_sum) + state.double_sum) /
			                     static_cast<double>(state.count));
		case AggregateFunction::Min:
		case AggregateFunction::Max:
			return state.extreme;
		case AggregateFunction::Semantic:
			return Value::Null();
		}
		return Value::Null();
	}

	void Compute(ExecutionContext &context) {
		computed_ = true;
		std::unordered_map<Row, size_t, RowHash> index;
		std::vector<Row> keys;
		std::vector<std::vector<State>> states;
		if (groups_.empty()) {
			keys.emplace_back();
			states.emplace_back(specs_.size());
		}
		DataChunk chunk;
		while (children[0]->Next(context, chunk)) {
			for (size_t r = 0; r < chunk.RowCount(); r++) {
				size_t group = 0;
				if (!groups_.empty()) {
					Row key;
					for (auto &expression : groups_) {
						key.push_back(EvaluateExpression(expression, chunk, r));
					}
					auto [it, inserted] = index.emplace(key, keys.size());
					if (inserted) {
						keys.push_back(std::move(key));
						states.emplace_back(specs_.size());
					}
					group = it->second;
				}
				for (size_t a = 0; a < specs_.size(); a++) {
					Update(specs_[a], states[group][a], chunk, r);
				}
			}
		}
		for (size_t g = 0; g < keys.size(); g++) {
			Row row = keys[g];
			for (size_t a = 0; a < specs_.size(); a++) {
				row.push_back(Finalize(specs_[a], states[g][a]));
			}
			result_.push_back(std::move(row));
		}
		for (size_t a = 0; a < specs_.size(); a++) {
			if (specs_[a].function != AggregateFunction::Semantic) {
				continue;
			}
			if (!registered_) {
				context.RegisterStats(&stats_);
				registered_ = true;
			}
			std::vector<std::vector<Row>> members;
			for (auto &group : states) {
				members.push_back(group[a].members);
			}
			auto executor = MakeExecutor(context, specs_[a].predict, stats_);
			auto values = executor->PredictGroups(members);
			for (size_t g = 0; g < values.size(); g++) {
				result_[g][groups_.size() + a] = std::move(values[g]);
			}
		}
	}

	std::vector<BoundExpression> groups_;
	std::vector<Spec> specs_;
	CallStats stats_;
	bool registered_ = false;
	bool computed_ = false;
	std::vector<Row> result_;
	size_t emitted_ = 0;
};

//! Stable sort, NULLs last in both directions.
class PhysicalOrder : public PhysicalOperator {
public:
	PhysicalOrder(std::vector<BoundExpression> keys, std::vector<bool> descending, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)), keys_(std::move(keys)), descending_(std::move(descending)) {
	}

	std::string Name() const override {
		return "ORDER";
	}
	std::string Detail() const override {
		std::string result;
		for (size_t k = 0; k < keys_.size(); k++) {
			result += (k ? ", " : "") + keys_[k].ToString() + (descending_[k] ? " DESC" : "");
		}
		return result;
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		if (!sorted_) {
			Sort(context);
		}
		if (emitted_ >= order_.size()) {
			return false;
		}
		out = DataChunk(OutputSchema());
		while (emitted_ < order_.size() && out.RowCount() < context.chunk_capacity) {
			out.AppendRow(rows_[order_[emitted_++]]);
		}
		return true;
	}

private:
	void Sort(ExecutionContext &context) {
		sorted_ = true;
		std::vector<Row> sort_keys;
		DataChunk chunk;
		while (children[0]->Next(context, chunk)) {
			for (size_t r = 0; r < chunk.RowCount(); r++) {
				Row key;
				for (auto &expression : keys_) {
					key.push_back(EvaluateExpression(expression, chunk, r));
				}
				sort_keys.push_back(std::move(key));
				rows_.push_back(chunk.GetRow(r));
			}
		}
		order_.resize(rows_.size());
		for (size_t i = 0; i < order_.size(); i++) {
			order_[i] = i;
		}
		std::stable_sort(order_.begin(), order_.end(), [&](size_t a, size_t b) {
			for (size_t k = 0; k < keys_.size(); k++) {
				auto &x = sort_keys[a][k];
				auto &y = sort_keys[b][k];
				if (x.IsNull() || y.IsNull()) {
					if (x.IsNull() && y.IsNull()) {
						continue;
					}
					return y.IsNull();
				}
				bool less = Value::SortLess(x, y);
				bool greater = Value::SortLess(y, x);
				if (less == greater) {
					continue;
				}
				return descending_[k] ? greater : less;
			}
			return false;
		});
	}

	std::vector<BoundExpression> keys_;
	std::vector<bool> descending_;
	bool sorted_ = false;
	std::vector<Row> rows_;
	std::vector<size_t> order_;
	size_t emitted_ = 0;
};

class PhysicalLimit : public PhysicalOperator {
public:
	PhysicalLimit(int64_t limit, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)), remaining_(std::max<int64_t>(limit, 0)), limit_(limit) {
	}

	std::string Name() const override {
		return "LIMIT";
	}
	std::string Detail() const override {
		return std::to_string(limit_);
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		if (remaining_ == 0) {
			return false;
		}
		DataChunk chunk;
		if (!children[0]->Next(context, chunk)) {
			return false;
		}
		if (static_cast<int64_t>(chunk.RowCount()) > remaining_) {
			std::vector<size_t> rows(static_cast<size_t>(remaining_));
			for (size_t i = 0; i < rows.size(); i++) {
				rows[i] = i;
			}
			chunk = chunk.Select(rows);
		}
		remaining_ -= static_cast<int64_t>(chunk.RowCount());
		out = std::move(chunk);
		return true;
	}

private:
	int64_t remaining_;
	int64_t limit_;
};

//! Table inference and scalar inference: buffers up to one chunk of input rows, predicts them, appends the
//! predicted columns.
class PhysicalPredict : public PhysicalOperator {
public:
	PhysicalPredict(std::shared_ptr<const PredictInfo> info, std::vector<size_t> inputs,
	                std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)), info_(std::move(info)), inputs_(std::move(inputs)) {
	}

	std::string Name() const override {
		return "PREDICT";
	}
	std::string Detail() const override {
		return info_->Describe();
	}
	const CallStats *Stats() const override {
		return &stats_;
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		if (!executor_) {
			context.RegisterStats(&stats_);
			executor_ = MakeExecutor(context, info_, stats_);
		}
		DataChunk buffer;
		DataChunk chunk;
		bool any = false;
		while (buffer.RowCount() < context.chunk_capacity && children[0]->Next(context, chunk)) {
			if (!any) {
				buffer = std::move(chunk);
				any = true;
			} else {
				AppendRows(buffer, chunk);
			}
		}
		if (!any) {
			return false;
		}
		std::vector<Row> inputs;
		inputs.reserve(buffer.RowCount());
		for (size_t r = 0; r < buffer.RowCount(); r++) {
			Row row;
			for (auto index : inputs_) {
				row.push_back(buffer.GetValue(index, r));
			}
			inputs.push_back(std::move(row));
		}
		auto predictions = executor_->PredictRows(inputs);
		auto schema = OutputSchema();
		auto base = buffer.ColumnCount();
		for (size_t o = 0; o < info_->outputs.size(); o++) {
			Vector values;
			values.reserve(predictions.size());
			for (auto &prediction : predictions) {
				values.push_back(std::move(prediction[o]));
			}
			buffer.AddColumn(schema[base + o], std::move(values));
		}
		out = std::move(buffer);
		return true;
	}

private:
	std::shared_ptr<const PredictInfo> info_;
	std::vector<size_t> inputs_;
	CallStats stats_;
	std::unique_ptr<PredictExecutor> executor_;
};

//! Table generation source.
class PhysicalGeneration : public PhysicalOperator {
public:
	PhysicalGeneration(std::shared_ptr<const PredictInfo> info, std::vector<ColumnBinding> columns)
	    : PhysicalOperator(std::move(columns)), info_(std::move(info)) {
	}

	std::string Name() const override {
		return "PREDICT_SCAN";
	}
	std::string Detail() const override {
		return info_->Describe();
	}
	const CallStats *Stats() const override {
		return &stats_;
	}

protected:
	bool GetChunk(ExecutionContext &context, DataChunk &out) override {
		if (!generated_) {
			generated_ = true;
			context.RegisterStats(&stats_);
			rows_ = MakeExecutor(context, info_, stats_)->Generate();
		}
		if (emitted_ >= rows_.size()) {
			return false;
		}
		out = DataChunk(OutputSchema());
		while (emitted_ < rows_.size() && out.RowCount() < context.chunk_capacity) {
			out.AppendRow(rows_[emitted_++]);
		}
		return true;
	}

private:
	std::shared_ptr<const PredictInfo> info_;
	CallStats stats_;
	bool generated_ = false;
	std::vector<Row> rows_;
	size_t emitted_ = 0;
};

void ExplainAnalyzeRecursive(const PhysicalOperator &op, size_t depth, std::string &out) {
	char timing[48];
	std::snprintf(timing, sizeof(timing), "%.2fms", static_cast<double>(op.micros) / 1000.0);
	out += std::string(depth * 2, ' ') + op.Name();
	auto detail = op.Detail();
	if (!detail.empty()) {
		out += " " + detail;
	}
	out += " (rows=" + std::to_string(op.rows_out) + ", time=" + timing + ")\n";
	if (auto stats = op.Stats()) {
		out += std::string(depth * 2 + 2, ' ') + "[" + stats->Snapshot().ToString() + "]\n";
	}
	for (auto &child : op.children) {
		ExplainAnalyzeRecursive(*child, depth + 1, out);
	}
}

} // namespace

// ---------------------------------------------------------------------------------------------------------------

void ExecutionContext::Warn(const std::string &message) {
	std::lock_guard guard(mutex_);
	warnings_.push_back(message);
}

std::vector<std::string> ExecutionContext::Warnings() const {
	std::lock_guard guard(mutex_);
	return warnings_;
}

std::shared_ptr<RateLimiter> ExecutionContext::Limiter(const ModelEntry &model, const PredictConfig &config) {
	if (!config.rate_limit_rpm) {
		return nullptr;
	}
	std::lock_guard guard(mutex_);
	auto &limiter = limiters_[model.name];
	if (!limiter || limiter->RequestsPerMinute() != *config.rate_limit_rpm) {
		limiter = std::make_shared<RateLimiter>(*config.rate_limit_rpm);
	}
	return limiter;
}

void ExecutionContext::RegisterStats(const CallStats *stats) {
	std::lock_guard guard(mutex_);
	stats_.push_back(stats);
}

CallStatsSnapshot ExecutionContext::TotalStats() const {
	std::lock_guard guard(mutex_);
	CallStatsSnapshot total;
	for (auto stats : stats_) {
		total += stats->Snapshot();
	}
	return total;
}

PhysicalOperator::PhysicalOperator(std::vector<ColumnBinding> columns) : columns(std::move(columns)) {
}

bool PhysicalOperator::Next(ExecutionContext &context, DataChunk &out) {
	auto start = std::chrono::steady_clock::now();
	bool produced = GetChunk(context, out);
	micros += static_cast<uint64_t>(
	    std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count());
	if (produced) {
		rows_out += out.RowCount();
	}
	return produced;
}

std::vector<ColumnSchema> PhysicalOperator::OutputSchema() const {
	std::vector<ColumnSchema> schema;
	for (auto &column : columns) {
		schema.push_back(ColumnSchema {column.name, column.type, column.origin});
	}
	return schema;
}

std::unique_ptr<PhysicalOperator> CreatePhysicalPlan(const LogicalOperator &plan, ExecutionContext &context) {
	std::unique_ptr<PhysicalOperator> result;
	auto columns = plan.Columns();
	auto child_layout = [&]() { return MakeLayout(plan.children[0]->Columns()); };
	switch (plan.type) {
	case LogicalOperatorType::Get: {
		auto &get = plan.Cast<LogicalGet>();
		result = std::make_unique<PhysicalScan>(get.table, columns);
		break;
	}
	case LogicalOperatorType::Filter: {
		auto &filter = plan.Cast<LogicalFilter>();
		result = std::make_unique<PhysicalFilter>(ResolveAll(filter.conditions, child_layout()), columns);
		break;
	}
	case LogicalOperatorType::Project: {
		auto &project = plan.Cast<LogicalProject>();
		result = std::make_unique<PhysicalProject>(ResolveAll(project.expressions, child_layout()), columns);
		break;
	}
	case LogicalOperatorType::Join:
		result = std::make_unique<PhysicalJoin>(plan.Cast<LogicalJoin>(), columns);
		break;
	case LogicalOperatorType::Aggregate:
		result = std::make_unique<PhysicalAggregate>(plan.Cast<LogicalAggregate>(), columns);
		break;
	case LogicalOperatorType::Order: {
		auto &order = plan.Cast<LogicalOrder>();
		std::vector<BoundExpression> keys;
		std::vector<bool> descending;
		auto layout = child_layout();
		for (auto &item : order.orders) {
			keys.push_back(ResolveExpression(item.expression, layout));
			descending.push_back(item.descending);
		}
		result = std::make_unique<PhysicalOrder>(std::move(keys), std::move(descending), columns);
		break;
	}
	case LogicalOperatorType::Limit:
		result = std::make_unique<PhysicalLimit>(plan.Cast<LogicalLimit>().limit, columns);
		break;
	case LogicalOperatorType::Predict: {
		auto &predict = plan.Cast<LogicalPredict>();
		if (predict.info->mode == PredictMode::TableGeneration) {
			result = std::make_unique<PhysicalGeneration>(predict.info, columns);
		} else {
			auto inputs = InputIndexes(*predict.info, child_layout());
			result = std::make_unique<PhysicalPredict>(predict.info, std::move(inputs), columns);
		}
		break;
	}
	}
	for (auto &child : plan.children) {
		result->children.push_back(CreatePhysicalPlan(*child, context));
	}
	return result;
}

std::vector<Row> CollectRows(PhysicalOperator &root, ExecutionContext &context) {
	std::vector<Row> rows;
	DataChunk chunk;
	while (root.Next(context, chunk)) {
		for (size_t r = 0; r < chunk.RowCount(); r++) {
			rows.push_back(chunk.GetRow(r));
		}
	}
	return rows;
}

std::string ExplainAnalyze(const PhysicalOperator &root) {
	std::string result;
	ExplainAnalyzeRecursive(root, 0, result);
	return result;
}

} // namespace semaquery
