#include "semaquery/main/database.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"
#include "semaquery/execution/expression_executor.hpp"
#include "semaquery/execution/physical_operator.hpp"
#include "semaquery/predict/predict_config.hpp"
#include "semaquery/predictors/remote_predictor.hpp"
#include "semaquery/predictors/tabular_stub.hpp"
#include "semaquery/sql/parser.hpp"

#include <chrono>
#include <map>
#include <sstream>

namespace semaquery {

namespace {

const char *kBackendMock = "mock";
const char *kBackendRemote = "remote";

std::string OptionString(const OptionMap &options, std::string_view key) {
	auto value = options.Find(key);
	return value ? OptionValueToString(*value) : std::string();
}

uint64_t ElapsedMicros(std::chrono::steady_clock::time_point start) {
	return static_cast<uint64_t>(
	    std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count());
}

QueryResult Message(std::string message) {
	QueryResult result;
	result.message = std::move(message);
	return result;
}

Value CoerceForColumn(const Value &value, const ColumnSchema &column) {
	if (value.IsNull() || value.Type() == column.type) {
		return value;
	}
	return value.CastAs(column.type);
}

std::string DisplayValue(const Value &value) {
	return value.IsNull() ? "NULL" : value.ToString();
}

} // namespace

// ---------------------------------------------------------------------------------------------------------------

Database::Database(DatabaseOptions options) {
	models_ = options.catalog_directory ? std::make_unique<ModelCatalog>(*options.catalog_directory)
	                                    : std::make_unique<ModelCatalog>();
	secrets_ = options.secrets_file ? std::make_shared<SecretStore>(*options.secrets_file)
	                                : std::make_shared<SecretStore>();
}

std::string QueryResult::ToTable() const {
	if (!HasRows()) {
		return explain.empty() ? message : explain;
	}
	std::vector<size_t> widths(names.size());
	std::vector<std::vector<std::string>> cells;
	for (size_t c = 0; c < names.size(); c++) {
		widths[c] = names[c].size();
	}
	for (auto &row : rows) {
		std::vector<std::string> line;
		for (size_t c = 0; c < row.size(); c++) {
			line.push_back(DisplayValue(row[c]));
			widths[c] = std::max(widths[c], line.back().size());
		}
		cells.push_back(std::move(line));
	}
	std::ostringstream out;
	auto emit = [&](const std::vector<std::string> &line) {
		for (size_t c = 0; c < line.size(); c++) {
			out << (c ? " | " : "") << line[c] << std::string(widths[c] - line[c].size(), ' ');
		}
		out << "\n";
	};
	emit(names);
	for (size_t c = 0; c < names.size(); c++) {
		out << (c ? "-+-" : "") << std::string(widths[c], '-');
	}
	out << "\n";
	for (auto &line : cells) {
		emit(line);
	}
	out << "(" << rows.size() << (rows.size() == 1 ? " row)" : " rows)") << "\n";
	return out.str();
}

std::string QueryResult::ToCsv() const {
	if (!HasRows()) {
		return explain.empty() ? message : explain;
	}
	std::ostringstream out;
	WriteCsv(out, names, rows);
	return out.str();
}

std::string QueryResult::ToJson() const {
	auto array = ordered_json::array();
	for (auto &row : rows) {
		auto object = ordered_json::object();
		for (size_t c = 0; c < names.size(); c++) {
			object[names[c]] = ValueToJson(row[c]);
		}
		array.push_back(std::move(object));
	}
	return array.dump();
}

// ---------------------------------------------------------------------------------------------------------------

Session::Session(Database &database) : database_(database) {
}

QueryResult Session::Execute(std::string_view sql) {
	return Execute(ParseStatement(sql));
}

QueryResult Session::Execute(const Statement &statement) {
	auto start = std::chrono::steady_clock::now();
	auto result = std::visit(
	    [this](const auto &node) -> QueryResult {
		    using T = std::decay_t<decltype(node)>;
		    if constexpr (std::is_same_v<T, SelectStatement>) {
			    return ExecuteSelect(node);
		    } else if constexpr (std::is_same_v<T, CreateModelStatement>) {
			    return ExecuteCreateModel(node);
		    } else if constexpr (std::is_same_v<T, CreateTableStatement>) {
			    return ExecuteCreateTable(node);
		    } else if constexpr (std::is_same_v<T, InsertStatement>) {
			    return ExecuteInsert(node);
		    } else if constexpr (std::is_same_v<T, AlterTableStatement>) {
			    return ExecuteAlter(node);
		    } else if constexpr (std::is_same_v<T, SetStatement>) {
			    return ExecuteSet(node);
		    } else if constexpr (std::is_same_v<T, DropStatement>) {
			    return ExecuteDrop(node);
		    } else {
			    return ExecuteExplain(node);
		    }
	    },
	    statement);
	result.micros = ElapsedMicros(start);
	return result;
}

void Session::Set(const std::string &name, const OptionValue &value) {
	auto key = string_util::Lower(name);
	if (PredictConfig::IsPredictSetting(key)) {
		auto trial = settings_;
		trial.Set(key, value);
		PredictConfig::Resolve(OptionMap(), trial);
	} else if (key == "backend") {
		auto backend = string_util::Lower(OptionValueToString(value));
		if (backend != kBackendMock && backend != kBackendRemote) {
			throw ConfigException("backend must be 'mock' or 'remote', got '" + backend + "'");
		}
		settings_.Set(key, OptionValue(backend));
		return;
	} else if (key == "fixtures") {
		MockFixture::Load(OptionValueToString(value));
	} else if (key == "optimizer_rules") {
		OptimizerConfig::ParseRuleList(OptionValueToString(value));
	} else if (key == "chunk_capacity") {
		if (OptionAsInteger(key, value) < 1) {
			throw ConfigException("chunk_capacity must be at least 1");
		}
	} else if (key == "merge_selectivity_threshold") {
		auto threshold = OptionAsDouble(key, value);
		if (threshold < 0 || threshold > 1) {
			throw ConfigException("merge_selectivity_threshold must be within [0, 1]");
		}
	} else {
		throw ConfigException("unknown setting '" + name + "'");
	}
	settings_.Set(key, value);
}

OptimizerConfig Session::MakeOptimizerConfig() const {
	OptimizerConfig config;
	if (auto value = settings_.Find("optimizer_rules")) {
		config.rules = OptimizerConfig::ParseRuleList(OptionValueToString(*value));
	}
	if (auto value = settings_.Find("merge_selectivity_threshold")) {
		config.merge_selectivity_threshold = OptionAsDouble("merge_selectivity_threshold", *value);
	}
	return config;
}

size_t Session::ChunkCapacity() const {
	auto value = settings_.Find("chunk_capacity");
	return value ? static_cast<size_t>(OptionAsInteger("chunk_capacity", *value)) : kDefaultChunkCapacity;
}

std::shared_ptr<const MockFixture> Session::FixtureFor(const ModelEntry &model) const {
	auto path = OptionString(model.options, "fixture");
	if (!path.empty()) {
		return MockFixture::Load(path);
	}
	if (fixture_) {
		return fixture_;
	}
	path = OptionString(settings_, "fixtures");
	if (!path.empty()) {
		return MockFixture::Load(path);
	}
	return MockFixture::EchoOnly();
}

BoundQuery Session::Plan(const SelectStatement &statement, bool optimize, RewriteTrace *trace) {
	Binder binder(database_.Tables(), database_.Models());
	auto query = binder.BindSelect(statement);
	if (optimize) {
		query.plan = Optimizer(MakeOptimizerConfig()).Optimize(std::move(query.plan), trace);
	}
	return query;
}

BoundQuery Session::Plan(std::string_view select_sql, bool optimize, RewriteTrace *trace) {
	auto statement = ParseStatement(select_sql);
	auto select = std::get_if<SelectStatement>(&statement);
	if (!select) {
		throw BinderException("expected a SELECT statement");
	}
	return Plan(*select, optimize, trace);
}

QueryResult Session::Run(BoundQuery query, std::string *analyze) {
	ExecutionContext context;
	context.settings = settings_;
	context.chunk_capacity = ChunkCapacity();

	// One mock backend per query, so scripted *_once behaviors start fresh for each statement.
	std::map<const MockFixture *, std::shared_ptr<MockPredictor>> mocks;
	std::mutex factory_lock;
	context.predictor_factory = [&](const ModelEntry &model,
	                                const PredictConfig &config) -> std::shared_ptr<Predictor> {
		std::lock_guard guard(factory_lock);
		std::shared_ptr<Predictor> predictor;
		if (model.type == ModelType::Tabular) {
			predictor = std::make_shared<TabularStubPredictor>();
		} else if (model.type == ModelType::Embed) {
			throw ConfigException("model " + model.name + " is an EMBED model; embedding models cannot be executed");
		} else {
			auto backend = OptionString(model.options, "backend");
			if (backend.empty()) {
				backend = OptionString(settings_, "backend");
			}
			backend = string_util::Lower(backend);
			if (backend.empty() || backend == kBackendMock) {
				auto fixture = FixtureFor(model);
				auto &mock = mocks[fixture.get()];
				if (!mock) {
					mock = std::make_shared<MockPredictor>(fixture);
				}
				predictor = mock;
			} else if (backend == kBackendRemote) {
				auto transport = transport_ ? transport_ : std::make_shared<HttplibTransport>();
				predictor = std::make_shared<RemotePredictor>(transport, database_.Secrets(),
				                                              context.Limiter(model, config));
			} else {
				throw ConfigException("model " + model.name + " names unknown backend '" + backend + "'");
			}
		}
		predictor->Load(model, config);
		return predictor;
	};

	auto physical = CreatePhysicalPlan(*query.plan, context);
	QueryResult result;
	result.names = std::move(query.names);
	result.types = std::move(query.types);
	result.rows = CollectRows(*physical, context);
	result.warnings = std::move(query.warnings);
	for (auto &warning : context.Warnings()) {
		result.warnings.push_back(warning);
	}
	result.stats = context.TotalStats();
	if (analyze) {
		*analyze = ExplainAnalyze(*physical);
	}
	return result;
}

std::shared_ptr<Table> Session::ImportCsv(const std::filesystem::path &path, const std::string &table_name,
                                          const CsvOptions &options) {
	return semaquery::ImportCsv(database_.Tables(), path, table_name, options);
}

QueryResult Session::ExecuteSelect(const SelectStatement &statement) {
	return Run(Plan(statement, true));
}

QueryResult Session::ExecuteCreateModel(const CreateModelStatement &statement) {
	auto entry = ModelEntry::FromStatement(statement);
	QueryResult result;
	if (entry.type == ModelType::Tabular && (entry.input_set.empty() || entry.output_set.empty())) {
		throw CatalogException("TABULAR model " + entry.name + " needs FEATURES and OUTPUT");
	}
	if (entry.on_prompt && !entry.input_set.empty()) {
		throw CatalogException("model " + entry.name + " cannot combine ON PROMPT with FEATURES");
	}
	if (database_.Models().TryLookup(entry.name)) {
		throw CatalogException("model already exists: " + entry.name);
	}
	if (entry.relation) {
		auto table = database_.Tables().TryGetTable(*entry.relation);
		if (!table) {
			throw CatalogException("model " + entry.name + " is bound to unknown table " + *entry.relation);
		}
		for (auto &feature : entry.input_set) {
			if (!table->ColumnIndex(feature)) {
				throw CatalogException("feature column " + feature + " not found in table " + *entry.relation);
			}
		}
	}
	if (entry.base_api) {
		SplitUrl(ChatCompletionsUrl(*entry.base_api));
		auto secret = SecretNameFor(entry);
		if (!database_.Secrets()->Exists(secret)) {
			// Registration works offline; the remote backend reports the missing key before its first request.
			result.warnings.push_back("no secret named '" + secret + "' for model " + entry.name + "; set " +
			                          SecretStore::EnvironmentVariable(secret) + " before using the remote backend");
		}
	} else if (entry.secret && !database_.Secrets()->Exists(*entry.secret)) {
		result.warnings.push_back("secret '" + *entry.secret + "' for model " + entry.name + " is not defined yet");
	}
	auto fixture = OptionString(entry.options, "fixture");
	if (!fixture.empty() && !std::filesystem::exists(fixture)) {
		result.warnings.push_back("fixture file " + fixture + " for model " + entry.name + " does not exist yet");
	}
	if (!entry.base_api && !entry.path.empty() && !std::filesystem::exists(entry.path)) {
		result.warnings.push_back("model file " + entry.path + " for model " + entry.name + " does not exist yet");
	}
	database_.Models().Create(std::move(entry));
	result.message = "CREATE MODEL";
	return result;
}

QueryResult Session::ExecuteCreateTable(const CreateTableStatement &statement) {
	auto &tables = database_.Tables();
	if (tables.TryGetTable(statement.name)) {
		throw CatalogException("table already exists: " + statement.name);
	}
	std::shared_ptr<Table> table;
	QueryResult result;
	if (statement.query) {
		auto query = Plan(**statement.query, true);
		auto columns = query.plan->Columns();
		std::vector<ColumnSchema> schema;
		for (size_t c = 0; c < query.names.size(); c++) {
			schema.push_back(ColumnSchema {query.names[c], query.types[c], columns[c].origin});
		}
		table = std::make_shared<Table>(statement.name, std::move(schema));
		auto rows = Run(std::move(query));
		for (auto &row : rows.rows) {
			table->AppendRow(row);
		}
		result.warnings = std::move(rows.warnings);
		result.stats = rows.stats;
		result.message = "CREATE TABLE " + std::to_string(table->RowCount());
	} else {
		std::vector<ColumnSchema> schema;
		for (auto &column : statement.columns) {
			schema.push_back(ColumnSchema {column.name, column.type, ColumnOrigin::Stored});
		}
		table = std::make_shared<Table>(statement.name, std::move(schema));
		result.message = "CREATE TABLE";
	}
	if (statement.primary_key) {
		if (!table->ColumnIndex(*statement.primary_key)) {
			throw CatalogException("primary key column " + *statement.primary_key + " not found");
		}
		table->Keys().primary_key = *statement.primary_key;
	}
	for (auto &key : statement.foreign_keys) {
		if (!table->ColumnIndex(key.column)) {
			throw CatalogException("foreign key column " + key.column + " not found");
		}
		table->Keys().foreign_keys.push_back({key.column, key.referenced_table, key.referenced_column});
	}
	tables.CreateTable(table);
	return result;
}

QueryResult Session::ExecuteInsert(const InsertStatement &statement) {
	auto table = database_.Tables().GetTable(statement.table);
	auto &schema = table->Schema();
	std::vector<size_t> targets;
	if (statement.columns.empty()) {
		for (size_t c = 0; c < schema.size(); c++) {
			targets.push_back(c);
		}
	} else {
		for (auto &name : statement.columns) {
			auto index = table->ColumnIndex(name);
			if (!index) {
				throw BinderException("column " + name + " not found in table " + table->Name());
			}
			targets.push_back(*index);
		}
	}
	std::vector<Row> source;
	QueryResult result;
	if (statement.query) {
		auto rows = Run(Plan(**statement.query, true));
		source = std::move(rows.rows);
		result.warnings = std::move(rows.warnings);
		result.stats = rows.stats;
	} else {
		Binder binder(database_.Tables(), database_.Models());
		DataChunk empty;
		empty.AppendRow({});
		for (auto &values : statement.rows) {
			Row row;
			for (auto &expression : values) {
				row.push_back(EvaluateExpression(binder.BindConstant(expression), empty, 0));
			}
			source.push_back(std::move(row));
		}
	}
	std::vector<Row> converted;
	for (auto &input : source) {
		if (input.size() != targets.size()) {
			throw BinderException("INSERT supplies " + std::to_string(input.size()) + " values for " +
			                      std::to_string(targets.size()) + " columns");
		}
		Row row(schema.size(), Value::Null());
		for (size_t i = 0; i < targets.size(); i++) {
			row[targets[i]] = CoerceForColumn(input[i], schema[targets[i]]);
		}
		converted.push_back(std::move(row));
	}
	// Converted first so a bad value leaves the table untouched.
	for (auto &row : converted) {
		table->AppendRow(row);
	}
	result.message = "INSERT " + std::to_string(converted.size());
	return result;
}

QueryResult Session::ExecuteAlter(const AlterTableStatement &statement) {
	auto table = database_.Tables().GetTable(statement.table);
	if (statement.primary_key) {
		if (!table->ColumnIndex(*statement.primary_key)) {
			throw CatalogException("primary key column " + *statement.primary_key + " not found in table " +
			                       table->Name());
		}
		table->Keys().primary_key = *statement.primary_key;
	}
	if (statement.foreign_key) {
		auto &key = *statement.foreign_key;
		if (!table->ColumnIndex(key.column)) {
			throw CatalogException("foreign key column " + key.column + " not found in table " + table->Name());
		}
		auto referenced = database_.Tables().GetTable(key.referenced_table);
		if (!referenced->ColumnIndex(key.referenced_column)) {
			throw CatalogException("referenced column " + key.referenced_column + " not found in table " +
			                       referenced->Name());
		}
		table->Keys().foreign_keys.push_back({key.column, key.referenced_table, key.referenced_column});
	}
	return Message("ALTER TABLE");
}

QueryResult Session::ExecuteSet(const SetStatement &statement) {
	Set(statement.name, statement.value);
	return Message("SET");
}

QueryResult Session::ExecuteDrop(const DropStatement &statement) {
	if (statement.type == DropType::Model) {
		database_.Models().Drop(statement.name, statement.if_exists);
		return Message("DROP MODEL");
	}
	if (!database_.Tables().TryGetTable(statement.name)) {
		if (statement.if_exists) {
			return Message("DROP TABLE");
		}
		throw CatalogException("table not found: " + statement.name);
	}
	database_.Tables().DropTable(statement.name);
	return Message("DROP TABLE");
}

QueryResult Session::ExecuteExplain(const ExplainStatement &statement) {
	QueryResult result;
	switch (statement.type) {
	case ExplainType::Logical: {
		auto query = Plan(*statement.query, false);
		result.explain = ExplainPlan(*query.plan);
		result.warnings = std::move(query.warnings);
		break;
	}
	case ExplainType::Optimized: {
		RewriteTrace trace;
		auto query = Plan(*statement.query, true, &trace);
		result.explain = ExplainPlan(*query.plan);
		auto rewrites = trace.ToString();
		if (!rewrites.empty()) {
			result.explain += "\nRewrites:\n" + rewrites;
		}
		result.warnings = std::move(query.warnings);
		break;
	}
	case ExplainType::Analyze: {
		std::string analyze;
		auto run = Run(Plan(*statement.query, true), &analyze);
		result.explain = analyze + "Total: " + run.stats.ToString() + "\n";
		result.warnings = std::move(run.warnings);
		result.stats = run.stats;
		break;
	}
	}
	return result;
}

} // namespace semaquery
