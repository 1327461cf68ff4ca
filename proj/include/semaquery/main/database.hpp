#pragma once

#include "semaquery/catalog/model_catalog.hpp"
#include "semaquery/core/csv.hpp"
#include "semaquery/core/table.hpp"
#include "semaquery/optimizer/optimizer.hpp"
#include "semaquery/planner/binder.hpp"
#include "semaquery/predict/call_stats.hpp"
#include "semaquery/predictors/http_transport.hpp"
#include "semaquery/predictors/mock_predictor.hpp"
#include "semaquery/sql/ast.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semaquery {

struct DatabaseOptions {
	//! Directory holding models.jsonl. In-memory catalog when absent.
	std::optional<std::filesystem::path> catalog_directory;
	//! JSON secrets file; environment variables are consulted either way.
	std::optional<std::filesystem::path> secrets_file;
};

//! Tables, models and secrets shared by the sessions of one process.
class Database {
public:
	explicit Database(DatabaseOptions options = {});

	TableCatalog &Tables() {
		return tables_;
	}
	ModelCatalog &Models() {
		return *models_;
	}
	std::shared_ptr<SecretStore> Secrets() const {
		return secrets_;
	}

private:
	TableCatalog tables_;
	std::unique_ptr<ModelCatalog> models_;
	std::shared_ptr<SecretStore> secrets_;
};

struct QueryResult {
	std::vector<std::string> names;
	std::vector<LogicalType> types;
	std::vector<Row> rows;
	//! Set for statements that return no rows ("CREATE MODEL", "INSERT 3", ...).
	std::string message;
	//! EXPLAIN text.
	std::string explain;
	std::vector<std::string> warnings;
	CallStatsSnapshot stats;
	uint64_t micros = 0;

	bool HasRows() const {
		return !names.empty();
	}
	//! Aligned text table.
	std::string ToTable() const;
	std::string ToCsv() const;
	//! JSON array of objects, one per row.
	std::string ToJson() const;
};

//! A connection: session settings plus statement execution.
//!
//! Settings accepted by SET: every PredictConfig field, temperature, and
//!   backend            mock | remote (default mock)
//!   fixtures           mock fixture file; an echo-only fixture is used when unset
//!   optimizer_rules    comma-separated rule names, "all" or "none" (default all)
//!   chunk_capacity     rows per chunk (default 2048)
//!   merge_selectivity_threshold
class Session {
public:
	explicit Session(Database &database);

	//! Executes exactly one statement.
	QueryResult Execute(std::string_view sql);
	QueryResult Execute(const Statement &statement);

	//! Validates and stores a session setting. Throws ConfigException.
	void Set(const std::string &name, const OptionValue &value);
	const OptionMap &Settings() const {
		return settings_;
	}

	//! Binds a SELECT and, when `optimize` is set, applies the enabled rewrite rules.
	BoundQuery Plan(const SelectStatement &statement, bool optimize, RewriteTrace *trace = nullptr);
	BoundQuery Plan(std::string_view select_sql, bool optimize, RewriteTrace *trace = nullptr);
	//! Runs an already built plan.
	QueryResult Run(BoundQuery query, std::string *analyze = nullptr);

	std::shared_ptr<Table> ImportCsv(const std::filesystem::path &path, const std::string &table_name,
	                                 const CsvOptions &options = {});

	//! Routes remote-backend traffic through `transport` (cassette replay in tests).
	void SetTransport(std::shared_ptr<HttpTransport> transport) {
		transport_ = std::move(transport);
	}
	//! Uses this fixture instead of the `fixtures` setting.
	void SetFixture(std::shared_ptr<const MockFixture> fixture) {
		fixture_ = std::move(fixture);
	}

	Database &GetDatabase() {
		return database_;
	}

private:
	QueryResult ExecuteSelect(const SelectStatement &statement);
	QueryResult ExecuteCreateModel(const CreateModelStatement &statement);
	QueryResult ExecuteCreateTable(const CreateTableStatement &statement);
	QueryResult ExecuteInsert(const InsertStatement &statement);
	QueryResult ExecuteAlter(const AlterTableStatement &statement);
	QueryResult ExecuteSet(const SetStatement &statement);
	QueryResult ExecuteDrop(const DropStatement &statement);
	QueryResult ExecuteExplain(const ExplainStatement &statement);

	OptimizerConfig MakeOptimizerConfig() const;
	size_t ChunkCapacity() const;
	std::shared_ptr<const MockFixture> FixtureFor(const ModelEntry &model) const;

	Database &database_;
	OptionMap settings_;
	std::shared_ptr<HttpTransport> transport_;
	std::shared_ptr<const MockFixture> fixture_;
};

} // namespace semaquery
