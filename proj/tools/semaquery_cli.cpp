#include "semaquery/common/exception.hpp"
#include "semaquery/main/shell.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace semaquery;

int main(int argc, char **argv) {
	CLI::App app {"semaquery: SQL with model inference clauses"};
	std::string db;
	std::string script;
	std::string secrets;
	std::vector<std::string> sets;
	std::string backend;
	std::string fixtures;
	std::string format = "table";
	ShellOptions options;
	app.add_option("--db", db, "Catalog directory (models.jsonl)");
	app.add_option("--script", script, "Run a SQL script and exit")->check(CLI::ExistingFile);
	app.add_option("--secrets", secrets, "Secrets file (JSON object, mode 0600)");
	app.add_option("--set", sets, "Session setting k=v (repeatable)");
	app.add_option("--backend", backend, "Inference backend")->check(CLI::IsMember({"mock", "remote"}));
	app.add_option("--fixtures", fixtures, "Mock fixture file");
	app.add_option("--format", format, "Result format")->check(CLI::IsMember({"table", "csv", "json"}));
	app.add_flag("--stop-on-error", options.stop_on_error, "Stop a script at the first failing statement");
	app.add_flag("--stats", options.stats, "Print inference counters after each statement");
	CLI11_PARSE(app, argc, argv);

	options.format = format == "csv" ? OutputFormat::Csv : format == "json" ? OutputFormat::Json : OutputFormat::Table;
	try {
		DatabaseOptions database_options;
		if (!db.empty()) {
			database_options.catalog_directory = db;
		}
		if (!secrets.empty()) {
			database_options.secrets_file = secrets;
		}
		Database database(database_options);
		Session session(database);
		// Flags seed session defaults only; model OPTIONS still take precedence at execution time.
		if (!backend.empty()) {
			session.Set("backend", backend);
		}
		if (!fixtures.empty()) {
			session.Set("fixtures", fixtures);
		}
		for (auto &setting : sets) {
			auto eq = setting.find('=');
			if (eq == std::string::npos) {
				throw ConfigException("--set expects k=v, got '" + setting + "'");
			}
			session.Set(setting.substr(0, eq), ParseSettingValue(setting.substr(eq + 1)));
		}
		Shell shell(session, options, std::cout, std::cerr);
		if (!script.empty()) {
			std::ifstream in(script);
			std::stringstream text;
			text << in.rdbuf();
			return shell.RunScript(text.str());
		}
		return shell.RunRepl(std::cin, isatty(STDIN_FILENO));
	} catch (const std::exception &error) {
		std::cerr << error.what() << "\n";
		return 1;
	}
}
