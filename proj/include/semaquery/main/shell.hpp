#pragma once

#include "semaquery/main/database.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace semaquery {

enum class OutputFormat : uint8_t { Table, Csv, Json };

struct ShellOptions {
	OutputFormat format = OutputFormat::Table;
	//! Print inference counters after every statement.
	bool stats = false;
	bool stop_on_error = false;
	bool timing = false;
};

//! Statement runner shared by the REPL and script mode, so both produce the same output for the same input.
//!
//! Meta-commands (REPL and scripts, one per line):
//!   \import <file.csv> <table> [noheader] [noinfer] [pk=<col>]
//!   \models
//!   \explain <select>
//!   \stats
//!   \timing on|off
//!   \q
class Shell {
public:
	Shell(Session &session, ShellOptions options, std::ostream &out, std::ostream &err);

	//! Runs every statement of a script. Returns 0 iff all succeed.
	int RunScript(std::string_view text);
	//! Reads `;`-terminated statements and meta-commands until EOF or \q. Returns 0 iff all succeed.
	int RunRepl(std::istream &in, bool interactive);

private:
	//! Returns false when the statement failed.
	bool RunStatement(const Statement &statement, const std::string &text);
	//! Runs all statements in `text`; returns false on the first parse error or on any failure.
	bool RunText(std::string_view text);
	bool RunMeta(const std::string &line, bool &quit);
	void Print(const QueryResult &result);

	Session &session_;
	ShellOptions options_;
	std::ostream &out_;
	std::ostream &err_;
	CallStatsSnapshot last_stats_;
};

//! True when `text` ends with a `;` outside quotes and comments.
bool StatementComplete(std::string_view text);

//! `--set k=v` value: integer, double, true/false, else the text itself.
OptionValue ParseSettingValue(std::string_view text);

} // namespace semaquery
