#include "semaquery/main/shell.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"
#include "semaquery/sql/parser.hpp"

#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>

namespace semaquery {

bool StatementComplete(std::string_view text) {
	char quote = 0;
	bool line_comment = false;
	bool block_comment = false;
	bool terminated = false;
	for (size_t i = 0; i < text.size(); i++) {
		char c = text[i];
		char next = i + 1 < text.size() ? text[i + 1] : '\0';
		if (line_comment) {
			line_comment = c != '\n';
			continue;
		}
		if (block_comment) {
			if (c == '*' && next == '/') {
				block_comment = false;
				i++;
			}
			continue;
		}
		if (quote) {
			if (c == quote) {
				quote = 0;
			}
			continue;
		}
		if (c == '\'' || c == '"') {
			quote = c;
			terminated = false;
		} else if (c == '-' && next == '-') {
			line_comment = true;
		} else if (c == '/' && next == '*') {
			block_comment = true;
		} else if (c == ';') {
			terminated = true;
		} else if (!std::isspace(static_cast<unsigned char>(c))) {
			terminated = false;
		}
	}
	return terminated && !quote && !block_comment;
}

OptionValue ParseSettingValue(std::string_view text) {
	auto trimmed = std::string(string_util::Trim(text));
	if (auto integer = string_util::ParseInteger(trimmed)) {
		return *integer;
	}
	if (auto number = string_util::ParseDouble(trimmed)) {
		return *number;
	}
	auto lower = string_util::Lower(trimmed);
	if (lower == "true" || lower == "false") {
		return lower == "true";
	}
	if (trimmed.size() >= 2 && trimmed.front() == '\'' && trimmed.back() == '\'') {
		return trimmed.substr(1, trimmed.size() - 2);
	}
	return trimmed;
}

Shell::Shell(Session &session, ShellOptions options, std::ostream &out, std::ostream &err)
    : session_(session), options_(options), out_(out), err_(err) {
}

void Shell::Print(const QueryResult &result) {
	for (auto &warning : result.warnings) {
		err_ << "warning: " << warning << "\n";
	}
	if (!result.explain.empty()) {
		out_ << result.explain;
		if (result.explain.back() != '\n') {
			out_ << "\n";
		}
	} else if (result.HasRows()) {
		switch (options_.format) {
		case OutputFormat::Table:
			out_ << result.ToTable();
			break;
		case OutputFormat::Csv:
			out_ << result.ToCsv();
			break;
		case OutputFormat::Json:
			out_ << result.ToJson() << "\n";
			break;
		}
	} else if (options_.format == OutputFormat::Table) {
		out_ << result.message << "\n";
	}
	if (options_.stats) {
		err_ << "stats: " << result.stats.ToString() << "\n";
	}
	if (options_.timing) {
		char buffer[48];
		std::snprintf(buffer, sizeof(buffer), "Time: %.3f ms", static_cast<double>(result.micros) / 1000.0);
		err_ << buffer << "\n";
	}
}

bool Shell::RunStatement(const Statement &statement, const std::string &text) {
	try {
		auto result = session_.Execute(statement);
		last_stats_ = result.stats;
		Print(result);
		return true;
	} catch (const std::exception &error) {
		err_ << "Error in statement: " << string_util::Trim(text) << "\n" << error.what() << "\n";
		return false;
	}
}

bool Shell::RunText(std::string_view text) {
	std::vector<ParsedStatement> statements;
	try {
		statements = ParseScript(text);
	} catch (const std::exception &error) {
		err_ << error.what() << "\n";
		return false;
	}
	bool ok = true;
	for (auto &statement : statements) {
		if (!RunStatement(statement.statement, statement.text)) {
			ok = false;
			if (options_.stop_on_error) {
				break;
			}
		}
	}
	return ok;
}

bool Shell::RunMeta(const std::string &line, bool &quit) {
	auto words = string_util::Split(string_util::Trim(line), ' ');
	std::vector<std::string> args;
	for (auto &word : words) {
		if (!word.empty()) {
			args.push_back(word);
		}
	}
	auto command = string_util::Lower(args[0]);
	try {
		if (command == "\\q" || command == "\\quit") {
			quit = true;
		} else if (command == "\\import") {
			if (args.size() < 3) {
				throw ConfigException("usage: \\import <file.csv> <table> [noheader] [noinfer] [pk=<col>]");
			}
			CsvOptions csv;
			for (size_t i = 3; i < args.size(); i++) {
				auto flag = string_util::Lower(args[i]);
				if (flag == "noheader") {
					csv.header = false;
				} else if (flag == "noinfer") {
					csv.infer_types = false;
				} else if (string_util::StartsWith(flag, "pk=")) {
					csv.primary_key = args[i].substr(3);
				} else {
					throw ConfigException("unknown \\import flag " + args[i]);
				}
			}
			auto table = session_.ImportCsv(args[1], args[2], csv);
			out_ << "IMPORT " << table->RowCount() << "\n";
		} else if (command == "\\models") {
			QueryResult result;
			result.names = {"name", "type", "path", "on_prompt", "api", "relation"};
			for (auto &model : session_.GetDatabase().Models().List()) {
				result.rows.push_back({Value::Varchar(model->name), Value::Varchar(ModelTypeName(model->type)),
				                       Value::Varchar(model->path), Value::Boolean(model->on_prompt),
				                       model->base_api ? Value::Varchar(*model->base_api) : Value::Null(),
				                       model->relation ? Value::Varchar(*model->relation) : Value::Null()});
			}
			Print(result);
		} else if (command == "\\explain") {
			auto rest = std::string(string_util::Trim(line)).substr(args[0].size());
			return RunText("EXPLAIN OPTIMIZED " + rest);
		} else if (command == "\\stats") {
			out_ << last_stats_.ToString() << "\n";
		} else if (command == "\\timing") {
			if (args.size() != 2 || (args[1] != "on" && args[1] != "off")) {
				throw ConfigException("usage: \\timing on|off");
			}
			options_.timing = args[1] == "on";
		} else {
			throw ConfigException("unknown command " + args[0]);
		}
	} catch (const std::exception &error) {
		err_ << error.what() << "\n";
		return false;
	}
	return true;
}

int Shell::RunScript(std::string_view text) {
	// Meta-command lines are cut out; everything between them runs as SQL.
	bool ok = true;
	std::string buffer;
	bool quit = false;
	size_t start = 0;
	while (start <= text.size() && !quit) {
		auto end = text.find('\n', start);
		if (end == std::string_view::npos) {
			end = text.size();
		}
		auto line = text.substr(start, end - start);
		start = end + 1;
		auto trimmed = string_util::Trim(line);
		if (!trimmed.empty() && trimmed[0] == '\\' && string_util::Trim(buffer).empty()) {
			ok &= RunMeta(std::string(trimmed), quit);
		} else {
			buffer.append(line);
			buffer.push_back('\n');
			if (!StatementComplete(buffer)) {
				continue;
			}
			ok &= RunText(buffer);
			buffer.clear();
		}
		if (!ok && options_.stop_on_error) {
			return 1;
		}
	}
	if (!quit && !string_util::Trim(buffer).empty()) {
		ok &= RunText(buffer);
	}
	return ok ? 0 : 1;
}

int Shell::RunRepl(std::istream &in, bool interactive) {
	bool ok = true;
	bool quit = false;
	std::string buffer;
	std::string line;
	while (!quit) {
		if (interactive) {
			out_ << (buffer.empty() ? "semaquery> " : "       ...> ") << std::flush;
		}
		if (!std::getline(in, line)) {
			break;
		}
		auto trimmed = string_util::Trim(line);
		if (buffer.empty() && !trimmed.empty() && trimmed[0] == '\\') {
			ok &= RunMeta(std::string(trimmed), quit);
			continue;
		}
		buffer.append(line);
		buffer.push_back('\n');
		if (StatementComplete(buffer)) {
			ok &= RunText(buffer);
			buffer.clear();
		}
	}
	if (!string_util::Trim(buffer).empty()) {
		ok &= RunText(buffer);
	}
	if (interactive) {
		out_ << "\n";
	}
	return ok ? 0 : 1;
}

} // namespace semaquery
