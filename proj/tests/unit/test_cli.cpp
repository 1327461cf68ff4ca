#include "../support/test_helpers.hpp"

#include "semaquery/core/csv.hpp"
#include "semaquery/main/shell.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

using namespace semaquery;
using namespace semaquery::test;

namespace {

struct ShellRun {
	int code = 0;
	std::string out;
	std::string err;
};

ShellRun RunShellScript(const std::string &text, ShellOptions options = {}) {
	Database database;
	Session session(database);
	session.SetFixture(Fixture("corpus.jsonl"));
	std::ostringstream out;
	std::ostringstream err;
	Shell shell(session, options, out, err);
	ShellRun run;
	run.code = shell.RunScript(text);
	run.out = out.str();
	run.err = err.str();
	return run;
}

ShellRun RunShellRepl(const std::string &text, ShellOptions options = {}) {
	Database database;
	Session session(database);
	session.SetFixture(Fixture("corpus.jsonl"));
	std::ostringstream out;
	std::ostringstream err;
	std::istringstream in(text);
	Shell shell(session, options, out, err);
	ShellRun run;
	run.code = shell.RunRepl(in, false);
	run.out = out.str();
	run.err = err.str();
	return run;
}

int RunCli(const std::string &arguments, const std::string &output) {
	auto command = std::string(SEMAQUERY_CLI) + " " + arguments + " > " + output + " 2>&1";
	auto status = std::system(command.c_str());
	return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Shell, StatementComplete) {
	EXPECT_TRUE(StatementComplete("SELECT 1;"));
	EXPECT_TRUE(StatementComplete("SELECT 1;  \n"));
	EXPECT_FALSE(StatementComplete("SELECT 1"));
	EXPECT_FALSE(StatementComplete("SELECT 'a;"));
	EXPECT_TRUE(StatementComplete("SELECT 'a;';"));
	EXPECT_FALSE(StatementComplete("SELECT 1 -- done;"));
	EXPECT_FALSE(StatementComplete("SELECT 1 /* ; */"));
	EXPECT_TRUE(StatementComplete("SELECT 1 /* ; */;"));
	EXPECT_FALSE(StatementComplete("SELECT LLM m (PROMPT '{{a}} {b VARCHAR};') FROM t"));
}

TEST(Shell, ScriptAndReplProduceTheSameOutput) {
	auto text = ReadFile(DataPath("corpus_setup.sql")) + ReadFile(DataPath("corpus.sql"));
	auto script = RunShellScript(text);
	auto repl = RunShellRepl(text);
	EXPECT_EQ(script.code, 0) << script.err;
	EXPECT_EQ(repl.code, 0) << repl.err;
	EXPECT_EQ(script.out, repl.out);
	EXPECT_NE(script.out.find("Titanic"), std::string::npos);
}

TEST(Shell, FailingStatementSetsExitCode) {
	auto run = RunShellScript("SELECT 1;\nSELECT missing FROM nowhere;\nSELECT 2;\n");
	EXPECT_EQ(run.code, 1);
	EXPECT_NE(run.err.find("nowhere"), std::string::npos) << run.err;
	// Execution continues after the error by default.
	EXPECT_NE(run.out.find("2"), std::string::npos);
	ShellOptions stop;
	stop.stop_on_error = true;
	stop.format = OutputFormat::Csv;
	auto stopped = RunShellScript("SELECT 1 AS a;\nSELECT missing FROM nowhere;\nSELECT 222 AS b;\n", stop);
	EXPECT_EQ(stopped.code, 1);
	EXPECT_EQ(stopped.out.find("222"), std::string::npos);
	EXPECT_EQ(RunShellScript("SELECT 1 AS a;\n").code, 0);
	EXPECT_EQ(RunShellScript("SELEC 1;\n").code, 1);
}

TEST(Shell, MetaCommands) {
	auto run = RunShellScript("CREATE LLM MODEL o4mini PATH 'o4-mini' ON PROMPT;\n\\models\n\\nonsense\n");
	EXPECT_NE(run.out.find("o4mini"), std::string::npos) << run.out;
	EXPECT_NE(run.err.find("unknown command"), std::string::npos) << run.err;
	EXPECT_EQ(run.code, 1);
	auto quit = RunShellRepl("SELECT 1 AS a;\n\\q\nSELECT 99 AS never;\n");
	EXPECT_EQ(quit.out.find("99"), std::string::npos);
	EXPECT_EQ(quit.code, 0);
}

TEST(Shell, CsvRoundTrip) {
	TempDir dir;
	auto file = dir.Path() / "movies.csv";
	std::ofstream(file) << "movie_id,title,plot\n1,Titanic,\"A ship, an iceberg\"\n2,Alien,\"Space \"\"horror\"\"\"\n";
	ShellOptions options;
	options.format = OutputFormat::Csv;
	auto run = RunShellScript("\\import " + file.string() + " Movie pk=movie_id\nSELECT * FROM Movie ORDER BY movie_id;\n",
	                          options);
	ASSERT_EQ(run.code, 0) << run.err;
	auto reread = ReadCsv(run.out.substr(run.out.find("movie_id")), "Again");
	ASSERT_EQ(reread->RowCount(), 2u);
	EXPECT_EQ(reread->GetRow(0)[2].ToString(), "A ship, an iceberg");
	EXPECT_EQ(reread->GetRow(1)[2].ToString(), "Space \"horror\"");
	EXPECT_EQ(reread->GetRow(1)[0], Value::Integer(2));
}

TEST(Shell, SettingValues) {
	EXPECT_EQ(ParseSettingValue("16"), OptionValue(int64_t(16)));
	EXPECT_EQ(ParseSettingValue("0.5"), OptionValue(0.5));
	EXPECT_EQ(ParseSettingValue("true"), OptionValue(true));
	EXPECT_EQ(ParseSettingValue("mock"), OptionValue(std::string("mock")));
}

TEST(Cli, ExitCodes) {
	TempDir dir;
	auto good = dir.Path() / "good.sql";
	auto bad = dir.Path() / "bad.sql";
	auto output = (dir.Path() / "out.txt").string();
	std::ofstream(good) << ReadFile(DataPath("corpus_setup.sql")) << ReadFile(DataPath("corpus.sql"));
	std::ofstream(bad) << "SELECT 1;\nSELECT * FROM missing_table;\n";
	auto fixtures = DataPath("fixtures/corpus.jsonl").string();
	EXPECT_EQ(RunCli("--script " + good.string() + " --fixtures " + fixtures, output), 0) << ReadFile(output);
	EXPECT_EQ(RunCli("--script " + bad.string() + " --fixtures " + fixtures, output), 1);
	EXPECT_NE(ReadFile(output).find("missing_table"), std::string::npos);
	EXPECT_NE(RunCli("--backend nonsense --script " + good.string(), output), 0);
	EXPECT_NE(RunCli("--script " + (dir.Path() / "absent.sql").string(), output), 0);
}

TEST(Cli, FormatsAndSettings) {
	TempDir dir;
	auto script = dir.Path() / "q.sql";
	auto output = (dir.Path() / "out.txt").string();
	std::ofstream(script) << "SELECT 1 AS a, 'x' AS b;\n";
	ASSERT_EQ(RunCli("--format json --set batch_size=4 --script " + script.string(), output), 0);
	EXPECT_NE(ReadFile(output).find(R"("a")"), std::string::npos) << ReadFile(output);
	EXPECT_NE(RunCli("--set batch_size=zero --script " + script.string(), output), 0);
}
