#pragma once

#include "semaquery/common/box.hpp"
#include "semaquery/common/exception.hpp"
#include "semaquery/common/value.hpp"
#include "semaquery/sql/options.hpp"
#include "semaquery/sql/prompt_template.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace semaquery {

struct SemanticCall;
struct TableRef;
struct SelectStatement;

enum class ExpressionType : uint8_t {
	Constant,
	Column,   //!< column_name = {col} or {qualifier, col}
	Star,     //!< `*` or `t.*` (qualifier in column_name)
	Unary,    //!< op: NOT, -
	Binary,   //!< op: AND OR = <> < <= > >= + - * / % || LIKE
	IsNull,   //!< negated for IS NOT NULL
	Function, //!< op = lower-cased function name
	Cast,     //!< cast_type
	Semantic  //!< LLM or PREDICT clause in expression position
};

struct ParsedExpression {
	ExpressionType type = ExpressionType::Constant;
	Value value;
	std::vector<std::string> column_name;
	//! Single double-quoted identifier; the binder may read an unresolvable one as a string literal.
	bool quoted = false;
	std::string op;
	bool negated = false;
	bool distinct = false;
	//! count(*)
	bool star_argument = false;
	LogicalType cast_type = LogicalType::Null;
	std::vector<ParsedExpression> children;
	std::optional<Box<SemanticCall>> semantic;
	//! Not part of equality.
	SourcePosition pos;

	static ParsedExpression Constant(Value value, SourcePosition pos = {});
	static ParsedExpression Column(std::vector<std::string> name, SourcePosition pos = {});
	static ParsedExpression Binary(std::string op, ParsedExpression left, ParsedExpression right);

	//! Structural equality ignoring source positions.
	bool operator==(const ParsedExpression &other) const;
};

enum class SemanticCallType : uint8_t { Llm, Predict };

//! The LLM / PREDICT clause: `LLM [AGG] model (PROMPT '...' [, source] [, OPTIONS {...}])`,
//! `PREDICT model (source)` in FROM position, `PREDICT model (col, ...)` in expression position.
struct SemanticCall {
	SemanticCallType type = SemanticCallType::Llm;
	std::string model;
	bool agg = false;
	std::optional<PromptTemplate> prompt;
	//! Input relation; only in FROM position.
	std::optional<Box<TableRef>> source;
	//! PREDICT arguments in expression position.
	std::vector<ParsedExpression> arguments;
	//! Per-clause hints such as selectivity and quality.
	OptionMap options;

	bool operator==(const SemanticCall &) const = default;
};

enum class TableRefType : uint8_t { Base, Join, Subquery, Semantic };
enum class JoinType : uint8_t { Inner, Cross, Natural };

struct TableRef {
	TableRefType type = TableRefType::Base;
	std::string name;
	std::string alias;
	JoinType join_type = JoinType::Inner;
	std::optional<Box<TableRef>> left;
	std::optional<Box<TableRef>> right;
	std::optional<ParsedExpression> condition;
	std::optional<Box<SelectStatement>> subquery;
	std::optional<Box<SemanticCall>> semantic;

	bool operator==(const TableRef &) const = default;
};

struct SelectItem {
	ParsedExpression expression;
	std::string alias;
	bool operator==(const SelectItem &) const = default;
};

struct OrderItem {
	ParsedExpression expression;
	bool descending = false;
	bool operator==(const OrderItem &) const = default;
};

struct SelectStatement {
	bool distinct = false;
	std::vector<SelectItem> select_list;
	std::optional<TableRef> from;
	std::optional<ParsedExpression> where;
	std::vector<ParsedExpression> group_by;
	std::optional<ParsedExpression> having;
	std::vector<OrderItem> order_by;
	std::optional<int64_t> limit;

	bool operator==(const SelectStatement &) const = default;
};

enum class ModelType : uint8_t { Llm, Tabular, Embed };
const char *ModelTypeName(ModelType type);

struct ColumnDefinition {
	std::string name;
	LogicalType type = LogicalType::Varchar;
	bool operator==(const ColumnDefinition &) const = default;
};

struct CreateModelStatement {
	std::string name;
	ModelType type = ModelType::Llm;
	std::string path;
	bool on_prompt = false;
	std::optional<std::string> api;
	std::optional<std::string> secret;
	std::optional<std::string> table;
	std::vector<std::string> features;
	std::vector<ColumnDefinition> outputs;
	OptionMap options;

	bool operator==(const CreateModelStatement &) const = default;
};

struct ForeignKeyDefinition {
	std::string column;
	std::string referenced_table;
	std::string referenced_column;
	bool operator==(const ForeignKeyDefinition &) const = default;
};

//! CREATE TABLE name AS SELECT ... or CREATE TABLE name (col TYPE, ..., PRIMARY KEY (c), FOREIGN KEY (c) REFERENCES t (c)).
struct CreateTableStatement {
	std::string name;
	std::vector<ColumnDefinition> columns;
	std::optional<std::string> primary_key;
	std::vector<ForeignKeyDefinition> foreign_keys;
	std::optional<Box<SelectStatement>> query;

	bool operator==(const CreateTableStatement &) const = default;
};

struct InsertStatement {
	std::string table;
	std::vector<std::string> columns;
	std::vector<std::vector<ParsedExpression>> rows;
	std::optional<Box<SelectStatement>> query;

	bool operator==(const InsertStatement &) const = default;
};

//! ALTER TABLE t ADD PRIMARY KEY (c) / ALTER TABLE t ADD FOREIGN KEY (c) REFERENCES u (c).
struct AlterTableStatement {
	std::string table;
	std::optional<std::string> primary_key;
	std::optional<ForeignKeyDefinition> foreign_key;

	bool operator==(const AlterTableStatement &) const = default;
};

struct SetStatement {
	std::string name;
	OptionValue value;
	bool operator==(const SetStatement &) const = default;
};

enum class DropType : uint8_t { Model, Table };

struct DropStatement {
	DropType type = DropType::Table;
	std::string name;
	bool if_exists = false;
	bool operator==(const DropStatement &) const = default;
};

enum class ExplainType : uint8_t { Logical, Optimized, Analyze };

struct ExplainStatement {
	ExplainType type = ExplainType::Logical;
	Box<SelectStatement> query;
	bool operator==(const ExplainStatement &) const = default;
};

using Statement = std::variant<SelectStatement, CreateModelStatement, CreateTableStatement, InsertStatement,
                               AlterTableStatement, SetStatement, DropStatement, ExplainStatement>;

//! One statement of a script together with its source text.
struct ParsedStatement {
	Statement statement;
	std::string text;
	SourcePosition pos;
};

} // namespace semaquery
