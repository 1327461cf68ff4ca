#include "semaquery/common/string_util.hpp"
#include "semaquery/sql/parser.hpp"
#include "semaquery/sql/token.hpp"

#include <cctype>

namespace semaquery {

namespace {

std::string AliasSuffix(const std::string &alias) {
	return alias.empty() ? "" : " AS " + QuoteIdentifier(alias);
}

std::string JoinList(const std::vector<std::string> &items) {
	return string_util::Join(items, ", ");
}

std::string SourceToSQL(const TableRef &source) {
	return source.type == TableRefType::Join ? "(" + ToSQL(source) + ")" : ToSQL(source);
}

std::string SemanticToSQL(const SemanticCall &call) {
	std::vector<std::string> args;
	std::string result;
	if (call.type == SemanticCallType::Predict) {
		result = "PREDICT " + QuoteIdentifier(call.model) + " (";
		if (call.source) {
			args.push_back(SourceToSQL(**call.source));
		}
		for (auto &argument : call.arguments) {
			args.push_back(ToSQL(argument));
		}
	} else {
		result = std::string("LLM ") + (call.agg ? "AGG " : "") + QuoteIdentifier(call.model) + " (";
		args.push_back("PROMPT " + QuoteString(call.prompt ? call.prompt->Raw() : ""));
		if (call.source) {
			args.push_back(SourceToSQL(**call.source));
		}
	}
	if (!call.options.Empty()) {
		args.push_back("OPTIONS " + call.options.ToSQL());
	}
	return result + JoinList(args) + ")";
}

std::string ForeignKeyToSQL(const ForeignKeyDefinition &key) {
	return "FOREIGN KEY (" + QuoteIdentifier(key.column) + ") REFERENCES " + QuoteIdentifier(key.referenced_table) +
	       " (" + QuoteIdentifier(key.referenced_column) + ")";
}

std::string ToSQLImpl(const SelectStatement &select);

std::string StatementToSQL(const CreateModelStatement &stmt) {
	std::string result = std::string("CREATE ") + ModelTypeName(stmt.type) + " MODEL " + QuoteIdentifier(stmt.name) +
	                     " PATH " + QuoteString(stmt.path);
	if (stmt.on_prompt) {
		result += " ON PROMPT";
	}
	if (stmt.api) {
		result += " API " + QuoteString(*stmt.api);
	}
	if (stmt.secret) {
		result += " SECRET " + QuoteIdentifier(*stmt.secret);
	}
	if (stmt.table) {
		result += " ON TABLE " + QuoteIdentifier(*stmt.table);
	}
	if (!stmt.features.empty()) {
		std::vector<std::string> names;
		for (auto &feature : stmt.features) {
			names.push_back(QuoteIdentifier(feature));
		}
		result += " FEATURES (" + JoinList(names) + ")";
	}
	if (!stmt.outputs.empty()) {
		std::vector<std::string> columns;
		for (auto &column : stmt.outputs) {
			columns.push_back(QuoteIdentifier(column.name) + " " + TypeName(column.type));
		}
		result += " OUTPUT (" + JoinList(columns) + ")";
	}
	if (!stmt.options.Empty()) {
		result += " OPTIONS " + stmt.options.ToSQL();
	}
	return result;
}

std::string StatementToSQL(const CreateTableStatement &stmt) {
	std::string result = "CREATE TABLE " + QuoteIdentifier(stmt.name);
	if (stmt.query) {
		return result + " AS " + ToSQLImpl(**stmt.query);
	}
	std::vector<std::string> items;
	for (auto &column : stmt.columns) {
		items.push_back(QuoteIdentifier(column.name) + " " + TypeName(column.type));
	}
	if (stmt.primary_key) {
		items.push_back("PRIMARY KEY (" + QuoteIdentifier(*stmt.primary_key) + ")");
	}
	for (auto &key : stmt.foreign_keys) {
		items.push_back(ForeignKeyToSQL(key));
	}
	return result + " (" + JoinList(items) + ")";
}

std::string StatementToSQL(const InsertStatement &stmt) {
	std::string result = "INSERT INTO " + QuoteIdentifier(stmt.table);
	if (!stmt.columns.empty()) {
		std::vector<std::string> names;
		for (auto &column : stmt.columns) {
			names.push_back(QuoteIdentifier(column));
		}
		result += " (" + JoinList(names) + ")";
	}
	if (stmt.query) {
		return result + " " + ToSQLImpl(**stmt.query);
	}
	std::vector<std::string> rows;
	for (auto &row : stmt.rows) {
		std::vector<std::string> values;
		for (auto &value : row) {
			values.push_back(ToSQL(value));
		}
		rows.push_back("(" + JoinList(values) + ")");
	}
	return result + " VALUES " + JoinList(rows);
}

std::string StatementToSQL(const AlterTableStatement &stmt) {
	std::string result = "ALTER TABLE " + QuoteIdentifier(stmt.table) + " ADD ";
	if (stmt.primary_key) {
		return result + "PRIMARY KEY (" + QuoteIdentifier(*stmt.primary_key) + ")";
	}
	return result + ForeignKeyToSQL(*stmt.foreign_key);
}

std::string StatementToSQL(const SetStatement &stmt) {
	return "SET " + QuoteIdentifier(stmt.name) + " = " + OptionValueToSQL(stmt.value);
}

std::string StatementToSQL(const DropStatement &stmt) {
	return std::string("DROP ") + (stmt.type == DropType::Model ? "MODEL " : "TABLE ") +
	       (stmt.if_exists ? "IF EXISTS " : "") + QuoteIdentifier(stmt.name);
}

std::string StatementToSQL(const ExplainStatement &stmt) {
	const char *mode = stmt.type == ExplainType::Optimized ? "EXPLAIN OPTIMIZED "
	                   : stmt.type == ExplainType::Analyze ? "EXPLAIN ANALYZE "
	                                                       : "EXPLAIN ";
	return mode + ToSQLImpl(*stmt.query);
}

std::string StatementToSQL(const SelectStatement &stmt) {
	return ToSQLImpl(stmt);
}

std::string ToSQLImpl(const SelectStatement &select) {
	std::string result = select.distinct ? "SELECT DISTINCT " : "SELECT ";
	std::vector<std::string> items;
	for (auto &item : select.select_list) {
		items.push_back(ToSQL(item.expression) + AliasSuffix(item.alias));
	}
	result += JoinList(items);
	if (select.from) {
		result += " FROM " + ToSQL(*select.from);
	}
	if (select.where) {
		result += " WHERE " + ToSQL(*select.where);
	}
	if (!select.group_by.empty()) {
		std::vector<std::string> keys;
		for (auto &key : select.group_by) {
			keys.push_back(ToSQL(key));
		}
		result += " GROUP BY " + JoinList(keys);
	}
	if (select.having) {
		result += " HAVING " + ToSQL(*select.having);
	}
	if (!select.order_by.empty()) {
		std::vector<std::string> keys;
		for (auto &item : select.order_by) {
			keys.push_back(ToSQL(item.expression) + (item.descending ? " DESC" : ""));
		}
		result += " ORDER BY " + JoinList(keys);
	}
	if (select.limit) {
		result += " LIMIT " + std::to_string(*select.limit);
	}
	return result;
}

} // namespace

std::string QuoteIdentifier(const std::string &name) {
	auto letter = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || (c & 0x80); };
	bool plain = !name.empty() && letter(name[0]);
	for (char c : name) {
		if (!letter(c) && !std::isdigit(static_cast<unsigned char>(c)) && c != '$') {
			plain = false;
		}
	}
	if (plain && !IsReservedKeyword(string_util::Upper(name))) {
		return name;
	}
	std::string result = "\"";
	for (char c : name) {
		result += c;
		if (c == '"') {
			result += '"';
		}
	}
	return result + "\"";
}

std::string QuoteString(const std::string &text) {
	std::string result = "'";
	for (char c : text) {
		result += c;
		if (c == '\'') {
			result += '\'';
		}
	}
	return result + "'";
}

std::string ToSQL(const ParsedExpression &expression) {
	switch (expression.type) {
	case ExpressionType::Constant:
		return expression.value.ToSQLString();
	case ExpressionType::Column: {
		if (expression.quoted) {
			std::string result = "\"";
			for (char c : expression.column_name[0]) {
				result += c;
				if (c == '"') {
					result += '"';
				}
			}
			return result + "\"";
		}
		std::vector<std::string> parts;
		for (auto &part : expression.column_name) {
			parts.push_back(QuoteIdentifier(part));
		}
		return string_util::Join(parts, ".");
	}
	case ExpressionType::Star:
		return expression.column_name.empty() ? "*" : QuoteIdentifier(expression.column_name[0]) + ".*";
	case ExpressionType::Unary:
		if (expression.op == "NOT") {
			return "(NOT " + ToSQL(expression.children[0]) + ")";
		}
		return "(" + expression.op + " " + ToSQL(expression.children[0]) + ")";
	case ExpressionType::Binary:
		return "(" + ToSQL(expression.children[0]) + " " + expression.op + " " + ToSQL(expression.children[1]) + ")";
	case ExpressionType::IsNull:
		return "(" + ToSQL(expression.children[0]) + (expression.negated ? " IS NOT NULL)" : " IS NULL)");
	case ExpressionType::Function: {
		if (expression.star_argument) {
			return expression.op + "(*)";
		}
		std::vector<std::string> args;
		for (auto &child : expression.children) {
			args.push_back(ToSQL(child));
		}
		return expression.op + "(" + (expression.distinct ? "DISTINCT " : "") + JoinList(args) + ")";
	}
	case ExpressionType::Cast:
		return "CAST(" + ToSQL(expression.children[0]) + " AS " + TypeName(expression.cast_type) + ")";
	case ExpressionType::Semantic:
		return SemanticToSQL(**expression.semantic);
	}
	return "";
}

std::string ToSQL(const TableRef &ref) {
	switch (ref.type) {
	case TableRefType::Base:
		return QuoteIdentifier(ref.name) + AliasSuffix(ref.alias);
	case TableRefType::Subquery:
		return "(" + ToSQLImpl(**ref.subquery) + ")" + AliasSuffix(ref.alias);
	case TableRefType::Semantic:
		return SemanticToSQL(**ref.semantic) + AliasSuffix(ref.alias);
	case TableRefType::Join: {
		std::string left = ToSQL(**ref.left);
		std::string right = ToSQL(**ref.right);
		if ((*ref.right)->type == TableRefType::Join) {
			right = "(" + right + ")";
		}
		switch (ref.join_type) {
		case JoinType::Cross:
			return left + " CROSS JOIN " + right;
		case JoinType::Natural:
			return left + " NATURAL JOIN " + right;
		case JoinType::Inner:
			return left + " JOIN " + right + " ON " + ToSQL(*ref.condition);
		}
	}
	}
	return "";
}

std::string ToSQL(const SelectStatement &statement) {
	return ToSQLImpl(statement);
}

std::string ToSQL(const Statement &statement) {
	return std::visit([](const auto &stmt) { return StatementToSQL(stmt); }, statement);
}

} // namespace semaquery
