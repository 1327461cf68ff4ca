#include "semaquery/common/exception.hpp"

namespace semaquery {

const char *ExceptionTypeName(ExceptionType type) {
	switch (type) {
	case ExceptionType::Catalog:
		return "Catalog";
	case ExceptionType::Parser:
		return "Parser";
	case ExceptionType::Binder:
		return "Binder";
	case ExceptionType::Conversion:
		return "Conversion";
	case ExceptionType::IO:
		return "IO";
	case ExceptionType::Config:
		return "Config";
	case ExceptionType::Backend:
		return "Backend";
	case ExceptionType::MalformedOutput:
		return "Malformed Output";
	case ExceptionType::RowCountMismatch:
		return "Row Count Mismatch";
	case ExceptionType::Execution:
		return "Execution";
	case ExceptionType::NotImplemented:
		return "Not Implemented";
	default:
		return "Invalid";
	}
}

Exception::Exception(ExceptionType type, const std::string &message)
    : std::runtime_error(std::string(ExceptionTypeName(type)) + " Error: " + message), type_(type),
      raw_message_(message) {
}

static std::string FormatPosition(const std::string &msg, SourcePosition pos) {
	return "at line " + std::to_string(pos.line) + ", column " + std::to_string(pos.column) + ": " + msg;
}

ParserException::ParserException(const std::string &msg, SourcePosition pos)
    : Exception(ExceptionType::Parser, FormatPosition(msg, pos)), pos_(pos) {
}

RowCountMismatchException::RowCountMismatchException(size_t expected, size_t actual)
    : Exception(ExceptionType::RowCountMismatch, "expected " + std::to_string(expected) + " output rows, got " +
                                                     std::to_string(actual)),
      expected_(expected), actual_(actual) {
}

} // namespace semaquery
