#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semaquery {

enum class ExceptionType : uint8_t {
	Invalid,
	Catalog,
	Parser,
	Binder,
	Conversion,
	IO,
	Config,
	Backend,
	MalformedOutput,
	RowCountMismatch,
	Execution,
	NotImplemented
};

const char *ExceptionTypeName(ExceptionType type);

class Exception : public std::runtime_error {
public:
	Exception(ExceptionType type, const std::string &message);

	ExceptionType Type() const {
		return type_;
	}
	//! The message without the "<Type> Error: " prefix
	const std::string &RawMessage() const {
		return raw_message_;
	}

private:
	ExceptionType type_;
	std::string raw_message_;
};

class CatalogException : public Exception {
public:
	explicit CatalogException(const std::string &msg) : Exception(ExceptionType::Catalog, msg) {
	}
};

//! Source position in a SQL text, 1-based.
struct SourcePosition {
	uint32_t line = 1;
	uint32_t column = 1;
	bool operator==(const SourcePosition &) const = default;
};

class ParserException : public Exception {
public:
	ParserException(const std::string &msg, SourcePosition pos);

	SourcePosition Position() const {
		return pos_;
	}

private:
	SourcePosition pos_;
};

class BinderException : public Exception {
public:
	explicit BinderException(const std::string &msg) : Exception(ExceptionType::Binder, msg) {
	}
};

class ConversionException : public Exception {
public:
	explicit ConversionException(const std::string &msg) : Exception(ExceptionType::Conversion, msg) {
	}
};

class IOException : public Exception {
public:
	explicit IOException(const std::string &msg) : Exception(ExceptionType::IO, msg) {
	}
};

class ConfigException : public Exception {
public:
	explicit ConfigException(const std::string &msg) : Exception(ExceptionType::Config, msg) {
	}
};

class ExecutionException : public Exception {
public:
	explicit ExecutionException(const std::string &msg) : Exception(ExceptionType::Execution, msg) {
	}
};

//! Raised by predictor backends. Retryable errors (timeouts, 5xx, scripted faults) may be
//! attempted again by the dispatcher; permanent ones are not.
class BackendException : public Exception {
public:
	BackendException(const std::string &msg, bool retryable)
	    : Exception(ExceptionType::Backend, msg), retryable_(retryable) {
	}

	bool Retryable() const {
		return retryable_;
	}

private:
	bool retryable_;
};

class MalformedOutputException : public Exception {
public:
	explicit MalformedOutputException(const std::string &msg) : Exception(ExceptionType::MalformedOutput, msg) {
	}
};

class RowCountMismatchException : public Exception {
public:
	RowCountMismatchException(size_t expected, size_t actual);

	size_t Expected() const {
		return expected_;
	}
	size_t Actual() const {
		return actual_;
	}

private:
	size_t expected_;
	size_t actual_;
};

} // namespace semaquery
