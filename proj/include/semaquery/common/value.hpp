#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace semaquery {

enum class LogicalType : uint8_t { Null, Boolean, Integer, Double, Varchar, Datetime };

//! SQL spelling of a type ("VARCHAR", "BOOLEAN", ...)
const char *TypeName(LogicalType type);
//! Parses a type keyword. Accepts the aliases BOOL, INT, BIGINT, TEXT, STRING, FLOAT, TIMESTAMP.
std::optional<LogicalType> TypeFromName(std::string_view name);
bool IsNumeric(LogicalType type);

//! UTC timestamp with microsecond precision.
struct Datetime {
	int64_t micros = 0;
	auto operator<=>(const Datetime &) const = default;
};

//! Parses RFC-3339 / ISO-8601 ("2021-03-04", "2021-03-04T10:00:00Z", "2021-03-04 10:00:00.5+02:00").
std::optional<Datetime> ParseIsoDatetime(std::string_view text);
//! Parses RFC-2822 ("Thu, 04 Mar 2021 10:00:00 +0000", "04 Mar 2021 10:00 GMT").
std::optional<Datetime> ParseRfc2822Datetime(std::string_view text);
//! Emits ISO-8601 UTC, e.g. "2021-03-04T00:00:00Z"; fractional seconds only when nonzero.
std::string FormatDatetime(Datetime value);

class Value {
public:
	Value() = default;

	static Value Null() {
		return Value();
	}
	static Value Boolean(bool v) {
		return Value(Storage(v));
	}
	static Value Integer(int64_t v) {
		return Value(Storage(v));
	}
	static Value Double(double v) {
		return Value(Storage(v));
	}
	static Value Varchar(std::string v) {
		return Value(Storage(std::move(v)));
	}
	static Value Timestamp(Datetime v) {
		return Value(Storage(v));
	}

	LogicalType Type() const;
	bool IsNull() const {
		return std::holds_alternative<std::monostate>(data_);
	}

	bool GetBoolean() const {
		return std::get<bool>(data_);
	}
	int64_t GetInteger() const {
		return std::get<int64_t>(data_);
	}
	double GetDouble() const {
		return std::get<double>(data_);
	}
	const std::string &GetString() const {
		return std::get<std::string>(data_);
	}
	Datetime GetDatetime() const {
		return std::get<Datetime>(data_);
	}
	//! Integer or Double widened to double.
	double GetNumeric() const;

	//! Display form: NULL, true/false, integers, shortest round-trip doubles, raw strings, ISO timestamps.
	std::string ToString() const;
	//! SQL literal form ('it''s', NULL, TRUE, 1.5)
	std::string ToSQLString() const;

	//! Structural equality (NULL == NULL); used for grouping, hashing and tests.
	bool operator==(const Value &other) const = default;

	//! Total order over non-null values of comparable types (numeric types compare by value).
	//! Returns nullopt when either side is NULL or the types are not comparable.
	static std::optional<std::strong_ordering> Compare(const Value &a, const Value &b);
	//! Ordering used by ORDER BY: NULLs last, then Compare, incomparable types by type tag.
	static bool SortLess(const Value &a, const Value &b);

	//! Casts to the target type; throws ConversionException when not representable.
	Value CastAs(LogicalType target) const;

	size_t Hash() const;

private:
	using Storage = std::variant<std::monostate, bool, int64_t, double, std::string, Datetime>;
	explicit Value(Storage data) : data_(std::move(data)) {
	}
	Storage data_;
};

struct ValueHash {
	size_t operator()(const Value &v) const {
		return v.Hash();
	}
};

std::string FormatDouble(double v);

} // namespace semaquery
