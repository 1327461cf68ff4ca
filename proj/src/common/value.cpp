#include "semaquery/common/value.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>

namespace semaquery {

const char *TypeName(LogicalType type) {
	switch (type) {
	case LogicalType::Null:
		return "NULL";
	case LogicalType::Boolean:
		return "BOOLEAN";
	case LogicalType::Integer:
		return "INTEGER";
	case LogicalType::Double:
		return "DOUBLE";
	case LogicalType::Varchar:
		return "VARCHAR";
	case LogicalType::Datetime:
		return "DATETIME";
	}
	return "INVALID";
}

std::optional<LogicalType> TypeFromName(std::string_view name) {
	auto upper = string_util::Upper(name);
	if (upper == "VARCHAR" || upper == "TEXT" || upper == "STRING") {
		return LogicalType::Varchar;
	}
	if (upper == "INTEGER" || upper == "INT" || upper == "BIGINT") {
		return LogicalType::Integer;
	}
	if (upper == "DOUBLE" || upper == "FLOAT" || upper == "REAL") {
		return LogicalType::Double;
	}
	if (upper == "DATETIME" || upper == "TIMESTAMP") {
		return LogicalType::Datetime;
	}
	if (upper == "BOOLEAN" || upper == "BOOL") {
		return LogicalType::Boolean;
	}
	return std::nullopt;
}

bool IsNumeric(LogicalType type) {
	return type == LogicalType::Integer || type == LogicalType::Double;
}

// ---------------------------------------------------------------------------
// Datetime
// ---------------------------------------------------------------------------
namespace {

constexpr int64_t kMicrosPerSecond = 1000000;
constexpr int64_t kSecondsPerDay = 86400;

// days since 1970-01-01 for a proleptic Gregorian date
int64_t DaysFromCivil(int64_t y, unsigned m, unsigned d) {
	y -= m <= 2;
	const int64_t era = (y >= 0 ? y : y - 399) / 400;
	const unsigned yoe = static_cast<unsigned>(y - era * 400);
	const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
	const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
	return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void CivilFromDays(int64_t z, int64_t &y, unsigned &m, unsigned &d) {
	z += 719468;
	const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
	const unsigned doe = static_cast<unsigned>(z - era * 146097);
	const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
	y = static_cast<int64_t>(yoe) + era * 400;
	const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
	const unsigned mp = (5 * doy + 2) / 153;
	d = doy - (153 * mp + 2) / 5 + 1;
	m = mp < 10 ? mp + 3 : mp - 9;
	y += m <= 2;
}

bool IsLeap(int64_t y) {
	return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned DaysInMonth(int64_t y, unsigned m) {
	static constexpr std::array<unsigned, 12> kDays {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
	return m == 2 && IsLeap(y) ? 29 : kDays[m - 1];
}

class Cursor {
public:
	explicit Cursor(std::string_view text) : text_(text) {
	}
	bool AtEnd() const {
		return pos_ >= text_.size();
	}
	char Peek() const {
		return AtEnd() ? '\0' : text_[pos_];
	}
	bool Consume(char c) {
		if (Peek() == c) {
			pos_++;
			return true;
		}
		return false;
	}
	//! Reads exactly n digits
	bool Digits(size_t n, int64_t &out) {
		if (pos_ + n > text_.size()) {
			return false;
		}
		int64_t value = 0;
		for (size_t i = 0; i < n; i++) {
			char c = text_[pos_ + i];
			if (!std::isdigit(static_cast<unsigned char>(c))) {
				return false;
			}
			value = value * 10 + (c - '0');
		}
		pos_ += n;
		out = value;
		return true;
	}
	//! Reads 1..max digits
	bool VarDigits(size_t max, int64_t &out, size_t &count) {
		count = 0;
		int64_t value = 0;
		while (count < max && !AtEnd() && std::isdigit(static_cast<unsigned char>(Peek()))) {
			value = value * 10 + (Peek() - '0');
			pos_++;
			count++;
		}
		out = value;
		return count > 0;
	}
	void SkipSpaces() {
		while (!AtEnd() && std::isspace(static_cast<unsigned char>(Peek()))) {
			pos_++;
		}
	}
	std::string_view Word() {
		size_t start = pos_;
		while (!AtEnd() && std::isalpha(static_cast<unsigned char>(Peek()))) {
			pos_++;
		}
		return text_.substr(start, pos_ - start);
	}

private:
	std::string_view text_;
	size_t pos_ = 0;
};

std::optional<Datetime> Compose(int64_t y, int64_t mo, int64_t d, int64_t h, int64_t mi, int64_t s, int64_t micros,
                                int64_t offset_seconds) {
	if (mo < 1 || mo > 12 || d < 1 || d > DaysInMonth(y, static_cast<unsigned>(mo)) || h > 23 || mi > 59 || s > 60) {
		return std::nullopt;
	}
	int64_t days = DaysFromCivil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
	int64_t seconds = days * kSecondsPerDay + h * 3600 + mi * 60 + s - offset_seconds;
	return Datetime {seconds * kMicrosPerSecond + micros};
}

} // namespace

std::optional<Datetime> ParseIsoDatetime(std::string_view input) {
	Cursor c(string_util::Trim(input));
	int64_t y, mo, d, h = 0, mi = 0, s = 0, micros = 0, offset = 0;
	if (!c.Digits(4, y) || !c.Consume('-') || !c.Digits(2, mo) || !c.Consume('-') || !c.Digits(2, d)) {
		return std::nullopt;
	}
	if (!c.AtEnd()) {
		if (!(c.Consume('T') || c.Consume('t') || c.Consume(' '))) {
			return std::nullopt;
		}
		if (!c.Digits(2, h) || !c.Consume(':') || !c.Digits(2, mi)) {
			return std::nullopt;
		}
		if (c.Consume(':')) {
			if (!c.Digits(2, s)) {
				return std::nullopt;
			}
			if (c.Consume('.') || c.Consume(',')) {
				int64_t frac;
				size_t count;
				if (!c.VarDigits(9, frac, count)) {
					return std::nullopt;
				}
				while (count < 6) {
					frac *= 10;
					count++;
				}
				while (count > 6) {
					frac /= 10;
					count--;
				}
				micros = frac;
			}
		}
		if (c.Consume('Z') || c.Consume('z')) {
			offset = 0;
		} else if (c.Peek() == '+' || c.Peek() == '-') {
			int sign = c.Peek() == '-' ? -1 : 1;
			c.Consume(c.Peek());
			int64_t oh, om = 0;
			if (!c.Digits(2, oh)) {
				return std::nullopt;
			}
			c.Consume(':');
			if (!c.AtEnd() && !c.Digits(2, om)) {
				return std::nullopt;
			}
			offset = sign * (oh * 3600 + om * 60);
		}
	}
	if (!c.AtEnd()) {
		return std::nullopt;
	}
	return Compose(y, mo, d, h, mi, s, micros, offset);
}

std::optional<Datetime> ParseRfc2822Datetime(std::string_view input) {
	static constexpr std::array<std::string_view, 12> kMonths {"jan", "feb", "mar", "apr", "may", "jun",
	                                                            "jul", "aug", "sep", "oct", "nov", "dec"};
	Cursor c(string_util::Trim(input));
	// optional day-of-week
	if (std::isalpha(static_cast<unsigned char>(c.Peek()))) {
		auto dow = c.Word();
		if (dow.size() != 3 || !c.Consume(',')) {
			return std::nullopt;
		}
		c.SkipSpaces();
	}
	int64_t d, y, h, mi, s = 0;
	size_t count;
	if (!c.VarDigits(2, d, count)) {
		return std::nullopt;
	}
	c.SkipSpaces();
	auto month_name = string_util::Lower(c.Word());
	int64_t mo = 0;
	for (size_t i = 0; i < kMonths.size(); i++) {
		if (month_name == kMonths[i]) {
			mo = static_cast<int64_t>(i) + 1;
		}
	}
	if (mo == 0) {
		return std::nullopt;
	}
	c.SkipSpaces();
	if (!c.Digits(4, y)) {
		return std::nullopt;
	}
	c.SkipSpaces();
	if (!c.Digits(2, h) || !c.Consume(':') || !c.Digits(2, mi)) {
		return std::nullopt;
	}
	if (c.Consume(':') && !c.Digits(2, s)) {
		return std::nullopt;
	}
	c.SkipSpaces();
	int64_t offset = 0;
	if (c.Peek() == '+' || c.Peek() == '-') {
		int sign = c.Peek() == '-' ? -1 : 1;
		c.Consume(c.Peek());
		int64_t oh, om;
		if (!c.Digits(2, oh) || !c.Digits(2, om)) {
			return std::nullopt;
		}
		offset = sign * (oh * 3600 + om * 60);
	} else {
		auto zone = string_util::Upper(c.Word());
		if (!(zone == "GMT" || zone == "UT" || zone == "UTC" || zone == "Z")) {
			return std::nullopt;
		}
	}
	if (!c.AtEnd()) {
		return std::nullopt;
	}
	return Compose(y, mo, d, h, mi, s, 0, offset);
}

std::string FormatDatetime(Datetime value) {
	int64_t micros = value.micros % kMicrosPerSecond;
	int64_t seconds = value.micros / kMicrosPerSecond;
	if (micros < 0) {
		micros += kMicrosPerSecond;
		seconds -= 1;
	}
	int64_t days = seconds / kSecondsPerDay;
	int64_t rem = seconds % kSecondsPerDay;
	if (rem < 0) {
		rem += kSecondsPerDay;
		days -= 1;
	}
	int64_t y;
	unsigned m, d;
	CivilFromDays(days, y, m, d);
	char buffer[64];
	int n = std::snprintf(buffer, sizeof(buffer), "%04lld-%02u-%02uT%02lld:%02lld:%02lld", static_cast<long long>(y), m,
	                      d, static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
	                      static_cast<long long>(rem % 60));
	std::string result(buffer, static_cast<size_t>(n));
	if (micros != 0) {
		std::snprintf(buffer, sizeof(buffer), ".%06lld", static_cast<long long>(micros));
		std::string frac(buffer);
		while (frac.back() == '0') {
			frac.pop_back();
		}
		result += frac;
	}
	result += "Z";
	return result;
}

// ---------------------------------------------------------------------------
// Value
// ---------------------------------------------------------------------------
std::string FormatDouble(double v) {
	char buffer[64];
	auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
	std::string result(buffer, ptr);
	if (std::isfinite(v) && result.find_first_of(".e") == std::string::npos) {
		result += ".0";
	}
	return result;
}

LogicalType Value::Type() const {
	switch (data_.index()) {
	case 0:
		return LogicalType::Null;
	case 1:
		return LogicalType::Boolean;
	case 2:
		return LogicalType::Integer;
	case 3:
		return LogicalType::Double;
	case 4:
		return LogicalType::Varchar;
	default:
		return LogicalType::Datetime;
	}
}

double Value::GetNumeric() const {
	if (auto i = std::get_if<int64_t>(&data_)) {
		return static_cast<double>(*i);
	}
	return std::get<double>(data_);
}

std::string Value::ToString() const {
	switch (Type()) {
	case LogicalType::Null:
		return "NULL";
	case LogicalType::Boolean:
		return GetBoolean() ? "true" : "false";
	case LogicalType::Integer:
		return std::to_string(GetInteger());
	case LogicalType::Double:
		return FormatDouble(GetDouble());
	case LogicalType::Varchar:
		return GetString();
	case LogicalType::Datetime:
		return FormatDatetime(GetDatetime());
	}
	return "";
}

std::string Value::ToSQLString() const {
	auto quote = [](const std::string &s) {
		std::string result = "'";
		for (char c : s) {
			if (c == '\'') {
				result += "''";
			} else {
				result += c;
			}
		}
		return result + "'";
	};
	switch (Type()) {
	case LogicalType::Null:
		return "NULL";
	case LogicalType::Boolean:
		return GetBoolean() ? "TRUE" : "FALSE";
	case LogicalType::Varchar:
		return quote(GetString());
	case LogicalType::Datetime:
		return quote(FormatDatetime(GetDatetime()));
	default:
		return ToString();
	}
}

std::optional<std::strong_ordering> Value::Compare(const Value &a, const Value &b) {
	if (a.IsNull() || b.IsNull()) {
		return std::nullopt;
	}
	auto ta = a.Type();
	auto tb = b.Type();
	if (IsNumeric(ta) && IsNumeric(tb)) {
		if (ta == LogicalType::Integer && tb == LogicalType::Integer) {
			return a.GetInteger() <=> b.GetInteger();
		}
		double x = a.GetNumeric();
		double y = b.GetNumeric();
		if (x < y) {
			return std::strong_ordering::less;
		}
		if (x > y) {
			return std::strong_ordering::greater;
		}
		return std::strong_ordering::equal;
	}
	if (ta != tb) {
		return std::nullopt;
	}
	switch (ta) {
	case LogicalType::Boolean:
		return static_cast<int>(a.GetBoolean()) <=> static_cast<int>(b.GetBoolean());
	case LogicalType::Varchar: {
		int cmp = a.GetString().compare(b.GetString());
		return cmp < 0 ? std::strong_ordering::less
		               : (cmp > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
	}
	case LogicalType::Datetime:
		return a.GetDatetime() <=> b.GetDatetime();
	default:
		return std::nullopt;
	}
}

bool Value::SortLess(const Value &a, const Value &b) {
	if (a.IsNull() || b.IsNull()) {
		return !a.IsNull() && b.IsNull();
	}
	auto cmp = Compare(a, b);
	if (cmp) {
		return *cmp == std::strong_ordering::less;
	}
	return static_cast<int>(a.Type()) < static_cast<int>(b.Type());
}

Value Value::CastAs(LogicalType target) const {
	if (IsNull() || Type() == target) {
		return *this;
	}
	auto fail = [&]() -> Value {
		throw ConversionException("cannot cast " + ToSQLString() + " to " + TypeName(target));
	};
	switch (target) {
	case LogicalType::Varchar:
		return Varchar(ToString());
	case LogicalType::Integer:
		if (Type() == LogicalType::Double) {
			double d = GetDouble();
			if (std::nearbyint(d) != d) {
				return fail();
			}
			return Integer(static_cast<int64_t>(d));
		}
		if (Type() == LogicalType::Boolean) {
			return Integer(GetBoolean() ? 1 : 0);
		}
		if (Type() == LogicalType::Varchar) {
			if (auto v = string_util::ParseInteger(string_util::Trim(GetString()))) {
				return Integer(*v);
			}
		}
		return fail();
	case LogicalType::Double:
		if (Type() == LogicalType::Integer) {
			return Double(static_cast<double>(GetInteger()));
		}
		if (Type() == LogicalType::Varchar) {
			if (auto v = string_util::ParseDouble(string_util::Trim(GetString()))) {
				return Double(*v);
			}
		}
		return fail();
	case LogicalType::Boolean:
		if (Type() == LogicalType::Varchar) {
			auto lower = string_util::Lower(string_util::Trim(GetString()));
			if (lower == "true") {
				return Boolean(true);
			}
			if (lower == "false") {
				return Boolean(false);
			}
		}
		return fail();
	case LogicalType::Datetime:
		if (Type() == LogicalType::Varchar) {
			if (auto v = ParseIsoDatetime(GetString())) {
				return Timestamp(*v);
			}
		}
		return fail();
	default:
		return fail();
	}
}

size_t Value::Hash() const {
	size_t seed = std::hash<size_t>()(data_.index());
	size_t h = 0;
	switch (Type()) {
	case LogicalType::Null:
		break;
	case LogicalType::Boolean:
		h = std::hash<bool>()(GetBoolean());
		break;
	case LogicalType::Integer:
		h = std::hash<int64_t>()(GetInteger());
		break;
	case LogicalType::Double:
		h = std::hash<double>()(GetDouble());
		break;
	case LogicalType::Varchar:
		h = std::hash<std::string>()(GetString());
		break;
	case LogicalType::Datetime:
		h = std::hash<int64_t>()(GetDatetime().micros);
		break;
	}
	return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

} // namespace semaquery
