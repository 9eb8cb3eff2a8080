#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace hqe {

struct EngineFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed-point decimal: value = unscaled * 10^-scale.  Exact step-grid
// arithmetic matters here; binary searches must land on representable
// bounds like 10000.00, so no floating point anywhere in the data path.
struct Decimal {
    long long unscaled = 0;
    int scale = 0;

    static Decimal from_parts(long long unscaled, int scale) { return Decimal{unscaled, scale}; }
    // Rescale to a higher scale exactly; throws on overflow.
    Decimal rescaled(int new_scale) const;
    std::string to_string() const;
};

// Calendar date stored as days since 1970-01-01 so interval halving and
// step arithmetic are uniform with the numeric domains.
struct Date {
    int days = 0;

    static Date from_ymd(int y, unsigned m, unsigned d);
    static std::optional<Date> parse(const std::string& iso);  // YYYY-MM-DD
    std::string to_string() const;
    auto operator<=>(const Date&) const = default;
};

// NULL is monostate.  Text lives as plain std::string.
using Value = std::variant<std::monostate, long long, Decimal, Date, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

bool is_numeric(const Value& v);

// Three-valued comparison: nullopt when either side is NULL.
// Throws EngineFault on incomparable types (e.g. text vs date).
std::optional<int> compare(const Value& a, const Value& b);

// SQL equality for multiset/result comparison purposes: numeric values
// compare across int/decimal representations, NULLs are equal to NULLs.
bool same_cell(const Value& a, const Value& b);

// Arithmetic (int/decimal only).  Division produces a decimal with
// scale max(arg scales) + 4, rounded half away from zero; both the
// executor and the reference evaluator share these primitives so their
// results are bit-identical.
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value divide(const Value& a, const Value& b);

// Canonical text used for digests and CSV cells: decimals drop trailing
// fractional zeros, dates are ISO, NULL renders as empty string.
std::string canonical_text(const Value& v);

// SQL-literal rendering (strings quoted, NULL keyword).
std::string sql_literal(const Value& v);

}  // namespace hqe
