#include "hqe/value.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace hqe {

namespace {

using int128 = __int128;

long long pow10_ll(int n) {
    long long p = 1;
    for (int i = 0; i < n; ++i) p *= 10;
    return p;
}

long long checked_narrow(int128 v, const char* what) {
    if (v > int128(INT64_MAX) || v < int128(INT64_MIN))
        throw EngineFault(std::string("numeric overflow in ") + what);
    return static_cast<long long>(v);
}

}  // namespace

Decimal Decimal::rescaled(int new_scale) const {
    if (new_scale < scale) throw EngineFault("decimal rescale would lose precision");
    int128 v = int128(unscaled);
    for (int i = scale; i < new_scale; ++i) v *= 10;
    return Decimal{checked_narrow(v, "rescale"), new_scale};
}

std::string Decimal::to_string() const {
    if (scale == 0) return std::to_string(unscaled);
    long long p = pow10_ll(scale);
    long long whole = unscaled / p;
    long long frac = unscaled % p;
    bool neg = unscaled < 0;
    if (frac < 0) frac = -frac;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%lld.%0*lld", (neg && whole == 0) ? "-" : "", whole, scale, frac);
    return buf;
}

Date Date::from_ymd(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    sys_days sd = sys_days(year{y} / month{m} / day{d});
    return Date{static_cast<int>(sd.time_since_epoch().count())};
}

std::optional<Date> Date::parse(const std::string& iso) {
    int y, m, d;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3) return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string Date::to_string() const {
    using namespace std::chrono;
    year_month_day ymd{sys_days{std::chrono::days{this->days}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

bool is_numeric(const Value& v) {
    return std::holds_alternative<long long>(v) || std::holds_alternative<Decimal>(v);
}

namespace {

// Common scale for mixed int/decimal comparison and arithmetic.
std::pair<int128, int128> align_numeric(const Value& a, const Value& b, int* out_scale) {
    auto parts = [](const Value& v) -> std::pair<int128, int> {
        if (const auto* i = std::get_if<long long>(&v)) return {int128(*i), 0};
        const auto& d = std::get<Decimal>(v);
        return {int128(d.unscaled), d.scale};
    };
    auto [ua, sa] = parts(a);
    auto [ub, sb] = parts(b);
    int s = std::max(sa, sb);
    for (int i = sa; i < s; ++i) ua *= 10;
    for (int i = sb; i < s; ++i) ub *= 10;
    if (out_scale) *out_scale = s;
    return {ua, ub};
}

}  // namespace

std::optional<int> compare(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return std::nullopt;
    if (is_numeric(a) && is_numeric(b)) {
        auto [ua, ub] = align_numeric(a, b, nullptr);
        return ua < ub ? -1 : (ua > ub ? 1 : 0);
    }
    if (std::holds_alternative<Date>(a) && std::holds_alternative<Date>(b)) {
        int da = std::get<Date>(a).days, db = std::get<Date>(b).days;
        return da < db ? -1 : (da > db ? 1 : 0);
    }
    if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
        int c = std::get<std::string>(a).compare(std::get<std::string>(b));
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    throw EngineFault("type mismatch in comparison: " + canonical_text(a) + " vs " + canonical_text(b));
}

bool same_cell(const Value& a, const Value& b) {
    if (is_null(a) && is_null(b)) return true;
    if (is_null(a) || is_null(b)) return false;
    return compare(a, b) == 0;
}

namespace {

Value numeric_result(int128 unscaled, int scale) {
    long long v = checked_narrow(unscaled, "arithmetic");
    if (scale == 0) return v;
    return Decimal{v, scale};
}

}  // namespace

Value add(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return std::monostate{};
    int s;
    auto [ua, ub] = align_numeric(a, b, &s);
    return numeric_result(ua + ub, s);
}

Value sub(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return std::monostate{};
    int s;
    auto [ua, ub] = align_numeric(a, b, &s);
    return numeric_result(ua - ub, s);
}

Value mul(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return std::monostate{};
    auto parts = [](const Value& v) -> std::pair<int128, int> {
        if (const auto* i = std::get_if<long long>(&v)) return {int128(*i), 0};
        const auto& d = std::get<Decimal>(v);
        return {int128(d.unscaled), d.scale};
    };
    auto [ua, sa] = parts(a);
    auto [ub, sb] = parts(b);
    return numeric_result(ua * ub, sa + sb);
}

Value divide(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return std::monostate{};
    int s;
    auto [ua, ub] = align_numeric(a, b, &s);
    if (ub == 0) throw EngineFault("division by zero");
    int out_scale = s + 4;
    int128 num = ua;
    for (int i = 0; i < out_scale; ++i) num *= 10;
    // round half away from zero
    int128 q = num / ub, r = num % ub;
    if (r != 0) {
        int128 twice = (r < 0 ? -r : r) * 2;
        int128 den = ub < 0 ? -ub : ub;
        if (twice >= den) q += ((num < 0) != (ub < 0)) ? -1 : 1;
    }
    // q currently has scale s + out_scale relative to ua/ub alignment;
    // ua and ub share scale s, so the quotient scale is out_scale.
    return numeric_result(q, out_scale);
}

std::string canonical_text(const Value& v) {
    if (is_null(v)) return "";
    if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
    if (const auto* d = std::get_if<Decimal>(&v)) {
        std::string s = d->to_string();
        if (s.find('.') != std::string::npos) {
            while (s.back() == '0') s.pop_back();
            if (s.back() == '.') s.pop_back();
        }
        return s;
    }
    if (const auto* dt = std::get_if<Date>(&v)) return dt->to_string();
    return std::get<std::string>(v);
}

std::string sql_literal(const Value& v) {
    if (is_null(v)) return "NULL";
    if (const auto* d = std::get_if<Decimal>(&v)) return d->to_string();
    if (const auto* s = std::get_if<std::string>(&v)) {
        std::string out = "'";
        for (char c : *s) {
            if (c == '\'') out += "''";
            else out += c;
        }
        out += "'";
        return out;
    }
    if (const auto* dt = std::get_if<Date>(&v)) return "'" + dt->to_string() + "'";
    return canonical_text(v);
}

}  // namespace hqe
