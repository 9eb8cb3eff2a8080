#include "hqe/resultset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hqe/util.hpp"

namespace hqe {

namespace {

std::string row_text(const Row& row) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const auto& v : row) {
        if (is_null(v)) fields.push_back("\\N");
        else fields.push_back(canonical_text(v));
    }
    return csv_line(fields);
}

std::vector<std::string> row_texts_sorted(const ResultSet& r) {
    std::vector<std::string> lines;
    lines.reserve(r.rows.size());
    for (const auto& row : r.rows) lines.push_back(row_text(row));
    if (!r.order_significant) std::sort(lines.begin(), lines.end());
    return lines;
}

}  // namespace

std::string ResultSet::digest() const {
    std::string blob = csv_line(headers);
    for (const auto& line : row_texts_sorted(*this)) blob += line;
    return sha256_hex(blob);
}

std::string ResultSet::to_csv() const {
    std::string out = csv_line(headers);
    for (const auto& row : rows) out += row_text(row);
    return out;
}

FitClass classify_fit(const ResultSet& r) {
    if (r.rows.empty()) return FitClass::Empty;
    for (const auto& row : r.rows) {
        bool has_null = false;
        for (const auto& v : row)
            if (is_null(v)) { has_null = true; break; }
        if (!has_null) return FitClass::Fit;
    }
    return FitClass::Unfit;
}

bool multiset_equal(const ResultSet& a, const ResultSet& b) {
    if (a.rows.size() != b.rows.size()) return false;
    std::multiset<std::string> ma, mb;
    for (const auto& row : a.rows) ma.insert(row_text(row));
    for (const auto& row : b.rows) mb.insert(row_text(row));
    return ma == mb;
}

bool ordered_equal(const ResultSet& a, const ResultSet& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (size_t i = 0; i < a.rows.size(); ++i)
        if (row_text(a.rows[i]) != row_text(b.rows[i])) return false;
    return true;
}

std::vector<std::string> bag_diff(const ResultSet& a, const ResultSet& b, size_t max_lines) {
    std::map<std::string, long long> counts;
    for (const auto& row : a.rows) counts[row_text(row)] += 1;
    for (const auto& row : b.rows) counts[row_text(row)] -= 1;
    std::vector<std::string> out;
    for (const auto& [text, n] : counts) {
        if (n == 0) continue;
        std::string line = (n > 0 ? "+" : "-") + std::to_string(n > 0 ? n : -n) + " " + text;
        if (!line.empty() && line.back() == '\n') line.pop_back();
        out.push_back(line);
        if (out.size() >= max_lines) break;
    }
    return out;
}

}  // namespace hqe
