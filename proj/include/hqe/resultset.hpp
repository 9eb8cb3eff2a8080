#pragma once

#include <string>
#include <vector>

#include "hqe/value.hpp"

namespace hqe {

using Row = std::vector<Value>;

enum class FitClass { Fit, Unfit, Empty };

// Ordered multiset of rows.  Row order is meaningful only when the
// producing query carried an ORDER BY; digests sort rows otherwise.
struct ResultSet {
    std::vector<std::string> headers;
    std::vector<Row> rows;
    bool order_significant = false;

    size_t size() const { return rows.size(); }
    std::string digest() const;
    std::string to_csv() const;
};

// FIT iff at least one row is free of NULLs; UNFIT iff rows exist but
// every one carries a NULL; EMPTY on zero rows.
FitClass classify_fit(const ResultSet& r);
inline bool is_fit(const ResultSet& r) { return classify_fit(r) == FitClass::Fit; }

bool multiset_equal(const ResultSet& a, const ResultSet& b);
// True when a and b agree under prefix-order comparison (used when the
// extracted query carries ORDER BY).
bool ordered_equal(const ResultSet& a, const ResultSet& b);
// Symmetric bag difference rendered as (sign, row-text) lines; empty
// when multisets match.
std::vector<std::string> bag_diff(const ResultSet& a, const ResultSet& b, size_t max_lines = 16);

}  // namespace hqe
