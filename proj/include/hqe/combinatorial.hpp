#pragma once

#include <optional>

#include "hqe/executor.hpp"
#include "hqe/journal.hpp"
#include "hqe/printer.hpp"

namespace hqe {

struct CombinatorialOptions {
    long long max_candidates = 10000;
};

struct CombinatorialResult {
    std::optional<Query> query;
    long long candidates_tried = 0;
    std::string failure;  // "exhausted" | "cap" | structural reason
};

// Last-resort enumerative synthesis: keep the nesting skeleton of the
// final prompted candidate fixed, redistribute the seed's tables (with
// their attached predicates) between the outer and inner blocks, and
// enumerate GROUP BY / outer-projection placements.  Deterministic
// order; first result-matching candidate wins.
CombinatorialResult combinatorial_synthesis(const Query& seed, const Query& skeleton,
                                            DatabaseState& instance, const ResultSet& hidden_result,
                                            const SchemaCatalog& catalog, Journal* journal,
                                            const CombinatorialOptions& opts = {});

}  // namespace hqe
