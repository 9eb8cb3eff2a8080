#pragma once

#include "hqe/predicate_extract.hpp"
#include "hqe/printer.hpp"

namespace hqe {

struct SeedOptions {
    ExtractOptions extract;
    AssignOptions assign;
};

struct SeedResult {
    UnionFamily family;
    std::vector<BranchSpec> branches;
    Query seed;
    std::string seed_digest;
    long long invocations = 0;
    double elapsed_ms = 0;
};

// Deterministic rebuild of the flat UNION ALL seed from per-branch
// clause sets: conjunctive blocks, outer-join degradations rendered as
// equi-joins with their IS NULL escapes, sorted clause ordering.
Query assemble_seed(const std::vector<BranchSpec>& branches, const SchemaCatalog& catalog);

// The reverse-engineering half end to end: table discovery, union
// family, per-branch extraction, seed assembly.
SeedResult run_seed_extraction(Mutator& m, Oracle& oracle, const SeedOptions& opts = {});

nlohmann::json seed_report(const SeedResult& r);

}  // namespace hqe
