#pragma once

#include <set>
#include <string>
#include <vector>

#include "hqe/mutate.hpp"
#include "hqe/oracle.hpp"

namespace hqe {

struct AssumptionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using TableSet = std::set<std::string>;

struct BranchFrom {
    TableSet tables;
    // Subset of `tables` whose absence leaves the branch FIT (outer-join
    // padding suspects); they still belong to the branch's FROM.
    TableSet optional;
};

// The set algebra of union extraction, plus the per-branch outcome.
// core/side/max_side reflect the raw voiding lattice; common/aux are
// finalized after optional-table attachment so they describe the actual
// per-branch FROM sets.
struct UnionFamily {
    std::vector<std::string> t_h;            // EbE result, catalog order
    TableSet hard_common;                    // single-table voiding probe
    TableSet common;                         // intersection of final FROMs
    TableSet aux_all;                        // union of final per-branch aux
    std::vector<TableSet> core_tables;
    std::vector<TableSet> side_tables;
    std::vector<TableSet> max_side_tables;   // recomputed from final aux
    std::vector<TableSet> aux;               // final per-branch aux sets
    std::vector<BranchFrom> branches;
    long long void_probes = 0;               // lattice probes only
    long long lattice_size = 0;              // |powerset| - 2
};

// EbE: a table is present iff renaming it away makes the executable
// error out.  Schema restored after each probe.
std::vector<std::string> extract_tables_ebe(Mutator& m, Oracle& oracle);

// EbV single-table probe: t is common iff voiding t alone kills every
// branch (non-FIT result).
TableSet extract_common_tables(Mutator& m, Oracle& oracle, const std::vector<std::string>& t_h);

struct AssignOptions {
    int max_aux_tables = 12;  // power-set guard
};

// Algorithm: classify the power-set lattice of auxiliary tables into
// core/side by voiding (ascending by size, with the upward-closure
// shortcut), take maximal side members, and derive per-branch FROMs.
UnionFamily assign_tables(Mutator& m, Oracle& oracle, const std::vector<std::string>& t_h,
                          const TableSet& common, const AssignOptions& opts = {});

// Per-branch refinement: attach tables whose presence changes the
// isolated branch's result (outer-join participants invisible to the
// voiding lattice), mark within-branch voidable tables as optional, and
// recompute common/aux/max-side from the final FROM sets.
void augment_branches(Mutator& m, Oracle& oracle, UnionFamily& family);

// Voids every table outside fs so only the matching branch can produce
// FIT rows.
UndoToken isolate_subquery(Mutator& m, const TableSet& fs, const std::vector<std::string>& t_h);

}  // namespace hqe
