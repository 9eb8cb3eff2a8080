#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hqe/ast.hpp"
#include "hqe/mutate.hpp"
#include "hqe/oracle.hpp"
#include "hqe/union_extract.hpp"

namespace hqe {

struct ExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Table-qualified column identity used throughout extraction.
struct ColKey {
    std::string table;
    std::string column;
    std::string text() const { return table + "." + column; }
    auto operator<=>(const ColKey&) const = default;
};

// Satisfying-value interval of one attribute on the minimized database:
// the range of values under which the hidden query stays FIT.
struct SVI {
    ColKey col;
    Value lb, ub;
    bool lb_open = false, ub_open = false;       // bounds as probed are closed
    bool at_domain_min = false, at_domain_max = false;
    bool non_monotone = false;                   // hole between the bounds
    std::optional<ColKey> floats_with;           // bound tracks another column

    bool point() const { return !lb_open && !ub_open && compare(lb, ub) == 0; }
};

struct PredicateAtom {
    enum class Kind { Arith, Algebraic, Like, InList } kind;
    ColKey col;
    CmpOp op = CmpOp::Eq;
    Value constant;              // Arith
    ColKey rhs_col;              // Algebraic
    std::string pattern;         // Like
    std::vector<Value> literals; // InList
    std::string provenance;

    static PredicateAtom arith(ColKey c, CmpOp op, Value v, std::string prov);
    static PredicateAtom algebraic(ColKey a, CmpOp op, ColKey b, std::string prov);
    std::string text() const;
};

// Columns forced pairwise equal; joint bounds may be narrower than the
// shared domain when a filter rides on the equality class.
struct EqualityClique {
    std::vector<ColKey> members;  // sorted
    Value joint_lb, joint_ub;
    bool bounded_below = false, bounded_above = false;
};

// Outer-join participation of an optional table, recovered by the
// mismatch-all probe: un-keying every row of the table reproduces its
// voided result exactly.
struct LojLink {
    std::string optional_table;
    ColKey fk_col;     // on the optional side
    ColKey ref_col;    // on the required side
    ColKey escape_col; // column rendered in the IS NULL disjunct
    bool escape_active = false;
    bool pinned = false;  // D1 row matched during extraction
};

struct ProjectionSpec {
    std::string alias;
    std::optional<ColKey> source;
    std::optional<AggFunc> agg;   // COUNT with no source = COUNT(*)
    std::string note;
};

struct BranchSpec {
    TableSet tables;
    TableSet optional;
    std::vector<PredicateAtom> atoms;
    std::vector<EqualityClique> cliques;
    std::vector<LojLink> loj;
    std::vector<ProjectionSpec> projections;
    std::vector<ColKey> group_by;
    std::vector<std::pair<ColKey, bool>> order_by;  // (column, ascending)
    std::optional<long long> limit;
    bool grouped = false;
    std::vector<std::string> notes;  // ambiguities handed to synthesis
};

struct ExtractOptions {
    int max_in_literals = 16;
    bool detect_order_by = true;
    bool detect_limit = true;
};

// --- individual operations (the branch driver composes these) ---

// Binary-search bounds of one ordered column on the current minimized
// state.  Probing order: domain min, domain max, then bisection on the
// failing side(s); two midpoint probes flag non-monotone regions.
SVI extract_filter_bounds(Mutator& m, Oracle& oracle, const ColKey& col);

// Bounds for every ordered/categorical attribute of the given tables.
std::map<ColKey, SVI> compute_svi_all(Mutator& m, Oracle& oracle, const TableSet& tables);

struct IneqEdge {
    ColKey from, to;  // candidate from <= to
};

std::vector<IneqEdge> enumerate_inequality_candidates(const DatabaseState& d1,
                                                      const std::map<ColKey, SVI>& svi);

std::optional<PredicateAtom> confirm_inequality(Mutator& m, Oracle& oracle, const IneqEdge& edge,
                                                std::map<ColKey, SVI>& svi);

std::vector<EqualityClique> extract_equalities(Mutator& m, Oracle& oracle,
                                               const std::map<ColKey, SVI>& svi);

// Per-literal loop over the full (isolated) instance: record the
// satisfying literal from the current minimized database, suppress all
// rows carrying recorded literals, re-minimize, repeat until the result
// goes non-FIT.  One minimization round per literal by construction.
PredicateAtom extract_in_list(Mutator& m, Oracle& oracle, const ColKey& col,
                              const std::vector<std::string>& branch_tables,
                              const TableSet& optional_tables, const ExtractOptions& opts);

// Free-text probing: unconstrained / %-infix LIKE / exact equality.
std::optional<PredicateAtom> extract_text_predicate(Mutator& m, Oracle& oracle, const ColKey& col);

// Whole-branch extraction: isolation, outer-join recovery, minimize,
// SVE, predicate extraction, tail clauses, IN-list loops.  Leaves the
// database exactly as found.
BranchSpec extract_branch(Mutator& m, Oracle& oracle, const UnionFamily& family, size_t branch_idx,
                          const ExtractOptions& opts = {});

}  // namespace hqe
