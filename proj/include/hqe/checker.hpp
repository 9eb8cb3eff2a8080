#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hqe/executor.hpp"
#include "hqe/oracle.hpp"

namespace hqe {

// Shape of randomized instances.  Values concentrate in narrow bands so
// join and filter predicates have a real chance of being satisfied;
// every band is overridable per column.
struct GenProfile {
    int default_rows = 8;
    std::map<std::string, int> rows_per_table;            // table -> rows
    long long band_span = 60;                             // ordinal width of the default band
    std::map<std::string, std::pair<Value, Value>> column_bands;  // "table.column" -> [lo, hi]
    std::vector<std::string> text_vocab = {"ivory",  "linen",  "navy",   "amber", "plum",
                                           "copper", "forest", "smoke",  "rose",  "slate"};
    int text_words = 2;
    double same_value_bias = 0.25;  // chance a cell repeats an earlier cell of its column
    // boundary values worth hitting exactly (literals of the query under
    // test and their step neighbors)
    std::map<std::string, std::vector<Value>> column_anchors;
    double anchor_bias = 0.2;
};

// Harvest comparison/list literals from a query into per-column anchors
// so generated instances exercise the exact decision boundaries.
void anchor_profile_to_query(GenProfile& profile, const Query& q, const SchemaCatalog& catalog);

// NULL-free instance honoring primary and foreign keys, deterministic
// per seed.
DatabaseState gen_random_db(const SchemaCatalog& catalog, uint64_t seed, const GenProfile& profile);

// Widen the profile's bands to the value ranges observed in a reference
// instance (plus margin), and harvest its text vocabulary.  Keeps the
// generated databases in the region where the hidden query's predicates
// actually discriminate.
void tune_profile_to_instance(GenProfile& profile, const DatabaseState& instance);

struct CheckVerdict {
    bool pass = true;
    int trials_run = 0;
    uint64_t counterexample_seed = 0;
    std::vector<std::string> diff;     // symmetric bag difference sample
    std::string error;                 // oracle failure diagnostics
};

// Probabilistic result-based equivalence: run both sides on randomized
// instances and bag-diff the outputs.  First nonempty diff wins; the
// seed replays it.
CheckVerdict result_equivalent(Oracle& oracle, const Query& extracted, const SchemaCatalog& catalog,
                               const GenProfile& profile, int trials, uint64_t seed);

// Replay bundle: regenerate the counterexample instance and dump it
// with both result sets and the diff.
void dump_counterexample(const std::string& dir, Oracle& oracle, const Query& extracted,
                         const SchemaCatalog& catalog, const GenProfile& profile,
                         uint64_t counterexample_seed);

}  // namespace hqe
