#include "doctest.h"

#include <filesystem>

#include "hqe/checker.hpp"
#include "hqe/executor.hpp"
#include "hqe/util.hpp"
#include "hqe/parser.hpp"
#include "fixtures.hpp"

using namespace hqe;
using namespace hqe::testing;

namespace {

// Bands tuned so the running example's predicates are regularly
// satisfied on random instances (the knob the session config exposes).
GenProfile tuned_profile() {
    GenProfile p;
    p.default_rows = 8;
    p.rows_per_table = {{"region", 4},   {"nation", 6},   {"customer", 8}, {"orders", 16},
                        {"lineitem", 24}, {"supplier", 6}, {"part", 8},    {"partsupp", 12}};
    p.column_bands["customer.c_acctbal"] = {Decimal{0, 2}, Decimal{2000000, 2}};
    p.column_bands["supplier.s_acctbal"] = {Decimal{0, 2}, Decimal{1500000, 2}};
    p.column_bands["orders.o_totalprice"] = {Decimal{500000, 2}, Decimal{3000000, 2}};
    p.column_bands["lineitem.l_commitdate"] = {Date::from_ymd(1995, 6, 1),
                                               Date::from_ymd(1995, 6, 5)};
    p.column_bands["lineitem.l_receiptdate"] = {Date::from_ymd(1995, 6, 1),
                                                Date::from_ymd(1995, 6, 5)};
    p.column_bands["lineitem.l_shipdate"] = {Date::from_ymd(1994, 6, 1),
                                             Date::from_ymd(1996, 6, 1)};
    return p;
}

}  // namespace

TEST_CASE("instance generation is deterministic per seed") {
    SchemaCatalog cat = mini_catalog();
    GenProfile p = tuned_profile();
    CHECK(gen_random_db(cat, 42, p).digest() == gen_random_db(cat, 42, p).digest());
    CHECK(gen_random_db(cat, 42, p).digest() != gen_random_db(cat, 43, p).digest());
}

TEST_CASE("generated instances honor referential integrity") {
    SchemaCatalog cat = mini_catalog();
    GenProfile p = tuned_profile();
    p.rows_per_table = {{"region", 5},    {"nation", 8},    {"customer", 120}, {"orders", 240},
                        {"lineitem", 360}, {"supplier", 60}, {"part", 120},    {"partsupp", 150}};
    DatabaseState db = gen_random_db(cat, 7, p);
    long long total = 0;
    for (const auto& t : cat.tables) total += static_cast<long long>(db.row_count(t.name));
    CHECK(total >= 1000);
    for (const auto& t : cat.tables) {
        for (const auto& fk : t.foreign_keys) {
            int ci = t.column_index(fk.columns[0]);
            int pi = cat.table(fk.ref_table).column_index(fk.ref_columns[0]);
            for (const auto& sr : db.rows(t.name)) {
                bool found = false;
                for (const auto& pr : db.rows(fk.ref_table))
                    if (same_cell(sr.values[static_cast<size_t>(ci)],
                                  pr.values[static_cast<size_t>(pi)]))
                        found = true;
                CHECK(found);
            }
        }
    }
}

TEST_CASE("the running example stays satisfiable on tuned instances") {
    SchemaCatalog cat = mini_catalog();
    GenProfile p = tuned_profile();
    Query hidden = parse_sql(union_loj_hidden_text());
    int fit = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        DatabaseState db = gen_random_db(cat, seed, p);
        if (classify_fit(execute(hidden, db)) == FitClass::Fit) ++fit;
    }
    CHECK(fit >= 90);
}

TEST_CASE("an exact copy of the hidden query passes") {
    Oracle o = Oracle::embedded(parse_sql(union_loj_hidden_text()));
    CheckVerdict v = result_equivalent(o, parse_sql(union_loj_hidden_text()), mini_catalog(),
                                       tuned_profile(), 20, 5);
    CHECK(v.pass);
    CHECK(v.trials_run == 20);
}

TEST_CASE("mutants are rejected and counterexamples replay") {
    SchemaCatalog cat = mini_catalog();
    GenProfile p = tuned_profile();
    struct Mutant {
        const char* name;
        std::string hidden;
        std::string candidate;
    };
    std::vector<Mutant> mutants = {
        {"bound shift", lowbal_text(),
         "SELECT c_name AS name, c_phone AS phone FROM customer, orders "
         "WHERE c_custkey = o_custkey AND c_acctbal <= 9000.00"},
        {"dropped branch", union_loj_hidden_text(),
         "SELECT c_name AS name, c_phone AS phone FROM customer LEFT JOIN orders "
         "ON c_custkey = o_custkey WHERE c_acctbal <= 10000.00 OR o_orderkey IS NULL"},
        {"join-type swap", union_loj_hidden_text(), union_loj_inner_variant_text()},
        {"literal removal", membership_branch_text(),
         "SELECT s_name AS name, s_phone AS phone FROM supplier WHERE s_suppkey IN ("
         "SELECT l_suppkey FROM orders, lineitem WHERE l_orderkey = o_orderkey "
         "AND s_acctbal <= o_totalprice AND l_commitdate = l_receiptdate "
         "AND l_shipmode IN ('AIR'))"},
    };
    for (const auto& mut : mutants) {
        CAPTURE(mut.name);
        Oracle o = Oracle::embedded(parse_sql(mut.hidden));
        int killed = 0;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            CheckVerdict v =
                result_equivalent(o, parse_sql(mut.candidate), cat, p, 30, seed * 971);
            if (!v.pass) {
                ++killed;
                // soundness of rejection: the counterexample reproduces
                GenProfile anchored = p;
                anchor_profile_to_query(anchored, parse_sql(mut.candidate), cat);
                DatabaseState replay = gen_random_db(cat, v.counterexample_seed, anchored);
                ResultSet hidden_r = *o.invoke(replay).result;
                ResultSet cand_r = execute(parse_sql(mut.candidate), replay);
                CHECK(!multiset_equal(hidden_r, cand_r));
            }
        }
        CHECK(killed == 10);
    }
}

TEST_CASE("counterexample bundles land on disk") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "hqe_counterexample";
    fs::remove_all(dir);
    Oracle o = Oracle::embedded(parse_sql(lowbal_text()));
    Query wrong = parse_sql(
        "SELECT c_name AS name, c_phone AS phone FROM customer, orders "
        "WHERE c_custkey = o_custkey AND c_acctbal <= 9000.00");
    CheckVerdict v = result_equivalent(o, wrong, mini_catalog(), tuned_profile(), 30, 17);
    REQUIRE(!v.pass);
    dump_counterexample(dir.string(), o, wrong, mini_catalog(), tuned_profile(),
                        v.counterexample_seed);
    CHECK(fs::exists(dir / "instance" / "customer.csv"));
    CHECK(fs::exists(dir / "hidden_result.csv"));
    CHECK(fs::exists(dir / "extracted_result.csv"));
    CHECK(fs::exists(dir / "diff.txt"));
    CHECK(!read_file((dir / "diff.txt").string()).empty());
    fs::remove_all(dir);
}
