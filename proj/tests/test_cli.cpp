#include "doctest.h"

#include <filesystem>

#include "hqe/pipeline.hpp"
#include "hqe/util.hpp"
#include "fixtures.hpp"

using namespace hqe;
using namespace hqe::testing;

namespace {

namespace fs = std::filesystem;

// Writes a complete session bundle for the two-table example.
PipelineConfig make_bundle(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir / "data");

    write_file((dir / "schema.sql").string(),
               "CREATE TABLE customer (\n"
               "  c_custkey INTEGER NOT NULL,\n"
               "  c_name VARCHAR(32),\n"
               "  c_phone VARCHAR(32),\n"
               "  c_acctbal DECIMAL(12,2),\n"
               "  PRIMARY KEY (c_custkey)\n"
               ");\n"
               "CREATE TABLE orders (\n"
               "  o_orderkey INTEGER NOT NULL,\n"
               "  o_custkey INTEGER,\n"
               "  o_totalprice DECIMAL(12,2),\n"
               "  PRIMARY KEY (o_orderkey),\n"
               "  FOREIGN KEY (o_custkey) REFERENCES customer (c_custkey)\n"
               ");\n");
    write_file((dir / "domains.json").string(),
               R"({"customer.c_acctbal": {"min": "-999999.99", "max": "999999.99"},
                   "orders.o_totalprice": {"min": "0.00", "max": "999999.99"}})");
    write_file((dir / "data" / "customer.csv").string(),
               "c_custkey,c_name,c_phone,c_acctbal\n"
               "23074,Customer#000023074,18-636-637-7498,774.84\n"
               "23075,Customer#000023075,27-100-000-0001,15000.00\n"
               "23076,Customer#000023076,31-200-000-0002,4200.00\n"
               "23077,Customer#000023077,14-300-000-0003,9999.99\n");
    write_file((dir / "data" / "orders.csv").string(),
               "o_orderkey,o_custkey,o_totalprice\n"
               "9001,23074,12000.00\n"
               "9002,23075,3400.00\n"
               "9003,23076,890.00\n"
               "9004,23077,500.00\n");
    write_file((dir / "hidden.sql").string(),
               "SELECT c_name AS name, c_phone AS phone FROM customer, orders "
               "WHERE c_custkey = o_custkey AND c_acctbal <= 10000.00\n");
    write_file((dir / "description.txt").string(),
               "List the names and phone numbers of customers having orders whose account "
               "balance does not exceed a fixed threshold.\n");
    write_file((dir / "transcript.jsonl").string(),
               nlohmann::json{{"round", 1},
                              {"reply_sql",
                               "SELECT c_name AS name, c_phone AS phone FROM customer, orders "
                               "WHERE c_custkey = o_custkey AND c_acctbal <= 10000.00"}}
                   .dump() +
                   "\n");

    PipelineConfig cfg;
    cfg.schema_ddl = (dir / "schema.sql").string();
    cfg.schema_domains = (dir / "domains.json").string();
    cfg.data_dir = (dir / "data").string();
    cfg.oracle_mode = "embedded";
    cfg.oracle_hidden_sql = (dir / "hidden.sql").string();
    cfg.llm_mode = "mock";
    cfg.llm_transcript = (dir / "transcript.jsonl").string();
    cfg.description_path = (dir / "description.txt").string();
    cfg.out_dir = (dir / "out").string();
    cfg.checker_trials = 15;
    cfg.checker_rows = 6;
    return cfg;
}

}  // namespace

TEST_CASE("the full pipeline runs the bundled example end to end") {
    fs::path dir = fs::temp_directory_path() / "hqe_cli_bundle";
    PipelineConfig cfg = make_bundle(dir);

    std::string session;
    int code = run_extract(cfg, /*seed_only=*/false, &session);
    CHECK(code == 0);
    REQUIRE(fs::exists(fs::path(session) / "seed.sql"));
    REQUIRE(fs::exists(fs::path(session) / "final.sql"));
    REQUIRE(fs::exists(fs::path(session) / "journal.jsonl"));
    REQUIRE(fs::exists(fs::path(session) / "report.json"));

    auto report = nlohmann::json::parse(read_file(session + "/report.json"));
    CHECK(report.contains("timing_ms"));
    CHECK(report["timing_ms"].contains("reverse"));
    CHECK(report["timing_ms"].contains("forward"));
    CHECK(report["invocations"].contains("reverse"));
    CHECK(report["checker"]["pass"].get<bool>());

    SUBCASE("seed-only stops before synthesis") {
        std::string session2;
        CHECK(run_extract(cfg, true, &session2) == 0);
        CHECK(fs::exists(fs::path(session2) / "seed.sql"));
        auto rep2 = nlohmann::json::parse(read_file(session2 + "/report.json"));
        CHECK(!rep2.contains("checker"));
    }
    SUBCASE("checking the recovered query against the oracle") {
        CHECK(run_check(cfg, session + "/final.sql") == 0);
        // a wrong query earns the counterexample exit code
        write_file((dir / "wrong.sql").string(),
                   "SELECT c_name AS name, c_phone AS phone FROM customer, orders "
                   "WHERE c_custkey = o_custkey AND c_acctbal <= 9000.00\n");
        CHECK(run_check(cfg, (dir / "wrong.sql").string()) == 2);
    }
    SUBCASE("journals replay with identical digests") {
        CHECK(run_replay(cfg, session) == 0);
    }
    SUBCASE("instance generation writes loadable CSVs") {
        fs::path gen = dir / "generated";
        CHECK(run_gen_db(cfg, 11, gen.string()) == 0);
        SchemaCatalog cat = parse_ddl(read_file(cfg.schema_ddl));
        apply_domain_sidecar(cat, read_file(cfg.schema_domains));
        DatabaseState db(cat);
        db.load_csv_dir(gen.string(), true);
        CHECK(db.row_count("customer") > 0);
    }
    SUBCASE("the corpus command tabulates per-query outcomes") {
        fs::path corpus = dir / "corpus";
        fs::create_directories(corpus);
        write_file((corpus / "q_low_balance.sql").string(), read_file((dir / "hidden.sql").string()));
        write_file((corpus / "q_projection.sql").string(), "SELECT c_name AS n FROM customer\n");
        write_file((corpus / "q_window.sql").string(),
                   "SELECT o_orderkey AS k FROM orders WHERE o_totalprice >= 600.00 "
                   "AND o_totalprice <= 5000.00\n");
        CHECK(run_corpus(cfg, corpus.string()) == 0);
    }

    fs::remove_all(dir);
}

TEST_CASE("configuration errors exit with the scope code") {
    PipelineConfig cfg;
    cfg.schema_ddl = "/nonexistent/schema.sql";
    CHECK(run_extract(cfg, false) == 3);
    CHECK(run_check(cfg, "/nonexistent/q.sql") == 3);
}
