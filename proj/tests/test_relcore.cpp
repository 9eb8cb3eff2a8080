#include "doctest.h"

#include <filesystem>
#include <random>

#include "hqe/database.hpp"
#include "hqe/util.hpp"
#include "fixtures.hpp"

using namespace hqe;
using namespace hqe::testing;

TEST_CASE("fit classification") {
    ResultSet fit;
    fit.headers = {"name", "phone"};
    fit.rows = {{Value{std::string("Customer#000023074")}, Value{std::string("18-636-637-7498")}}};
    CHECK(classify_fit(fit) == FitClass::Fit);

    ResultSet empty;
    empty.headers = {"a"};
    CHECK(classify_fit(empty) == FitClass::Empty);

    ResultSet unfit;
    unfit.headers = {"a", "b"};
    unfit.rows = {{Value{std::monostate{}}, Value{5LL}}, {Value{3LL}, Value{std::monostate{}}}};
    CHECK(classify_fit(unfit) == FitClass::Unfit);
}

TEST_CASE("removing rows from an unfit result never makes it fit") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        ResultSet r;
        r.headers = {"a", "b"};
        size_t n = 1 + rng() % 6;
        for (size_t i = 0; i < n; ++i) {
            Row row{Value{static_cast<long long>(rng() % 10)}, Value{static_cast<long long>(rng() % 10)}};
            row[rng() % 2] = std::monostate{};  // every row carries a NULL
            r.rows.push_back(std::move(row));
        }
        REQUIRE(classify_fit(r) == FitClass::Unfit);
        while (r.rows.size() > 1) {
            r.rows.erase(r.rows.begin() + static_cast<long>(rng() % r.rows.size()));
            CHECK(classify_fit(r) != FitClass::Fit);
        }
    }
}

TEST_CASE("domain midpoints sit on the step grid") {
    AttrDomain dec = AttrDomain::decimal_domain(2, Decimal{-100000, 2}, Decimal{1000000, 2});
    Value mid = dec.midpoint(Decimal{0, 2}, Decimal{100000, 2});  // 0.00 .. 1000.00
    CHECK(canonical_text(mid) == "500");

    AttrDomain dec2 = AttrDomain::decimal_domain(2, Decimal{0, 2}, Decimal{10000000, 2});
    CHECK(canonical_text(dec2.midpoint(Decimal{0, 2}, Decimal{1000, 2})) == "5");  // 0.00..10.00 -> 5.00

    AttrDomain ints = AttrDomain::integer_domain(0, 100);
    CHECK(std::get<long long>(ints.midpoint(7LL, 7LL)) == 7);

    AttrDomain dates = AttrDomain::date_domain(Date::from_ymd(1990, 1, 1), Date::from_ymd(2030, 12, 31));
    Value dm = dates.midpoint(Date::from_ymd(1995, 1, 1), Date::from_ymd(1995, 12, 31));

    // independent calendar walk: count days month by month
    int month_days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};  // 1995 is not a leap year
    int target = (364) / 2;  // midpoint offset from Jan 1
    int m = 0, d = 1 + target;
    while (d > month_days[m]) {
        d -= month_days[m];
        ++m;
    }
    CHECK(std::get<Date>(dm).to_string() ==
          "1995-" + std::string(m + 1 < 10 ? "0" : "") + std::to_string(m + 1) + "-" +
              std::string(d < 10 ? "0" : "") + std::to_string(d));
    CHECK(std::get<Date>(dm).to_string() == "1995-07-02");
}

TEST_CASE("decimal values are exact on the grid") {
    Decimal d{1000000, 2};
    CHECK(d.to_string() == "10000.00");
    CHECK(canonical_text(Value{d}) == "10000");
    CHECK(same_cell(Value{d}, Value{10000LL}));
    CHECK(sql_literal(Value{Decimal{77484, 2}}) == "774.84");
}

TEST_CASE("mutation sequences revert to a byte-identical state") {
    std::mt19937_64 rng(42);
    DatabaseState db = lowbal_instance();
    std::string before = db.digest();
    for (int round = 0; round < 40; ++round) {
        std::vector<UndoToken> tokens;
        bool renamed = false;
        int n = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) {
            switch (rng() % 4) {
                case 0: tokens.push_back(db.void_tables({"orders"})); break;
                case 1:
                    if (renamed) { tokens.push_back(db.void_tables({"part"})); break; }
                    renamed = true;
                    tokens.push_back(db.rename_table("customer", "ghost" + std::to_string(round)));
                    break;
                case 2:
                    tokens.push_back(db.set_cell_first_row("customer", "c_acctbal", Decimal{1, 2}));
                    break;
                default: {
                    const auto& rows = db.rows("orders");
                    if (rows.empty()) {
                        tokens.push_back(db.void_tables({}));
                    } else {
                        tokens.push_back(db.delete_rows("orders", {rows.front().id}));
                    }
                }
            }
        }
        for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) db.undo(*it);
        CHECK(db.digest() == before);
    }
}

TEST_CASE("undo is strictly LIFO") {
    DatabaseState db = lowbal_instance();
    UndoToken a = db.void_tables({"orders"});
    UndoToken b = db.rename_table("customer", "ghost");
    CHECK_THROWS_AS(db.undo(a), MutationError);
    db.undo(b);
    db.undo(a);
}

TEST_CASE("initial instances must be NULL-free") {
    namespace fs = std::filesystem;
    SchemaCatalog cat = parse_ddl(
        "CREATE TABLE t (a INTEGER, b VARCHAR(10));");
    fs::path dir = fs::temp_directory_path() / "hqe_nullfree_test";
    fs::create_directories(dir);
    write_file((dir / "t.csv").string(), "a,b\n1,x\n,y\n");
    DatabaseState db(cat);
    CHECK_THROWS_AS(db.load_csv_dir(dir.string(), true), MutationError);
    // same file is fine when the NULL-free precondition is not demanded
    DatabaseState db2(cat);
    db2.load_csv_dir(dir.string(), false);
    CHECK(db2.row_count("t") == 2);
    fs::remove_all(dir);
}

TEST_CASE("csv dump/load round trip") {
    namespace fs = std::filesystem;
    DatabaseState db = lowbal_instance();
    fs::path dir = fs::temp_directory_path() / "hqe_csv_roundtrip";
    fs::remove_all(dir);
    db.dump_csv_dir(dir.string());
    DatabaseState loaded(db.catalog());
    loaded.load_csv_dir(dir.string(), true);
    CHECK(loaded.row_count("customer") == db.row_count("customer"));
    CHECK(loaded.row_count("orders") == db.row_count("orders"));
    // same cell values (row ids may differ, digests compare content per id;
    // fresh load re-ids from 1, as does the builder)
    CHECK(loaded.digest() == db.digest());
    fs::remove_all(dir);
}

TEST_CASE("ddl parser and domain sidecar") {
    SchemaCatalog cat = parse_ddl(
        "CREATE TABLE customer (\n"
        "  c_custkey INTEGER NOT NULL,\n"
        "  c_name VARCHAR(25),\n"
        "  c_acctbal DECIMAL(12,2),\n"
        "  c_date DATE,\n"
        "  PRIMARY KEY (c_custkey)\n"
        ");\n"
        "CREATE TABLE orders (\n"
        "  o_orderkey INTEGER,\n"
        "  o_custkey INTEGER,\n"
        "  PRIMARY KEY (o_orderkey),\n"
        "  FOREIGN KEY (o_custkey) REFERENCES customer (c_custkey)\n"
        ");");
    CHECK(cat.tables.size() == 2);
    CHECK(cat.table("customer").column("c_acctbal").domain.kind == DomainKind::Decimal);
    CHECK(cat.table("customer").column("c_acctbal").domain.scale == 2);
    CHECK(cat.table("orders").foreign_keys.size() == 1);

    apply_domain_sidecar(cat, R"({
        "customer.c_acctbal": {"min": "-999999.99", "max": "999999.99"},
        "customer.c_name": {"enum": ["alpha", "beta"]},
        "customer.c_date": {"min": "1992-01-01", "max": "1998-12-31"}
    })");
    const AttrDomain& bal = cat.table("customer").column("c_acctbal").domain;
    CHECK(canonical_text(bal.i_min) == "-999999.99");
    CHECK(cat.table("customer").column("c_name").domain.kind == DomainKind::TextCategorical);
    CHECK(cat.table("customer").column("c_date").domain.grid_size() ==
          (Date::from_ymd(1998, 12, 31).days - Date::from_ymd(1992, 1, 1).days + 1));

    CHECK_THROWS_AS(parse_ddl("CREATE TABLE t (a BLOB);"), SchemaError);
    CHECK_THROWS_AS(parse_ddl("CREATE TABLE t (a INTEGER, FOREIGN KEY (a) REFERENCES ghost (x));"),
                    SchemaError);
}

TEST_CASE("result digests ignore row order unless significant") {
    ResultSet a, b;
    a.headers = b.headers = {"x"};
    a.rows = {{Value{1LL}}, {Value{2LL}}};
    b.rows = {{Value{2LL}}, {Value{1LL}}};
    CHECK(a.digest() == b.digest());
    CHECK(multiset_equal(a, b));
    CHECK(!ordered_equal(a, b));
    b.order_significant = true;
    CHECK(a.digest() != b.digest());
}
