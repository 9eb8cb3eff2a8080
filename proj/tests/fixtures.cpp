#include "fixtures.hpp"

namespace hqe::testing {

namespace {

AttrDomain key_domain() { return AttrDomain::integer_domain(0, 10000000); }
AttrDomain money_domain() {
    return AttrDomain::decimal_domain(2, Decimal{-99999999, 2}, Decimal{99999999999, 2});
}
AttrDomain qty_domain() { return AttrDomain::integer_domain(0, 100000); }
AttrDomain date_domain() {
    return AttrDomain::date_domain(Date::from_ymd(1992, 1, 1), Date::from_ymd(2000, 12, 31));
}

}  // namespace

SchemaCatalog mini_catalog() {
    SchemaCatalog cat;

    TableSchema region;
    region.name = "region";
    region.columns = {{"r_regionkey", key_domain(), false},
                      {"r_name",
                       AttrDomain::categorical({"AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"}),
                       false}};
    region.primary_key = {"r_regionkey"};
    cat.tables.push_back(region);

    TableSchema nation;
    nation.name = "nation";
    nation.columns = {{"n_nationkey", key_domain(), false},
                      {"n_name",
                       AttrDomain::categorical({"BRAZIL", "CANADA", "FRANCE", "GERMANY", "INDIA",
                                                "JAPAN", "KENYA", "PERU"}),
                       false},
                      {"n_regionkey", key_domain(), false}};
    nation.primary_key = {"n_nationkey"};
    nation.foreign_keys = {{{"n_regionkey"}, "region", {"r_regionkey"}}};
    cat.tables.push_back(nation);

    TableSchema customer;
    customer.name = "customer";
    customer.columns = {{"c_custkey", key_domain(), false},
                        {"c_name", AttrDomain::text_free(), false},
                        {"c_phone", AttrDomain::text_free(), false},
                        {"c_acctbal", money_domain(), false},
                        {"c_nationkey", key_domain(), false},
                        {"c_mktsegment",
                         AttrDomain::categorical({"AUTOMOBILE", "BUILDING", "FURNITURE",
                                                  "HOUSEHOLD", "MACHINERY"}),
                         false}};
    customer.primary_key = {"c_custkey"};
    customer.foreign_keys = {{{"c_nationkey"}, "nation", {"n_nationkey"}}};
    cat.tables.push_back(customer);

    TableSchema orders;
    orders.name = "orders";
    orders.columns = {{"o_orderkey", key_domain(), false},
                      {"o_custkey", key_domain(), false},
                      {"o_totalprice", money_domain(), false},
                      {"o_orderdate", date_domain(), false},
                      {"o_orderstatus", AttrDomain::categorical({"F", "O", "P"}), false}};
    orders.primary_key = {"o_orderkey"};
    orders.foreign_keys = {{{"o_custkey"}, "customer", {"c_custkey"}}};
    cat.tables.push_back(orders);

    TableSchema supplier;
    supplier.name = "supplier";
    supplier.columns = {{"s_suppkey", key_domain(), false},
                        {"s_name", AttrDomain::text_free(), false},
                        {"s_phone", AttrDomain::text_free(), false},
                        {"s_acctbal", money_domain(), false},
                        {"s_nationkey", key_domain(), false}};
    supplier.primary_key = {"s_suppkey"};
    supplier.foreign_keys = {{{"s_nationkey"}, "nation", {"n_nationkey"}}};
    cat.tables.push_back(supplier);

    TableSchema part;
    part.name = "part";
    part.columns = {{"p_partkey", key_domain(), false},
                    {"p_name", AttrDomain::text_free(), false},
                    {"p_retailprice", money_domain(), false},
                    {"p_size", qty_domain(), false}};
    part.primary_key = {"p_partkey"};
    cat.tables.push_back(part);

    TableSchema lineitem;
    lineitem.name = "lineitem";
    lineitem.columns = {{"l_orderkey", key_domain(), false},
                        {"l_partkey", key_domain(), false},
                        {"l_suppkey", key_domain(), false},
                        {"l_linenumber", AttrDomain::integer_domain(1, 16), false},
                        {"l_quantity", qty_domain(), false},
                        {"l_extendedprice", money_domain(), false},
                        {"l_shipdate", date_domain(), false},
                        {"l_commitdate", date_domain(), false},
                        {"l_receiptdate", date_domain(), false},
                        {"l_shipmode",
                         AttrDomain::categorical({"AIR", "FOB", "MAIL", "RAIL", "REG AIR", "SHIP",
                                                  "TRUCK"}),
                         false}};
    lineitem.primary_key = {"l_orderkey", "l_linenumber"};
    lineitem.foreign_keys = {{{"l_orderkey"}, "orders", {"o_orderkey"}},
                             {{"l_partkey"}, "part", {"p_partkey"}},
                             {{"l_suppkey"}, "supplier", {"s_suppkey"}}};
    cat.tables.push_back(lineitem);

    TableSchema partsupp;
    partsupp.name = "partsupp";
    partsupp.columns = {{"ps_partkey", key_domain(), false},
                        {"ps_suppkey", key_domain(), false},
                        {"ps_availqty", qty_domain(), false},
                        {"ps_supplycost", money_domain(), false}};
    partsupp.primary_key = {"ps_partkey", "ps_suppkey"};
    partsupp.foreign_keys = {{{"ps_partkey"}, "part", {"p_partkey"}},
                             {{"ps_suppkey"}, "supplier", {"s_suppkey"}}};
    cat.tables.push_back(partsupp);

    cat.validate();
    return cat;
}

DataBuilder& DataBuilder::row(const std::string& table,
                              const std::vector<std::pair<std::string, Value>>& cells) {
    const TableSchema& schema = db_.catalog().table(table);
    Row r;
    for (const auto& col : schema.columns) {
        const Value* given = nullptr;
        for (const auto& [name, v] : cells)
            if (name == col.name) given = &v;
        if (given) {
            r.push_back(*given);
            continue;
        }
        // bland defaults inside the domain
        switch (col.domain.kind) {
            case DomainKind::Integer: r.push_back(std::get<long long>(col.domain.i_min)); break;
            case DomainKind::Decimal: r.push_back(std::get<Decimal>(col.domain.i_min)); break;
            case DomainKind::DateKind: r.push_back(std::get<Date>(col.domain.i_min)); break;
            case DomainKind::TextCategorical: r.push_back(col.domain.enum_values.front()); break;
            case DomainKind::TextFree: r.push_back(std::string("filler")); break;
        }
    }
    db_.insert_row(table, std::move(r));
    return *this;
}

namespace {

Decimal money(long long cents) { return Decimal{cents, 2}; }

}  // namespace

std::string lowbal_text() {
    return "SELECT c_name AS name, c_phone AS phone FROM customer, orders "
           "WHERE c_custkey = o_custkey AND c_acctbal <= 10000.00";
}

DatabaseState lowbal_instance() {
    DatabaseState db(mini_catalog());
    DataBuilder b(db);
    b.row("nation", {{"n_nationkey", 1LL}, {"n_name", std::string("FRANCE")}});
    // first customer is the low-balance joinable pair the example keeps
    b.row("customer", {{"c_custkey", 23074LL},
                       {"c_name", std::string("Customer#000023074")},
                       {"c_phone", std::string("18-636-637-7498")},
                       {"c_acctbal", money(77484)},
                       {"c_nationkey", 1LL}});
    b.row("customer", {{"c_custkey", 23075LL},
                       {"c_name", std::string("Customer#000023075")},
                       {"c_phone", std::string("27-100-000-0001")},
                       {"c_acctbal", money(1500000)},  // above the cap
                       {"c_nationkey", 1LL}});
    b.row("customer", {{"c_custkey", 23076LL},
                       {"c_name", std::string("Customer#000023076")},
                       {"c_phone", std::string("31-200-000-0002")},
                       {"c_acctbal", money(420000)},
                       {"c_nationkey", 1LL}});
    b.row("customer", {{"c_custkey", 23077LL},
                       {"c_name", std::string("Customer#000023077")},
                       {"c_phone", std::string("14-300-000-0003")},
                       {"c_acctbal", money(999999)},
                       {"c_nationkey", 1LL}});
    b.row("orders", {{"o_orderkey", 9001LL},
                     {"o_custkey", 23074LL},
                     {"o_totalprice", money(1200000)},
                     {"o_orderdate", Date::from_ymd(1995, 3, 4)}});
    b.row("orders", {{"o_orderkey", 9002LL},
                     {"o_custkey", 23075LL},
                     {"o_totalprice", money(340000)},
                     {"o_orderdate", Date::from_ymd(1996, 7, 9)}});
    b.row("orders", {{"o_orderkey", 9003LL},
                     {"o_custkey", 23076LL},
                     {"o_totalprice", money(89000)},
                     {"o_orderdate", Date::from_ymd(1994, 1, 21)}});
    b.row("orders", {{"o_orderkey", 9004LL},
                     {"o_custkey", 23077LL},
                     {"o_totalprice", money(50000)},
                     {"o_orderdate", Date::from_ymd(1993, 5, 2)}});
    db.assert_null_free();
    return db;
}

std::string union_loj_hidden_text() {
    return "SELECT * FROM ("
           "(SELECT c_name AS name, c_phone AS phone FROM customer LEFT JOIN orders "
           "ON c_custkey = o_custkey WHERE c_acctbal <= 10000.00 OR o_orderkey IS NULL) "
           "UNION ALL "
           "(SELECT s_name AS name, s_phone AS phone FROM supplier WHERE s_suppkey IN ("
           "SELECT l_suppkey FROM orders, lineitem WHERE l_orderkey = o_orderkey "
           "AND s_acctbal <= o_totalprice AND l_commitdate = l_receiptdate "
           "AND l_shipmode IN ('AIR', 'TRUCK')))"
           ") AS people GROUP BY name, phone";
}

std::string union_loj_inner_variant_text() {
    return "SELECT * FROM ("
           "(SELECT c_name AS name, c_phone AS phone FROM customer, orders "
           "WHERE c_custkey = o_custkey AND c_acctbal <= 10000.00) "
           "UNION ALL "
           "(SELECT s_name AS name, s_phone AS phone FROM supplier WHERE s_suppkey IN ("
           "SELECT l_suppkey FROM orders, lineitem WHERE l_orderkey = o_orderkey "
           "AND s_acctbal <= o_totalprice AND l_commitdate = l_receiptdate "
           "AND l_shipmode IN ('AIR', 'TRUCK')))"
           ") AS people GROUP BY name, phone";
}

std::string union_loj_final_text() {
    return "SELECT name, phone FROM ("
           "(SELECT c_name AS name, c_phone AS phone FROM customer c LEFT JOIN orders o "
           "ON c.c_custkey = o.o_custkey WHERE (c.c_acctbal <= 10000.00 OR o.o_orderkey IS NULL)) "
           "UNION ALL "
           "(SELECT s_name AS name, s_phone AS phone FROM supplier s WHERE s.s_suppkey IN ("
           "SELECT l_suppkey FROM lineitem l JOIN orders o ON l.l_orderkey = o.o_orderkey "
           "WHERE s.s_acctbal <= o.o_totalprice AND l.l_commitdate = l.l_receiptdate "
           "AND l.l_shipmode IN ('AIR', 'TRUCK')))"
           ") AS customer_supplier GROUP BY name, phone";
}

std::string union_loj_final_alt_text() {
    // same query modulo aliases, conjunct order, list order, join form
    return "SELECT name, phone FROM ("
           "(SELECT s_name AS name, s_phone AS phone FROM supplier WHERE s_suppkey IN ("
           "SELECT l_suppkey FROM lineitem, orders "
           "WHERE l_shipmode IN ('TRUCK', 'AIR') AND o_orderkey = l_orderkey "
           "AND l_receiptdate = l_commitdate AND o_totalprice >= s_acctbal)) "
           "UNION ALL "
           "(SELECT c_name AS name, c_phone AS phone FROM customer LEFT JOIN orders "
           "ON o_custkey = c_custkey WHERE (o_orderkey IS NULL OR c_acctbal <= 10000.00))"
           ") AS anything GROUP BY name, phone";
}

DatabaseState union_loj_instance() {
    DatabaseState db(mini_catalog());
    DataBuilder b(db);
    b.row("nation", {{"n_nationkey", 1LL}, {"n_name", std::string("FRANCE")}});

    // customers: low-balance matched pair first (the halving survivor),
    // a high-balance customer WITH orders (the outer-join witness), and
    // one with no orders at all
    b.row("customer", {{"c_custkey", 101LL}, {"c_name", std::string("Customer#000000101")},
                       {"c_phone", std::string("11-111-111-1111")}, {"c_acctbal", money(90000)},
                       {"c_nationkey", 1LL}});
    b.row("customer", {{"c_custkey", 102LL}, {"c_name", std::string("Customer#000000102")},
                       {"c_phone", std::string("22-222-222-2222")}, {"c_acctbal", money(2500000)},
                       {"c_nationkey", 1LL}});
    b.row("customer", {{"c_custkey", 103LL}, {"c_name", std::string("Customer#000000103")},
                       {"c_phone", std::string("33-333-333-3333")}, {"c_acctbal", money(5000000)},
                       {"c_nationkey", 1LL}});
    b.row("customer", {{"c_custkey", 104LL}, {"c_name", std::string("Customer#000000104")},
                       {"c_phone", std::string("44-444-444-4444")}, {"c_acctbal", money(312000)},
                       {"c_nationkey", 1LL}});

    b.row("orders", {{"o_orderkey", 501LL}, {"o_custkey", 101LL},
                     {"o_totalprice", money(800000)}, {"o_orderdate", Date::from_ymd(1995, 2, 2)}});
    b.row("orders", {{"o_orderkey", 502LL}, {"o_custkey", 102LL},
                     {"o_totalprice", money(1500000)}, {"o_orderdate", Date::from_ymd(1995, 6, 1)}});
    b.row("orders", {{"o_orderkey", 503LL}, {"o_custkey", 104LL},
                     {"o_totalprice", money(200000)}, {"o_orderdate", Date::from_ymd(1996, 3, 9)}});

    b.row("supplier", {{"s_suppkey", 71LL}, {"s_name", std::string("Supplier#000000071")},
                       {"s_phone", std::string("55-555-555-5555")}, {"s_acctbal", money(253046)},
                       {"s_nationkey", 1LL}});
    b.row("supplier", {{"s_suppkey", 72LL}, {"s_name", std::string("Supplier#000000072")},
                       {"s_phone", std::string("66-666-666-6666")}, {"s_acctbal", money(99999999)},
                       {"s_nationkey", 1LL}});

    // satisfying line items for supplier 71: one AIR, one TRUCK; a RAIL
    // row that satisfies nothing; keys join back to real orders
    b.row("lineitem", {{"l_orderkey", 501LL}, {"l_suppkey", 71LL}, {"l_linenumber", 1LL},
                       {"l_commitdate", Date::from_ymd(1995, 3, 16)},
                       {"l_receiptdate", Date::from_ymd(1995, 3, 16)},
                       {"l_shipmode", std::string("AIR")}});
    b.row("lineitem", {{"l_orderkey", 502LL}, {"l_suppkey", 71LL}, {"l_linenumber", 1LL},
                       {"l_commitdate", Date::from_ymd(1995, 8, 2)},
                       {"l_receiptdate", Date::from_ymd(1995, 8, 2)},
                       {"l_shipmode", std::string("TRUCK")}});
    b.row("lineitem", {{"l_orderkey", 503LL}, {"l_suppkey", 71LL}, {"l_linenumber", 1LL},
                       {"l_commitdate", Date::from_ymd(1996, 4, 1)},
                       {"l_receiptdate", Date::from_ymd(1996, 4, 1)},
                       {"l_shipmode", std::string("RAIL")}});
    db.assert_null_free();
    return db;
}

std::string membership_branch_text() {
    return "SELECT s_name AS name, s_phone AS phone FROM supplier WHERE s_suppkey IN ("
           "SELECT l_suppkey FROM orders, lineitem WHERE l_orderkey = o_orderkey "
           "AND s_acctbal <= o_totalprice AND l_commitdate = l_receiptdate "
           "AND l_shipmode IN ('AIR', 'TRUCK'))";
}

DatabaseState sve_single_row_instance() {
    DatabaseState db(mini_catalog());
    DataBuilder b(db);
    b.row("lineitem", {{"l_orderkey", 2739811LL}, {"l_suppkey", 1793LL}, {"l_linenumber", 1LL},
                       {"l_commitdate", Date::from_ymd(1995, 3, 16)},
                       {"l_receiptdate", Date::from_ymd(1995, 3, 16)},
                       {"l_shipmode", std::string("AIR")}});
    b.row("orders", {{"o_orderkey", 2739811LL}, {"o_custkey", 1LL},
                     {"o_totalprice", money(15097181)},
                     {"o_orderdate", Date::from_ymd(1995, 1, 1)}});
    b.row("supplier", {{"s_suppkey", 1793LL}, {"s_name", std::string("Supplier#000001793")},
                       {"s_phone", std::string("27-918-335-1736")},
                       {"s_acctbal", money(253046)}});
    db.assert_null_free();
    return db;
}

}  // namespace hqe::testing
