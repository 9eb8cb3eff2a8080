#include "query_gen.hpp"

#include <algorithm>

#include "hqe/checker.hpp"
#include "hqe/executor.hpp"
#include "hqe/printer.hpp"
#include "fixtures.hpp"

namespace hqe::testing {

namespace {

struct JoinEdge {
    std::string a, b;          // tables
    std::string ca, cb;        // join columns (a-side, b-side)
};

const std::vector<JoinEdge>& join_graph() {
    static const std::vector<JoinEdge> edges = {
        {"customer", "orders", "c_custkey", "o_custkey"},
        {"orders", "lineitem", "o_orderkey", "l_orderkey"},
        {"supplier", "lineitem", "s_suppkey", "l_suppkey"},
        {"part", "lineitem", "p_partkey", "l_partkey"},
        {"nation", "customer", "n_nationkey", "c_nationkey"},
        {"nation", "supplier", "n_nationkey", "s_nationkey"},
        {"region", "nation", "r_regionkey", "n_regionkey"},
        {"part", "partsupp", "p_partkey", "ps_partkey"},
        {"supplier", "partsupp", "s_suppkey", "ps_suppkey"},
    };
    return edges;
}

struct FilterCol {
    std::string table, column;
};

const std::vector<FilterCol>& range_filter_columns() {
    static const std::vector<FilterCol> cols = {
        {"customer", "c_acctbal"},   {"orders", "o_totalprice"}, {"orders", "o_orderdate"},
        {"lineitem", "l_quantity"},  {"lineitem", "l_shipdate"}, {"lineitem", "l_extendedprice"},
        {"part", "p_retailprice"},   {"part", "p_size"},         {"partsupp", "ps_availqty"},
        {"partsupp", "ps_supplycost"}, {"supplier", "s_acctbal"},
    };
    return cols;
}

const std::vector<FilterCol>& categorical_columns() {
    static const std::vector<FilterCol> cols = {
        {"lineitem", "l_shipmode"},
        {"orders", "o_orderstatus"},
        {"customer", "c_mktsegment"},
        {"nation", "n_name"},
    };
    return cols;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[rng() % v.size()];
}

Value cell_of(const DatabaseState& db, const std::string& table, const std::string& column,
              size_t row_idx) {
    const auto& rows = db.rows(table);
    const TableSchema& ts = db.catalog().table(table);
    return rows[row_idx % rows.size()].values[static_cast<size_t>(ts.column_index(column))];
}

ColumnRef bare(const std::string& column) { return ColumnRef{"", column}; }

}  // namespace

DatabaseState gen_instance(uint64_t seed, int scale_rows) {
    GenProfile profile;
    profile.default_rows = scale_rows;
    profile.rows_per_table = {
        {"region", 5},
        {"nation", 8},
        {"customer", scale_rows},
        {"orders", scale_rows * 2},
        {"lineitem", scale_rows * 3},
        {"supplier", std::max(3, scale_rows / 2)},
        {"part", scale_rows},
        {"partsupp", scale_rows * 2},
    };
    return gen_random_db(mini_catalog(), seed, profile);
}

Query gen_flat_hidden(std::mt19937_64& rng, const DatabaseState& instance) {
    const SchemaCatalog& catalog = instance.catalog();
    for (int attempt = 0; attempt < 60; ++attempt) {
        // --- choose connected tables along the FK graph ---
        std::vector<std::string> tables{pick(rng, std::vector<std::string>{
                                            "customer", "orders", "lineitem", "supplier", "part"})};
        std::vector<JoinEdge> used_edges;
        int extra = static_cast<int>(rng() % 3);
        for (int i = 0; i < extra; ++i) {
            std::vector<JoinEdge> touching;
            for (const auto& e : join_graph()) {
                bool has_a = std::count(tables.begin(), tables.end(), e.a);
                bool has_b = std::count(tables.begin(), tables.end(), e.b);
                if (has_a != has_b) touching.push_back(e);
            }
            if (touching.empty()) break;
            JoinEdge e = pick(rng, touching);
            tables.push_back(std::count(tables.begin(), tables.end(), e.a) ? e.b : e.a);
            used_edges.push_back(e);
        }
        std::sort(tables.begin(), tables.end());

        auto in_query = [&](const std::string& t) {
            return std::count(tables.begin(), tables.end(), t) > 0;
        };

        QueryBlock b;
        for (const auto& t : tables) b.from.push_back(FromItem{t, nullptr, "", JoinKind::Cross, {}});
        std::vector<Pred> conjuncts;
        for (const auto& e : used_edges)
            conjuncts.push_back(Pred::make_cmp(Expr::make_column(bare(e.ca)), CmpOp::Eq,
                                               Expr::make_column(bare(e.cb))));

        std::set<std::string> filtered_cols;   // "table.column"
        std::set<std::string> eq_filtered;     // point-pinned columns

        // --- range filters ---
        int n_filters = static_cast<int>(rng() % 3);
        for (int i = 0; i < n_filters; ++i) {
            FilterCol fc = pick(rng, range_filter_columns());
            if (!in_query(fc.table)) continue;
            if (filtered_cols.count(fc.table + "." + fc.column)) continue;
            Value pivot = cell_of(instance, fc.table, fc.column, rng());
            int roll = static_cast<int>(rng() % 5);
            if (roll == 0) {
                conjuncts.push_back(Pred::make_cmp(Expr::make_column(bare(fc.column)), CmpOp::Eq,
                                                   Expr::make_literal(pivot)));
                eq_filtered.insert(fc.table + "." + fc.column);
            } else {
                CmpOp op = roll == 1 ? CmpOp::Le : roll == 2 ? CmpOp::Ge : roll == 3 ? CmpOp::Lt
                                                                                     : CmpOp::Gt;
                conjuncts.push_back(Pred::make_cmp(Expr::make_column(bare(fc.column)), op,
                                                   Expr::make_literal(pivot)));
            }
            filtered_cols.insert(fc.table + "." + fc.column);
        }

        // --- one algebraic comparison between money columns ---
        bool algebraic = rng() % 5 == 0 && tables.size() >= 2;
        if (algebraic) {
            std::vector<std::pair<FilterCol, FilterCol>> options;
            std::vector<FilterCol> money;
            for (const auto& fc : range_filter_columns()) {
                if (!in_query(fc.table)) continue;
                if (filtered_cols.count(fc.table + "." + fc.column)) continue;
                const AttrDomain& d = catalog.table(fc.table).column(fc.column).domain;
                if (d.kind == DomainKind::Decimal) money.push_back(fc);
            }
            for (const auto& x : money)
                for (const auto& y : money)
                    if (x.table != y.table) options.push_back({x, y});
            if (!options.empty()) {
                auto [x, y] = pick(rng, options);
                conjuncts.push_back(Pred::make_cmp(Expr::make_column(bare(x.column)), CmpOp::Le,
                                                   Expr::make_column(bare(y.column))));
                filtered_cols.insert(x.table + "." + x.column);
                filtered_cols.insert(y.table + "." + y.column);
            }
        }

        // --- categorical equality / IN ---
        if (rng() % 3 == 0) {
            FilterCol fc = pick(rng, categorical_columns());
            if (in_query(fc.table)) {
                std::set<std::string> present;
                const TableSchema& ts = catalog.table(fc.table);
                int ci = ts.column_index(fc.column);
                for (const auto& sr : instance.rows(fc.table))
                    present.insert(std::get<std::string>(sr.values[static_cast<size_t>(ci)]));
                std::vector<std::string> vals(present.begin(), present.end());
                if (!vals.empty()) {
                    size_t n = 1 + rng() % std::min<size_t>(3, vals.size());
                    std::vector<Value> lits;
                    for (size_t i = 0; i < n; ++i) lits.push_back(Value{vals[(rng() + i) % vals.size()]});
                    std::sort(lits.begin(), lits.end(), [](const Value& a, const Value& b) {
                        return sql_literal(a) < sql_literal(b);
                    });
                    lits.erase(std::unique(lits.begin(), lits.end(),
                                           [](const Value& a, const Value& b) {
                                               return same_cell(a, b);
                                           }),
                               lits.end());
                    if (lits.size() == 1)
                        conjuncts.push_back(Pred::make_cmp(Expr::make_column(bare(fc.column)),
                                                           CmpOp::Eq, Expr::make_literal(lits[0])));
                    else
                        conjuncts.push_back(Pred::make_in_list(bare(fc.column), lits));
                    filtered_cols.insert(fc.table + "." + fc.column);
                    eq_filtered.insert(fc.table + "." + fc.column);
                }
            }
        }

        // --- LIKE on free text ---
        if (in_query("part") && rng() % 6 == 0) {
            std::set<std::string> words;
            const TableSchema& ts = catalog.table("part");
            int ci = ts.column_index("p_name");
            for (const auto& sr : instance.rows("part")) {
                const std::string& s = std::get<std::string>(sr.values[static_cast<size_t>(ci)]);
                size_t sp = s.find(' ');
                words.insert(sp == std::string::npos ? s : s.substr(0, sp));
            }
            if (!words.empty()) {
                std::vector<std::string> w(words.begin(), words.end());
                conjuncts.push_back(Pred::make_like(bare("p_name"), "%" + pick(rng, w) + "%"));
                filtered_cols.insert("part.p_name");
                eq_filtered.insert("part.p_name");
            }
        }

        // --- projections ---
        std::vector<FilterCol> projectable;
        std::set<std::string> join_cols;
        for (const auto& e : used_edges) {
            join_cols.insert(e.a + "." + e.ca);
            join_cols.insert(e.b + "." + e.cb);
        }
        for (const auto& t : tables) {
            for (const auto& col : catalog.table(t).columns) {
                std::string key = t + "." + col.name;
                if (eq_filtered.count(key)) continue;
                projectable.push_back({t, col.name});
            }
        }
        if (projectable.empty()) continue;

        bool grouped = rng() % 10 < 3;
        bool scalar_agg = !grouped && rng() % 10 == 0;

        std::vector<FilterCol> identity_proj;
        size_t n_proj = 1 + rng() % 3;
        for (size_t i = 0; i < n_proj; ++i) {
            FilterCol fc = pick(rng, projectable);
            bool dup = false;
            for (const auto& p : identity_proj)
                if (p.table == fc.table && p.column == fc.column) dup = true;
            if (!dup) identity_proj.push_back(fc);
        }

        auto numeric_source = [&]() -> std::optional<FilterCol> {
            std::vector<FilterCol> cands;
            for (const auto& fc : range_filter_columns()) {
                if (!in_query(fc.table)) continue;
                if (filtered_cols.count(fc.table + "." + fc.column)) continue;
                if (join_cols.count(fc.table + "." + fc.column)) continue;
                const AttrDomain& d = catalog.table(fc.table).column(fc.column).domain;
                if (d.kind == DomainKind::Decimal || d.kind == DomainKind::Integer)
                    cands.push_back(fc);
            }
            if (cands.empty()) return std::nullopt;
            return pick(rng, cands);
        };

        if (scalar_agg) {
            auto src = numeric_source();
            if (!src) continue;
            AggFunc f = pick(rng, std::vector<AggFunc>{AggFunc::Sum, AggFunc::Min, AggFunc::Max,
                                                       AggFunc::Avg});
            b.select.push_back(
                SelectItem{Expr::make_agg(f, Expr::make_column(bare(src->column))), "agg1"});
        } else {
            for (size_t i = 0; i < identity_proj.size(); ++i)
                b.select.push_back(SelectItem{Expr::make_column(bare(identity_proj[i].column)),
                                              "p" + std::to_string(i + 1)});
            if (grouped) {
                for (const auto& p : identity_proj) b.group_by.push_back(bare(p.column));
                auto src = numeric_source();
                AggFunc f = pick(rng, std::vector<AggFunc>{AggFunc::Sum, AggFunc::Count,
                                                           AggFunc::Min, AggFunc::Max, AggFunc::Avg});
                if (f == AggFunc::Count || !src) {
                    b.select.push_back(SelectItem{Expr::make_agg(AggFunc::Count, std::nullopt), "agg1"});
                } else {
                    b.select.push_back(
                        SelectItem{Expr::make_agg(f, Expr::make_column(bare(src->column))), "agg1"});
                }
            }
        }

        // --- order by / limit ---
        bool want_limit = !scalar_agg && rng() % 7 == 0;
        if (want_limit) {
            // a unique leading key keeps the prefix deterministic
            std::string pk_table = tables[rng() % tables.size()];
            const auto& pk = catalog.table(pk_table).primary_key;
            if (pk.size() != 1) want_limit = false;
            else {
                std::string pk_col = pk[0];
                std::string key = pk_table + "." + pk_col;
                if (eq_filtered.count(key)) {
                    want_limit = false;
                } else {
                    bool already = false;
                    for (const auto& s : b.select)
                        if (s.expr.kind == Expr::Column && s.expr.column.column == pk_col)
                            already = true;
                    if (!already && !scalar_agg) {
                        b.select.push_back(SelectItem{Expr::make_column(bare(pk_col)),
                                                      "p" + std::to_string(b.select.size() + 1)});
                        if (grouped) b.group_by.push_back(bare(pk_col));
                    }
                    b.order_by.push_back(OrderItem{bare(pk_col), rng() % 2 == 0});
                    b.limit = 4 + static_cast<long long>(rng() % 5);
                }
            }
        } else if (!scalar_agg && rng() % 5 == 0 && !identity_proj.empty()) {
            b.order_by.push_back(OrderItem{bare(identity_proj[0].column), rng() % 2 == 0});
        }

        if (!conjuncts.empty())
            b.where = conjuncts.size() == 1 ? conjuncts.front() : Pred::make_and(conjuncts);

        Query q{{b}};
        try {
            ResultSet r = execute(q, instance);
            if (classify_fit(r) != FitClass::Fit) continue;
            if (b.limit && r.rows.size() < 2) continue;
            return q;
        } catch (const std::exception&) {
            continue;
        }
    }
    throw std::runtime_error("flat generator failed to satisfy its postconditions");
}

DegradedCase gen_degraded_hidden(std::mt19937_64& rng, const DatabaseState& instance) {
    for (int attempt = 0; attempt < 80; ++attempt) {
        DegradedCase out;
        int roll = static_cast<int>(rng() % 3);
        out.pattern = roll == 0   ? DegradedPattern::OuterJoin
                      : roll == 1 ? DegradedPattern::SemiJoin
                                  : DegradedPattern::ScalarAgg;

        if (out.pattern == DegradedPattern::OuterJoin) {
            // customer LEFT JOIN orders, filters on the left side
            Value pivot = cell_of(instance, "customer", "c_acctbal", rng());
            QueryBlock b;
            b.from.push_back(FromItem{"customer", nullptr, "", JoinKind::Cross, {}});
            FromItem oj{"orders", nullptr, "", JoinKind::LeftOuter, {}};
            oj.join_cond = Pred::make_cmp(Expr::make_column(bare("c_custkey")), CmpOp::Eq,
                                          Expr::make_column(bare("o_custkey")));
            b.from.push_back(std::move(oj));
            bool escape = rng() % 2 == 0;
            Pred filter = Pred::make_cmp(Expr::make_column(bare("c_acctbal")), CmpOp::Le,
                                         Expr::make_literal(pivot));
            if (escape)
                b.where = Pred::make_or({filter, Pred::make_is_null(bare("o_orderkey"))});
            else
                b.where = filter;
            b.select = {SelectItem{Expr::make_column(bare("c_name")), "name"},
                        SelectItem{Expr::make_column(bare("c_phone")), "phone"}};
            out.hidden = Query{{b}};
            out.outer_atom_texts = {"customer.c_acctbal <= " + sql_literal(pivot)};
            out.degraded_pair = {"orders.o_custkey", "customer.c_custkey"};
        } else if (out.pattern == DegradedPattern::SemiJoin) {
            Value pivot = cell_of(instance, "orders", "o_totalprice", rng());
            QueryBlock inner;
            inner.from.push_back(FromItem{"orders", nullptr, "", JoinKind::Cross, {}});
            inner.select = {SelectItem{Expr::make_column(bare("o_custkey")), ""}};
            inner.where = Pred::make_cmp(Expr::make_column(bare("o_totalprice")), CmpOp::Le,
                                         Expr::make_literal(pivot));
            QueryBlock b;
            b.from.push_back(FromItem{"customer", nullptr, "", JoinKind::Cross, {}});
            b.where = Pred::make_in_subquery(bare("c_custkey"), Query{{inner}});
            b.select = {SelectItem{Expr::make_column(bare("c_name")), "name"},
                        SelectItem{Expr::make_column(bare("c_acctbal")), "bal"}};
            out.hidden = Query{{b}};
            out.inner_atom_texts = {"orders.o_totalprice <= " + sql_literal(pivot)};
            out.degraded_pair = {"customer.c_custkey", "orders.o_custkey"};
        } else {
            // customers whose balance clears an aggregate of their orders
            AggFunc f = rng() % 2 == 0 ? AggFunc::Max : AggFunc::Min;
            QueryBlock inner;
            inner.from.push_back(FromItem{"orders", nullptr, "", JoinKind::Cross, {}});
            inner.select = {
                SelectItem{Expr::make_agg(f, Expr::make_column(bare("o_totalprice"))), ""}};
            inner.where = Pred::make_cmp(Expr::make_column(bare("o_custkey")), CmpOp::Eq,
                                         Expr::make_column(bare("c_custkey")));
            QueryBlock b;
            b.from.push_back(FromItem{"customer", nullptr, "", JoinKind::Cross, {}});
            b.where = Pred::make_cmp(Expr::make_column(bare("c_acctbal")), CmpOp::Ge,
                                     Expr::make_subquery(Query{{inner}}));
            b.select = {SelectItem{Expr::make_column(bare("c_name")), "name"}};
            out.hidden = Query{{b}};
            out.inner_atom_texts = {"orders.o_totalprice <= customer.c_acctbal"};
            out.degraded_pair = {"orders.o_custkey", "customer.c_custkey"};
        }

        try {
            ResultSet r = execute(out.hidden, instance);
            if (classify_fit(r) != FitClass::Fit) continue;
            if (out.pattern == DegradedPattern::OuterJoin) {
                // the outer join must be observable on this instance
                DatabaseState probe = instance.clone();
                probe.clear_table("orders");
                ResultSet r2 = execute(out.hidden, probe);
                if (multiset_equal(r, r2)) continue;
                if (classify_fit(r2) != FitClass::Fit) continue;
            }
            return out;
        } catch (const std::exception&) {
            continue;
        }
    }
    throw std::runtime_error("degraded generator failed to satisfy its postconditions");
}

Query gen_syntax_tree(std::mt19937_64& rng) {
    auto rand_literal = [&]() -> Value {
        switch (rng() % 4) {
            case 0: return static_cast<long long>(rng() % 1000) - 500;
            case 1: return Decimal{static_cast<long long>(rng() % 100000), 2};
            case 2: return Value{std::string("w") + std::to_string(rng() % 50)};
            default: return Date::from_ymd(1995, 1 + rng() % 12, 1 + rng() % 28);
        }
    };
    auto rand_col = [&]() {
        return ColumnRef{rng() % 3 == 0 ? "t" + std::to_string(rng() % 2) : "",
                         "col" + std::to_string(rng() % 6)};
    };
    std::function<Expr(int)> rand_expr = [&](int depth) -> Expr {
        int roll = static_cast<int>(rng() % (depth > 0 ? 4 : 2));
        switch (roll) {
            case 0: return Expr::make_column(rand_col());
            case 1: return Expr::make_literal(rand_literal());
            case 2:
                return Expr::make_arith("+-*/"[rng() % 4], rand_expr(depth - 1),
                                        rand_expr(depth - 1));
            default: {
                AggFunc f = static_cast<AggFunc>(rng() % 5);
                if (f == AggFunc::Count && rng() % 2 == 0)
                    return Expr::make_agg(AggFunc::Count, std::nullopt);
                return Expr::make_agg(f, Expr::make_column(rand_col()));
            }
        }
    };
    std::function<Pred(int)> rand_pred = [&](int depth) -> Pred {
        int roll = static_cast<int>(rng() % (depth > 0 ? 7 : 5));
        switch (roll) {
            case 0:
                return Pred::make_cmp(Expr::make_column(rand_col()),
                                      static_cast<CmpOp>(rng() % 5), Expr::make_literal(rand_literal()));
            case 1:
                return Pred::make_cmp(Expr::make_column(rand_col()), static_cast<CmpOp>(rng() % 5),
                                      Expr::make_column(rand_col()));
            case 2: return Pred::make_is_null(rand_col());
            case 3: {
                std::vector<Value> vals;
                size_t n = 1 + rng() % 3;
                for (size_t i = 0; i < n; ++i) vals.push_back(rand_literal());
                return Pred::make_in_list(rand_col(), vals);
            }
            case 4: return Pred::make_like(rand_col(), "%w" + std::to_string(rng() % 9) + "%");
            case 5: {
                std::vector<Pred> kids;
                size_t n = 2 + rng() % 2;
                for (size_t i = 0; i < n; ++i) kids.push_back(rand_pred(depth - 1));
                return rng() % 2 ? Pred::make_and(std::move(kids)) : Pred::make_or(std::move(kids));
            }
            default: {
                QueryBlock sub;
                sub.from.push_back(FromItem{"tbl" + std::to_string(rng() % 3), nullptr, "",
                                            JoinKind::Cross, {}});
                sub.select = {SelectItem{Expr::make_column(rand_col()), ""}};
                return Pred::make_in_subquery(rand_col(), Query{{sub}});
            }
        }
    };

    Query q;
    size_t branches = 1 + rng() % 2;
    for (size_t bi = 0; bi < branches; ++bi) {
        QueryBlock b;
        size_t nfrom = 1 + rng() % 3;
        for (size_t i = 0; i < nfrom; ++i) {
            FromItem f;
            f.table = "tbl" + std::to_string(rng() % 4);
            if (rng() % 2) f.alias = "t" + std::to_string(i);
            if (i > 0) {
                int jk = static_cast<int>(rng() % 3);
                f.join = jk == 0 ? JoinKind::Cross : jk == 1 ? JoinKind::Inner : JoinKind::LeftOuter;
                if (f.join != JoinKind::Cross)
                    f.join_cond = Pred::make_cmp(Expr::make_column(rand_col()), CmpOp::Eq,
                                                 Expr::make_column(rand_col()));
            }
            b.from.push_back(std::move(f));
        }
        size_t nsel = 1 + rng() % 3;
        for (size_t i = 0; i < nsel; ++i) {
            SelectItem s;
            s.expr = rand_expr(2);
            if (rng() % 2) s.alias = "a" + std::to_string(i);
            b.select.push_back(std::move(s));
        }
        if (rng() % 2) b.where = rand_pred(2);
        if (rng() % 3 == 0) b.group_by = {rand_col()};
        if (rng() % 3 == 0) b.order_by = {OrderItem{rand_col(), rng() % 2 == 0}};
        if (rng() % 4 == 0) b.limit = static_cast<long long>(rng() % 20);
        q.branches.push_back(std::move(b));
    }
    return q;
}

Query gen_conformance_query(std::mt19937_64& rng, const DatabaseState& instance) {
    const SchemaCatalog& catalog = instance.catalog();
    // candidate join pairs drawn from the FK graph
    std::vector<JoinEdge> edges = join_graph();

    auto table_cols = [&](const std::string& t) {
        std::vector<std::string> cols;
        for (const auto& c : catalog.table(t).columns) cols.push_back(c.name);
        return cols;
    };
    auto data_value = [&](const std::string& t, const std::string& c) {
        if (instance.rows(t).empty()) return Value{0LL};
        return cell_of(instance, t, c, rng());
    };

    QueryBlock b;
    JoinEdge e = pick(rng, edges);
    bool two_tables = rng() % 4 != 0;
    bool left_join = two_tables && rng() % 3 == 0;
    b.from.push_back(FromItem{e.a, nullptr, "", JoinKind::Cross, {}});
    if (two_tables) {
        FromItem f{e.b, nullptr, "", left_join ? JoinKind::LeftOuter : JoinKind::Inner, {}};
        f.join_cond = Pred::make_cmp(Expr::make_column(bare(e.ca)), CmpOp::Eq,
                                     Expr::make_column(bare(e.cb)));
        b.from.push_back(std::move(f));
    }

    std::vector<Pred> conjuncts;
    auto numeric_cols = [&](const std::string& t) {
        std::vector<std::string> out;
        for (const auto& c : catalog.table(t).columns)
            if (c.domain.kind == DomainKind::Integer || c.domain.kind == DomainKind::Decimal)
                out.push_back(c.name);
        return out;
    };
    int n_atoms = static_cast<int>(rng() % 3);
    for (int i = 0; i < n_atoms; ++i) {
        std::string t = two_tables && rng() % 2 ? e.b : e.a;
        switch (rng() % 4) {
            case 0: {
                auto cols = numeric_cols(t);
                if (cols.empty()) break;
                std::string c = pick(rng, cols);
                conjuncts.push_back(Pred::make_cmp(Expr::make_column(bare(c)),
                                                   static_cast<CmpOp>(rng() % 5),
                                                   Expr::make_literal(data_value(t, c))));
                break;
            }
            case 1: {
                if (left_join && t == e.b) {
                    conjuncts.push_back(Pred::make_is_null(bare(pick(rng, table_cols(e.b)))));
                } else {
                    auto cols = numeric_cols(t);
                    if (cols.empty()) break;
                    std::string c = pick(rng, cols);
                    std::vector<Value> vals{data_value(t, c), data_value(t, c)};
                    conjuncts.push_back(Pred::make_in_list(bare(c), vals));
                }
                break;
            }
            case 2: {
                // membership in another table's column
                JoinEdge e2 = pick(rng, edges);
                if (e2.a == t)
                    conjuncts.push_back(Pred::make_in_subquery(
                        bare(e2.ca), Query{{QueryBlock{{SelectItem{Expr::make_column(bare(e2.cb)), ""}},
                                                       {FromItem{e2.b, nullptr, "", JoinKind::Cross, {}}},
                                                       {},
                                                       {},
                                                       {},
                                                       {}}}}));
                break;
            }
            default: {
                // scalar aggregate comparison, uncorrelated
                auto cols = numeric_cols(t);
                if (cols.empty()) break;
                std::string c = pick(rng, cols);
                QueryBlock sub;
                sub.from.push_back(FromItem{t, nullptr, "sq", JoinKind::Cross, {}});
                sub.select = {SelectItem{
                    Expr::make_agg(rng() % 2 ? AggFunc::Min : AggFunc::Max,
                                   Expr::make_column(ColumnRef{"sq", c})),
                    ""}};
                conjuncts.push_back(Pred::make_cmp(Expr::make_column(bare(c)),
                                                   rng() % 2 ? CmpOp::Ge : CmpOp::Le,
                                                   Expr::make_subquery(Query{{sub}})));
                break;
            }
        }
    }
    if (rng() % 4 == 0 && conjuncts.size() >= 2) {
        Pred orp = Pred::make_or({conjuncts[0], conjuncts[1]});
        conjuncts.erase(conjuncts.begin(), conjuncts.begin() + 2);
        conjuncts.push_back(std::move(orp));
    }
    if (!conjuncts.empty())
        b.where = conjuncts.size() == 1 ? conjuncts.front() : Pred::make_and(conjuncts);

    bool grouped = rng() % 3 == 0;
    if (grouped) {
        std::string gcol = pick(rng, table_cols(e.a));
        b.group_by = {bare(gcol)};
        b.select = {SelectItem{Expr::make_column(bare(gcol)), "k"},
                    SelectItem{Expr::make_agg(AggFunc::Count, std::nullopt), "n"}};
        auto nums = numeric_cols(two_tables ? e.b : e.a);
        if (!nums.empty() && rng() % 2) {
            AggFunc f = static_cast<AggFunc>(rng() % 5);
            if (f == AggFunc::Count) f = AggFunc::Sum;
            b.select.push_back(
                SelectItem{Expr::make_agg(f, Expr::make_column(bare(pick(rng, nums)))), "m"});
        }
        if (rng() % 2) b.order_by = {OrderItem{ColumnRef{"", "k"}, rng() % 2 == 0}};
    } else {
        auto cols = table_cols(e.a);
        size_t n = 1 + rng() % 2;
        for (size_t i = 0; i < n; ++i)
            b.select.push_back(
                SelectItem{Expr::make_column(bare(pick(rng, cols))), "p" + std::to_string(i)});
        if (rng() % 3 == 0) {
            auto nums = numeric_cols(e.a);
            if (!nums.empty())
                b.select.push_back(SelectItem{
                    Expr::make_arith('*', Expr::make_column(bare(pick(rng, nums))),
                                     Expr::make_literal(2LL)),
                    "x"});
        }
        if (rng() % 3 == 0 && !b.select.empty() && b.select[0].expr.kind == Expr::Column)
            b.order_by = {OrderItem{ColumnRef{"", "p0"}, rng() % 2 == 0}};
    }
    if (rng() % 4 == 0 && !b.order_by.empty()) b.limit = static_cast<long long>(rng() % 6);

    Query q{{b}};
    if (rng() % 5 == 0) {
        // union with a filter-shifted clone of the same block
        QueryBlock b2 = deep_copy(b);
        q.branches.push_back(std::move(b2));
    }
    return q;
}

}  // namespace hqe::testing
