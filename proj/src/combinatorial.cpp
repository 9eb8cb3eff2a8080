#include "hqe/combinatorial.hpp"

#include <algorithm>
#include <set>

namespace hqe {

namespace {

using TableNames = std::set<std::string>;

// Collects the expression's columns and, within subqueries, only the
// pinned projections; a skeleton subquery's own WHERE is synthesized
// away, so its columns must not absorb seed atoms.
void expr_columns(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Column) out.insert(e.column.column);
    for (const auto& c : e.children) expr_columns(c, out);
    if (e.subquery)
        for (const auto& b : e.subquery->branches)
            for (const auto& s : b.select) expr_columns(s.expr, out);
}

void pred_columns(const Pred& p, std::set<std::string>& out) {
    for (const auto& c : p.children) pred_columns(c, out);
    if (p.kind == Pred::Cmp) {
        expr_columns(p.lhs, out);
        expr_columns(p.rhs, out);
    } else {
        out.insert(p.col.column);
    }
    if (p.subquery)
        for (const auto& b : p.subquery->branches) {
            for (const auto& s : b.select) expr_columns(s.expr, out);
        }
}

std::string owner_table(const std::string& column, const SchemaCatalog& catalog) {
    for (const auto& t : catalog.tables)
        if (t.column_index(column) >= 0) return t.name;
    return "";
}

TableNames columns_tables(const std::set<std::string>& cols, const SchemaCatalog& catalog) {
    TableNames out;
    for (const auto& c : cols) {
        std::string t = owner_table(c, catalog);
        if (!t.empty()) out.insert(t);
    }
    return out;
}

struct NestSite {
    enum class Kind { Scalar, Membership, Derived, None } kind = Kind::None;
    Pred comparison;       // Scalar/Membership: the pinned atom carrying the subquery
    QueryBlock inner;      // pinned inner block (select/order pinned; from/where rebuilt)
    size_t from_index = 0; // Derived: position in skeleton FROM
};

NestSite find_site(const QueryBlock& outer) {
    NestSite site;
    for (size_t i = 0; i < outer.from.size(); ++i) {
        if (outer.from[i].derived) {
            site.kind = NestSite::Kind::Derived;
            site.from_index = i;
            site.inner = deep_copy(outer.from[i].derived->branches.front());
            return site;
        }
    }
    if (!outer.where) return site;
    std::function<bool(const Pred&)> scan = [&](const Pred& p) -> bool {
        for (const auto& c : p.children)
            if (scan(c)) return true;
        if (p.kind == Pred::InSubquery && p.subquery) {
            site.kind = NestSite::Kind::Membership;
            site.comparison = deep_copy(p);
            site.inner = deep_copy(p.subquery->branches.front());
            return true;
        }
        if (p.kind == Pred::Cmp) {
            std::function<const Expr*(const Expr&)> find_sub = [&](const Expr& e) -> const Expr* {
                if (e.kind == Expr::ScalarSubquery) return &e;
                for (const auto& c : e.children)
                    if (const Expr* f = find_sub(c)) return f;
                return nullptr;
            };
            if (find_sub(p.lhs) || find_sub(p.rhs)) {
                site.kind = NestSite::Kind::Scalar;
                site.comparison = deep_copy(p);
                const Expr* sub = find_sub(p.lhs) ? find_sub(p.lhs) : find_sub(p.rhs);
                site.inner = deep_copy(sub->subquery->branches.front());
                return true;
            }
        }
        return false;
    };
    scan(*outer.where);
    return site;
}

// Rewrites the subquery inside the pinned comparison to a fresh block.
Pred replant_subquery(const Pred& comparison, QueryBlock inner) {
    Pred out = deep_copy(comparison);
    if (out.kind == Pred::InSubquery) {
        out.subquery = std::make_shared<Query>(Query{{std::move(inner)}});
        return out;
    }
    std::function<bool(Expr&)> replant = [&](Expr& e) -> bool {
        if (e.kind == Expr::ScalarSubquery) {
            e.subquery = std::make_shared<Query>(Query{{deep_copy(inner)}});
            return true;
        }
        for (auto& c : e.children)
            if (replant(c)) return true;
        return false;
    };
    if (!replant(out.lhs)) replant(out.rhs);
    return out;
}

}  // namespace

CombinatorialResult combinatorial_synthesis(const Query& seed, const Query& skeleton,
                                            DatabaseState& instance, const ResultSet& hidden_result,
                                            const SchemaCatalog& catalog, Journal* journal,
                                            const CombinatorialOptions& opts) {
    CombinatorialResult res;
    bool ordered = query_has_order_by(seed) || query_has_order_by(skeleton);

    auto matches = [&](const Query& q) -> bool {
        if (res.candidates_tried >= opts.max_candidates) return false;
        ++res.candidates_tried;
        try {
            ResultSet r = execute(q, instance);
            return ordered ? ordered_equal(r, hidden_result) : multiset_equal(r, hidden_result);
        } catch (const std::exception&) {
            return false;
        }
    };

    if (seed.branches.size() != 1) {
        res.failure = "union seeds are outside combinatorial scope";
        return res;
    }
    const QueryBlock& seed_block = seed.branches.front();

    const QueryBlock& outer_skel = skeleton.branches.front();
    NestSite site = find_site(outer_skel);
    if (site.kind == NestSite::Kind::None) {
        // No nesting to redistribute: the seed itself is the only candidate.
        if (matches(seed)) {
            res.query = deep_copy(seed);
            return res;
        }
        res.failure = "exhausted";
        return res;
    }

    // --- table universe and pinned assignments ---
    std::vector<std::string> universe;
    for (const auto& f : seed_block.from) universe.push_back(f.table);
    std::sort(universe.begin(), universe.end());

    std::set<std::string> outer_pinned_cols, inner_pinned_cols, absorbed_cols;
    for (const auto& s : outer_skel.select) expr_columns(s.expr, outer_pinned_cols);
    for (const auto& o : outer_skel.order_by) outer_pinned_cols.insert(o.col.column);
    for (const auto& s : site.inner.select) expr_columns(s.expr, inner_pinned_cols);
    if (site.kind != NestSite::Kind::Derived) pred_columns(site.comparison, absorbed_cols);

    TableNames outer_must = columns_tables(outer_pinned_cols, catalog);
    TableNames inner_must = columns_tables(inner_pinned_cols, catalog);
    if (site.kind == NestSite::Kind::Derived) {
        // outer projections flow through the derived table; they pin nothing
        outer_must.clear();
    }

    std::vector<std::string> free_tables;
    for (const auto& t : universe) {
        bool in_outer = outer_must.count(t), in_inner = inner_must.count(t);
        if (in_outer && in_inner) {
            res.failure = "table " + t + " pinned to both layers";
            return res;
        }
        if (!in_outer && !in_inner) free_tables.push_back(t);
    }

    // --- seed atoms to redistribute ---
    std::vector<Pred> atoms;
    if (seed_block.where) atoms = conjuncts_of(*seed_block.where);

    // --- GROUP BY pool ---
    std::vector<std::string> gb_pool;
    auto add_gb = [&](const std::string& c) {
        if (std::find(gb_pool.begin(), gb_pool.end(), c) == gb_pool.end()) gb_pool.push_back(c);
    };
    for (const auto& g : seed_block.group_by) add_gb(g.column);
    for (const auto& g : outer_skel.group_by) add_gb(g.column);
    for (const auto& g : site.inner.group_by) add_gb(g.column);
    std::sort(gb_pool.begin(), gb_pool.end());
    if (gb_pool.size() > 6) {
        res.failure = "group-by pool too large";
        return res;
    }

    // inner projection output names (for outer references through a
    // derived table)
    std::vector<std::string> inner_outputs;
    for (const auto& s : site.inner.select) {
        if (!s.alias.empty()) inner_outputs.push_back(s.alias);
        else if (s.expr.kind == Expr::Column) inner_outputs.push_back(s.expr.column.column);
        else inner_outputs.push_back("");
    }

    long long n_free = static_cast<long long>(free_tables.size());
    long long n_gb = static_cast<long long>(gb_pool.size());

    for (long long tmask = 0; tmask < (1LL << n_free); ++tmask) {
        TableNames outer_tables = outer_must, inner_tables = inner_must;
        for (long long i = 0; i < n_free; ++i) {
            if (tmask & (1LL << i)) inner_tables.insert(free_tables[static_cast<size_t>(i)]);
            else outer_tables.insert(free_tables[static_cast<size_t>(i)]);
        }
        if (inner_tables.empty()) continue;
        if (site.kind != NestSite::Kind::Derived && outer_tables.empty()) continue;

        // place atoms: innermost block containing every referenced table;
        // correlated placement is only expressible in WHERE subqueries
        std::vector<Pred> outer_atoms, inner_atoms;
        bool placeable = true;
        for (const auto& a : atoms) {
            std::set<std::string> cols;
            pred_columns(a, cols);
            bool absorbed =
                !cols.empty() && std::includes(absorbed_cols.begin(), absorbed_cols.end(),
                                               cols.begin(), cols.end());
            if (absorbed) continue;
            TableNames rt = columns_tables(cols, catalog);
            bool needs_outer = false, needs_inner = false;
            for (const auto& t : rt) {
                if (outer_tables.count(t)) needs_outer = true;
                if (inner_tables.count(t)) needs_inner = true;
            }
            if (needs_outer && needs_inner) {
                if (site.kind == NestSite::Kind::Derived) { placeable = false; break; }
                inner_atoms.push_back(deep_copy(a));
            } else if (needs_inner) {
                inner_atoms.push_back(deep_copy(a));
            } else {
                outer_atoms.push_back(deep_copy(a));
            }
        }
        if (!placeable) continue;

        for (long long igb = 0; igb < (1LL << n_gb); ++igb) {
            for (long long ogb = 0; ogb < (1LL << n_gb); ++ogb) {
                if (res.candidates_tried >= opts.max_candidates) {
                    res.failure = "cap";
                    return res;
                }
                QueryBlock inner = deep_copy(site.inner);
                inner.from.clear();
                for (const auto& t : inner_tables)
                    inner.from.push_back(FromItem{t, nullptr, "", JoinKind::Cross, {}});
                inner.where.reset();
                if (!inner_atoms.empty()) {
                    std::vector<Pred> ps;
                    for (const auto& a : inner_atoms) ps.push_back(deep_copy(a));
                    inner.where = ps.size() == 1 ? ps.front() : Pred::make_and(ps);
                }
                // inner group keys must belong to the inner layer
                inner.group_by.clear();
                bool igb_ok = true;
                for (long long i = 0; i < n_gb; ++i) {
                    if (!(igb & (1LL << i))) continue;
                    const std::string& c = gb_pool[static_cast<size_t>(i)];
                    if (!inner_tables.count(owner_table(c, catalog))) { igb_ok = false; break; }
                    inner.group_by.push_back(ColumnRef{"", c});
                }
                if (!igb_ok) continue;

                QueryBlock outer;
                outer.select = deep_copy(outer_skel).select;
                outer.order_by = outer_skel.order_by;
                outer.limit = outer_skel.limit;
                if (site.kind == NestSite::Kind::Derived) {
                    FromItem fi;
                    fi.derived = std::make_shared<Query>(Query{{std::move(inner)}});
                    fi.alias = outer_skel.from[site.from_index].alias.empty()
                                   ? "inner_q"
                                   : outer_skel.from[site.from_index].alias;
                    outer.from.push_back(std::move(fi));
                    for (const auto& t : outer_tables)
                        outer.from.push_back(FromItem{t, nullptr, "", JoinKind::Cross, {}});
                } else {
                    for (const auto& t : outer_tables)
                        outer.from.push_back(FromItem{t, nullptr, "", JoinKind::Cross, {}});
                }
                std::vector<Pred> ow;
                for (const auto& a : outer_atoms) ow.push_back(deep_copy(a));
                if (site.kind != NestSite::Kind::Derived)
                    ow.push_back(replant_subquery(site.comparison, std::move(inner)));
                if (!ow.empty()) outer.where = ow.size() == 1 ? ow.front() : Pred::make_and(ow);

                outer.group_by.clear();
                for (long long i = 0; i < n_gb; ++i) {
                    if (!(ogb & (1LL << i))) continue;
                    const std::string& c = gb_pool[static_cast<size_t>(i)];
                    if (site.kind == NestSite::Kind::Derived) {
                        if (std::find(inner_outputs.begin(), inner_outputs.end(), c) ==
                            inner_outputs.end())
                            goto next_ogb;
                    } else if (!outer_tables.count(owner_table(c, catalog))) {
                        goto next_ogb;
                    }
                    outer.group_by.push_back(ColumnRef{"", c});
                }

                {
                    Query candidate{{std::move(outer)}};
                    if (matches(candidate)) {
                        res.query = std::move(candidate);
                        if (journal)
                            journal->add({{"t", "combinatorial"},
                                          {"tried", res.candidates_tried},
                                          {"matched", true}});
                        return res;
                    }
                }
            next_ogb:;
            }
        }
    }
    if (res.failure.empty()) res.failure = "exhausted";
    if (journal)
        journal->add({{"t", "combinatorial"}, {"tried", res.candidates_tried}, {"matched", false}});
    return res;
}

}  // namespace hqe
