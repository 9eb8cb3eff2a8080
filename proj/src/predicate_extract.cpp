#include "hqe/predicate_extract.hpp"

#include <algorithm>

namespace hqe {

PredicateAtom PredicateAtom::arith(ColKey c, CmpOp op, Value v, std::string prov) {
    PredicateAtom a;
    a.kind = Kind::Arith;
    a.col = std::move(c);
    a.op = op;
    a.constant = std::move(v);
    a.provenance = std::move(prov);
    return a;
}

PredicateAtom PredicateAtom::algebraic(ColKey x, CmpOp op, ColKey y, std::string prov) {
    PredicateAtom a;
    a.kind = Kind::Algebraic;
    a.col = std::move(x);
    a.op = op;
    a.rhs_col = std::move(y);
    a.provenance = std::move(prov);
    return a;
}

std::string PredicateAtom::text() const {
    switch (kind) {
        case Kind::Arith:
            return col.text() + " " + cmp_text(op) + " " + sql_literal(constant);
        case Kind::Algebraic:
            return col.text() + " " + cmp_text(op) + " " + rhs_col.text();
        case Kind::Like:
            return col.text() + " LIKE '" + pattern + "'";
        case Kind::InList: {
            std::string s = col.text() + " IN (";
            for (size_t i = 0; i < literals.size(); ++i)
                s += (i ? ", " : "") + sql_literal(literals[i]);
            return s + ")";
        }
    }
    return "?";
}

namespace {

const AttrDomain& domain_of(const DatabaseState& db, const ColKey& col) {
    return db.catalog().table(col.table).column(col.column).domain;
}

int column_index(const DatabaseState& db, const ColKey& col) {
    return db.catalog().table(col.table).column_index(col.column);
}

Value cell_value(const DatabaseState& db, const ColKey& col) {
    const auto& rows = db.rows(col.table);
    if (rows.empty()) throw ExtractionError("no row to read in " + col.table);
    return rows.front().values[static_cast<size_t>(column_index(db, col))];
}

bool probe_fit(Mutator& m, Oracle& o, const ColKey& col, const Value& v) {
    UndoToken tok = m.set_value(col.table, col.column, v);
    bool fit = o.invoke(m.db()).fit();
    m.undo(tok);
    return fit;
}

bool probe_fit_lockstep(Mutator& m, Oracle& o, const std::vector<ColKey>& cols, const Value& v) {
    UndoToken first = m.mark();
    for (const auto& c : cols) m.set_value(c.table, c.column, v);
    bool fit = o.invoke(m.db()).fit();
    m.undo_all_after(first);
    return fit;
}

// Ordinal coordinates shared across same-kind columns (absolute, unlike
// the per-domain grid index).
long long ordinal_of(const AttrDomain& dom, const Value& v) {
    switch (dom.kind) {
        case DomainKind::Integer: return std::get<long long>(v);
        case DomainKind::Decimal: return std::get<Decimal>(v).rescaled(dom.scale).unscaled;
        case DomainKind::DateKind: return std::get<Date>(v).days;
        case DomainKind::TextCategorical: return dom.index_of(v);
        case DomainKind::TextFree: break;
    }
    throw ExtractionError("no ordinal for free-text values");
}

Value value_of_ordinal(const AttrDomain& dom, long long o) {
    switch (dom.kind) {
        case DomainKind::Integer: return o;
        case DomainKind::Decimal: return Decimal{o, dom.scale};
        case DomainKind::DateKind: return Date{static_cast<int>(o)};
        case DomainKind::TextCategorical: return dom.enum_values[static_cast<size_t>(o)];
        case DomainKind::TextFree: break;
    }
    throw ExtractionError("no ordinal for free-text values");
}

// A value from another column expressed on this domain's grid; nullopt
// when it does not land on a grid point.
std::optional<long long> ordinal_on(const AttrDomain& dom, const Value& v) {
    switch (dom.kind) {
        case DomainKind::Integer: {
            if (const auto* i = std::get_if<long long>(&v)) return *i;
            if (const auto* d = std::get_if<Decimal>(&v)) {
                long long p = 1;
                for (int k = 0; k < d->scale; ++k) p *= 10;
                if (d->unscaled % p != 0) return std::nullopt;
                return d->unscaled / p;
            }
            return std::nullopt;
        }
        case DomainKind::Decimal: {
            if (const auto* i = std::get_if<long long>(&v)) {
                long long p = 1;
                for (int k = 0; k < dom.scale; ++k) p *= 10;
                return *i * p;
            }
            if (const auto* d = std::get_if<Decimal>(&v)) {
                if (d->scale <= dom.scale) return d->rescaled(dom.scale).unscaled;
                long long p = 1;
                for (int k = 0; k < d->scale - dom.scale; ++k) p *= 10;
                if (d->unscaled % p != 0) return std::nullopt;
                return d->unscaled / p;
            }
            return std::nullopt;
        }
        case DomainKind::DateKind:
            if (const auto* dt = std::get_if<Date>(&v)) return dt->days;
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

bool same_kind(const AttrDomain& a, const AttrDomain& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == DomainKind::Decimal && a.scale != b.scale) return false;
    if (a.kind == DomainKind::TextCategorical && a.enum_values != b.enum_values) return false;
    return true;
}

}  // namespace

SVI extract_filter_bounds(Mutator& m, Oracle& oracle, const ColKey& col) {
    const DatabaseState& db = m.db();
    const AttrDomain& dom = domain_of(db, col);
    if (!dom.ordered()) throw ExtractionError("free-text column has no ordered bounds: " + col.text());

    Value v0 = cell_value(db, col);
    long long i0 = dom.index_of(v0);
    long long last = dom.grid_size() - 1;

    auto fit_at = [&](long long idx) { return probe_fit(m, oracle, col, dom.value_at(idx)); };

    SVI out;
    out.col = col;

    long long lb;
    if (i0 == 0 || fit_at(0)) {
        lb = 0;
    } else {
        long long lo = 0, hi = i0;  // lo non-FIT, hi FIT
        while (hi - lo > 1) {
            long long mid = lo + (hi - lo) / 2;
            if (fit_at(mid)) hi = mid;
            else lo = mid;
        }
        lb = hi;
    }
    long long ub;
    if (i0 == last || fit_at(last)) {
        ub = last;
    } else {
        long long lo = i0, hi = last;  // lo FIT, hi non-FIT
        while (hi - lo > 1) {
            long long mid = lo + (hi - lo) / 2;
            if (fit_at(mid)) lo = mid;
            else hi = mid;
        }
        ub = lo;
    }

    out.lb = dom.value_at(lb);
    out.ub = dom.value_at(ub);
    out.at_domain_min = (lb == 0);
    out.at_domain_max = (ub == last);

    // Hole sniffing between the bounds and the satisfying witness.
    for (long long h : {lb + (i0 - lb) / 2, i0 + (ub - i0) / 2}) {
        if (h == lb || h == ub || h == i0) continue;
        if (!fit_at(h)) {
            out.non_monotone = true;
            break;
        }
    }
    return out;
}

std::map<ColKey, SVI> compute_svi_all(Mutator& m, Oracle& oracle, const TableSet& tables) {
    std::map<ColKey, SVI> out;
    for (const auto& t : m.db().catalog().tables) {
        if (!tables.count(t.name)) continue;
        if (m.db().row_count(t.name) == 0) continue;
        for (const auto& c : t.columns) {
            if (!c.domain.ordered()) continue;
            ColKey key{t.name, c.name};
            out[key] = extract_filter_bounds(m, oracle, key);
        }
    }
    return out;
}

std::vector<IneqEdge> enumerate_inequality_candidates(const DatabaseState& d1,
                                                      const std::map<ColKey, SVI>& svi) {
    std::vector<IneqEdge> edges;
    auto add_edge = [&](const ColKey& x, const ColKey& y) {
        for (const auto& e : edges)
            if (e.from == x && e.to == y) return;
        edges.push_back(IneqEdge{x, y});
    };
    for (const auto& [x, sx] : svi) {
        for (const auto& [y, sy] : svi) {
            if (x == y) continue;
            const AttrDomain& dx = domain_of(d1, x);
            const AttrDomain& dy = domain_of(d1, y);
            bool numeric_pair = (dx.kind == DomainKind::Integer || dx.kind == DomainKind::Decimal) &&
                                (dy.kind == DomainKind::Integer || dy.kind == DomainKind::Decimal);
            bool date_pair = dx.kind == DomainKind::DateKind && dy.kind == DomainKind::DateKind;
            if (!numeric_pair && !date_pair) continue;
            if (sx.point() && sy.point()) continue;  // equality territory
            // candidate x <= y: the D1 value of x sits on y's lower bound
            // (or one step below it, the strict-inequality signature)
            auto vx = ordinal_on(dy, cell_value(d1, x));
            long long lby = ordinal_of(dy, sy.lb);
            if (vx && (*vx == lby || *vx + 1 == lby)) add_edge(x, y);
            // same candidate seen from the upper side
            auto vy = ordinal_on(dx, cell_value(d1, y));
            long long ubx = ordinal_of(dx, sx.ub);
            if (vy && (*vy == ubx || *vy == ubx + 1)) add_edge(x, y);
        }
    }
    return edges;
}

std::optional<PredicateAtom> confirm_inequality(Mutator& m, Oracle& oracle, const IneqEdge& edge,
                                                std::map<ColKey, SVI>& svi) {
    const DatabaseState& db = m.db();
    const SVI& sx = svi.at(edge.from);
    Value vx = cell_value(db, edge.from);
    const AttrDomain& dy = domain_of(db, edge.to);

    auto step_above = [&](const Value& v) -> std::optional<Value> {
        auto ord = ordinal_on(dy, v);
        if (!ord) return std::nullopt;
        return value_of_ordinal(dy, *ord + 1);
    };

    // Push x to a new position and watch whether y's lower bound floats
    // along with it.
    auto probe_with_x_at = [&](const Value& x_target) -> std::optional<PredicateAtom> {
        UndoToken tok = m.set_value(edge.from.table, edge.from.column, x_target);
        if (!oracle.invoke(m.db()).fit()) {
            m.undo(tok);
            return std::nullopt;
        }
        SVI sy2 = extract_filter_bounds(m, oracle, edge.to);
        m.undo(tok);
        if (compare(sy2.lb, x_target) == 0) {
            svi.at(edge.to).floats_with = edge.from;
            return PredicateAtom::algebraic(edge.from, CmpOp::Le, edge.to, "svi-float");
        }
        auto above = step_above(x_target);
        if (above && compare(sy2.lb, *above) == 0) {
            svi.at(edge.to).floats_with = edge.from;
            return PredicateAtom::algebraic(edge.from, CmpOp::Lt, edge.to, "svi-float");
        }
        return std::nullopt;
    };

    if (compare(sx.ub, vx) != 0) {
        // x has upward room: the bound should chase x's new maximum.
        return probe_with_x_at(sx.ub);
    }
    if (compare(sx.lb, vx) != 0) {
        // No upward room (x already touches y): drive x down instead.
        return probe_with_x_at(sx.lb);
    }
    return std::nullopt;
}

std::vector<EqualityClique> extract_equalities(Mutator& m, Oracle& oracle,
                                               const std::map<ColKey, SVI>& svi) {
    const DatabaseState& db = m.db();

    // Group point-valued columns by kind + shared value.
    std::map<std::string, std::vector<ColKey>> groups;
    for (const auto& [col, s] : svi) {
        if (!s.point()) continue;
        const AttrDomain& dom = domain_of(db, col);
        std::string kind_tag;
        switch (dom.kind) {
            case DomainKind::Integer: kind_tag = "i"; break;
            case DomainKind::Decimal: kind_tag = "d" + std::to_string(dom.scale); break;
            case DomainKind::DateKind: kind_tag = "t"; break;
            case DomainKind::TextCategorical: kind_tag = "c"; break;
            case DomainKind::TextFree: continue;
        }
        groups[kind_tag + "|" + canonical_text(s.lb)].push_back(col);
    }

    std::vector<EqualityClique> cliques;
    for (auto& [tag, members] : groups) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end());
        const AttrDomain& dom0 = domain_of(db, members.front());
        bool compatible = true;
        for (const auto& c : members)
            if (!same_kind(dom0, domain_of(db, c))) compatible = false;
        if (!compatible) continue;

        Value v = cell_value(db, members.front());
        long long v_ord = ordinal_of(dom0, v);

        // Shared ordinal range of the members' domains.
        long long shared_lo = ordinal_of(dom0, domain_of(db, members.front()).i_min);
        long long shared_hi = ordinal_of(dom0, domain_of(db, members.front()).i_max);
        for (const auto& c : members) {
            shared_lo = std::max(shared_lo, ordinal_of(dom0, domain_of(db, c).i_min));
            shared_hi = std::min(shared_hi, ordinal_of(dom0, domain_of(db, c).i_max));
        }

        auto lockstep_fit = [&](const std::vector<ColKey>& cols, long long ord) {
            return probe_fit_lockstep(m, oracle, cols, value_of_ordinal(dom0, ord));
        };
        // A subset moved off the shared value stays FIT iff it is closed
        // under the hidden equalities (内部 pairs move together, and no
        // member is tied to anything left behind).
        auto closed_subset = [&](const std::vector<ColKey>& cols) {
            if (v_ord - 1 >= shared_lo && lockstep_fit(cols, v_ord - 1)) return true;
            if (v_ord + 1 <= shared_hi && lockstep_fit(cols, v_ord + 1)) return true;
            return false;
        };

        std::vector<ColKey> uncovered = members;
        const size_t kMaxGroup = 6;
        bool oversized = uncovered.size() > kMaxGroup;
        for (size_t k = 2; k <= uncovered.size() && !oversized;) {
            bool found = false;
            // enumerate k-subsets of uncovered in lexicographic order
            std::vector<size_t> idx(k);
            for (size_t i = 0; i < k; ++i) idx[i] = i;
            while (true) {
                std::vector<ColKey> subset;
                for (size_t i : idx) subset.push_back(uncovered[i]);
                if (closed_subset(subset)) {
                    EqualityClique cl;
                    cl.members = subset;
                    // Joint interval by lockstep bisection.
                    long long jlb = v_ord, jub = v_ord;
                    if (lockstep_fit(subset, shared_lo)) {
                        jlb = shared_lo;
                    } else {
                        long long lo = shared_lo, hi = v_ord;
                        while (hi - lo > 1) {
                            long long mid = lo + (hi - lo) / 2;
                            if (lockstep_fit(subset, mid)) hi = mid;
                            else lo = mid;
                        }
                        jlb = hi;
                    }
                    if (lockstep_fit(subset, shared_hi)) {
                        jub = shared_hi;
                    } else {
                        long long lo = v_ord, hi = shared_hi;
                        while (hi - lo > 1) {
                            long long mid = lo + (hi - lo) / 2;
                            if (lockstep_fit(subset, mid)) lo = mid;
                            else hi = mid;
                        }
                        jub = lo;
                    }
                    cl.joint_lb = value_of_ordinal(dom0, jlb);
                    cl.joint_ub = value_of_ordinal(dom0, jub);
                    cl.bounded_below = jlb > shared_lo;
                    cl.bounded_above = jub < shared_hi;
                    cliques.push_back(std::move(cl));
                    std::vector<ColKey> rest;
                    for (size_t i = 0, j = 0; i < uncovered.size(); ++i) {
                        if (j < idx.size() && idx[j] == i) { ++j; continue; }
                        rest.push_back(uncovered[i]);
                    }
                    uncovered = std::move(rest);
                    found = true;
                    break;
                }
                // next k-combination
                size_t i = k;
                while (i > 0) {
                    --i;
                    if (idx[i] != i + uncovered.size() - k) {
                        ++idx[i];
                        for (size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                        break;
                    }
                    if (i == 0) { i = SIZE_MAX; break; }
                }
                if (i == SIZE_MAX) break;
            }
            if (!found) ++k;
        }
    }
    return cliques;
}

PredicateAtom extract_in_list(Mutator& m, Oracle& oracle, const ColKey& col,
                              const std::vector<std::string>& branch_tables,
                              const TableSet& optional_tables, const ExtractOptions& opts) {
    DatabaseState& db = m.db();
    UndoToken session_mark = m.mark();
    std::vector<Value> literals;

    int ci = column_index(db, col);
    while (true) {
        if (!literals.empty()) {
            std::vector<long long> ids;
            for (const auto& sr : db.rows(col.table)) {
                const Value& cell = sr.values[static_cast<size_t>(ci)];
                for (const auto& lit : literals)
                    if (same_cell(cell, lit)) { ids.push_back(sr.id); break; }
            }
            if (!ids.empty()) m.delete_rows(col.table, ids);  // stays until the loop ends
        }
        // terminating probe: no satisfying rows left for unseen literals
        if (!oracle.invoke(db).fit()) break;
        if (static_cast<int>(literals.size()) >= opts.max_in_literals) {
            m.undo_all_after(session_mark);
            throw ExtractionError("IN-list literal budget exhausted on " + col.text());
        }
        MinimizeOptions mo;
        mo.tables = branch_tables;
        mo.optional_tables = optional_tables;
        mo.purpose = "inlist:" + col.text();
        UndoToken min_tok = minimize(m, oracle, mo);
        literals.push_back(cell_value(db, col));
        m.undo_all_after(min_tok);
    }
    m.undo_all_after(session_mark);

    if (literals.empty()) throw ExtractionError("IN-list loop found no satisfying literal");
    if (literals.size() == 1)
        return PredicateAtom::arith(col, CmpOp::Eq, literals.front(), "inlist-single");
    std::sort(literals.begin(), literals.end(), [](const Value& a, const Value& b) {
        return sql_literal(a) < sql_literal(b);
    });
    PredicateAtom a;
    a.kind = PredicateAtom::Kind::InList;
    a.col = col;
    a.literals = std::move(literals);
    a.provenance = "inlist-loop";
    return a;
}

std::optional<PredicateAtom> extract_text_predicate(Mutator& m, Oracle& oracle, const ColKey& col) {
    const DatabaseState& db = m.db();
    Value v0val = cell_value(db, col);
    if (!std::holds_alternative<std::string>(v0val)) return std::nullopt;
    std::string v0 = std::get<std::string>(v0val);

    auto fit_text = [&](const std::string& s) { return probe_fit(m, oracle, col, Value{s}); };

    if (fit_text("zq" + v0 + "x7_probe") && fit_text("unrelated probe text"))
        return std::nullopt;  // unconstrained

    // shrink to the minimal satisfying core
    std::string core = v0;
    while (core.size() > 1 && fit_text(core.substr(1))) core = core.substr(1);
    while (core.size() > 1 && fit_text(core.substr(0, core.size() - 1)))
        core = core.substr(0, core.size() - 1);

    bool left_pad = fit_text("zq" + core);
    bool right_pad = fit_text(core + "qz");
    if (!left_pad && !right_pad && core == v0)
        return PredicateAtom::arith(col, CmpOp::Eq, Value{v0}, "text-exact");
    std::string pattern = std::string(left_pad ? "%" : "") + core + (right_pad ? "%" : "");
    return PredicateAtom{PredicateAtom::Kind::Like, col, CmpOp::Eq, {}, {}, pattern, {}, "text-shrink"};
}

// ---------------------------------------------------------------------------
// Branch driver
// ---------------------------------------------------------------------------

namespace {

struct VarySpec {
    // Columns that move together, and the grid they move on.
    std::vector<ColKey> cols;
    AttrDomain grid;       // domain used for ordinal arithmetic
    long long lo = 0, hi = 0;  // inclusive ordinal span of safe values
    long long origin = 0;      // current D1 ordinal
    bool text_mode = false;    // free-text variation instead of ordinals
    std::string text_core;     // pattern-preserving core ('' = unconstrained)
    std::vector<Value> explicit_values;  // categorical satisfying alternates

    Value value_for_slot(long long slot) const;
};

Value VarySpec::value_for_slot(long long slot) const {
    if (text_mode) {
        std::string s = text_core.empty() ? "hqe_free" : text_core;
        return Value{"zz" + std::to_string(slot) + "_" + s + "_" + std::to_string(slot)};
    }
    if (!explicit_values.empty())
        return explicit_values[static_cast<size_t>(slot) % explicit_values.size()];
    // walk outward from the origin, skipping it
    long long v = origin;
    long long offset = slot + 1;
    if (origin + offset <= hi) v = origin + offset;
    else if (origin - offset >= lo) v = origin - offset;
    else {
        // dense packing from the low end, skipping the origin
        v = lo + slot;
        if (v >= origin) ++v;
        if (v > hi) throw ExtractionError("variation slot outside safe interval");
    }
    return value_of_ordinal(grid, v);
}

long long vary_room(const VarySpec& v) {
    if (v.text_mode) return 1000;
    if (!v.explicit_values.empty()) return static_cast<long long>(v.explicit_values.size());
    return v.hi - v.lo;  // distinct alternates available besides the origin
}

// Tail-clause probing: projection dependencies by value perturbation,
// aggregation by row duplication (identical for SUM/COUNT scaling,
// unequal for MIN/MAX/AVG), GROUP BY by duplication with distinct
// values, ORDER BY by reading controlled multi-row results under both
// insertion orders, LIMIT by inflation past a probe ceiling.
void extract_tail(Mutator& m, Oracle& oracle, BranchSpec& spec, const std::map<ColKey, SVI>& svi,
                  const std::vector<std::string>& tables_order,
                  const std::vector<std::string>& required, const ExtractOptions& opts) {
    DatabaseState& db = m.db();
    InvokeOutcome base = oracle.invoke(db);
    if (!base.fit()) {
        spec.notes.push_back("tail extraction skipped: no FIT baseline");
        return;
    }
    ResultSet r0 = *base.result;
    size_t ncols = r0.headers.size();

    // ---- variation plans ----
    std::vector<VarySpec> varies;
    std::set<ColKey> planned;
    auto ordinal_dom = [&](const ColKey& c) -> const AttrDomain& { return domain_of(db, c); };

    for (const auto& cl : spec.cliques) {
        VarySpec v;
        v.cols = cl.members;
        v.grid = ordinal_dom(cl.members.front());
        v.lo = ordinal_of(v.grid, cl.joint_lb);
        v.hi = ordinal_of(v.grid, cl.joint_ub);
        v.origin = ordinal_of(v.grid, cell_value(db, cl.members.front()));
        for (const auto& c : cl.members) planned.insert(c);
        varies.push_back(std::move(v));
    }
    for (const auto& link : spec.loj) {
        if (!link.pinned) continue;
        if (planned.count(link.ref_col)) {
            for (auto& v : varies)
                for (const auto& c : v.cols)
                    if (c == link.ref_col && !planned.count(link.fk_col)) {
                        v.cols.push_back(link.fk_col);
                        planned.insert(link.fk_col);
                    }
            continue;
        }
        VarySpec v;
        v.cols = {link.ref_col, link.fk_col};
        v.grid = ordinal_dom(link.ref_col);
        const AttrDomain& da = ordinal_dom(link.ref_col);
        const AttrDomain& db2 = ordinal_dom(link.fk_col);
        v.lo = std::max(ordinal_of(v.grid, da.i_min), ordinal_of(v.grid, db2.i_min));
        v.hi = std::min(ordinal_of(v.grid, da.i_max), ordinal_of(v.grid, db2.i_max));
        v.origin = ordinal_of(v.grid, cell_value(db, link.ref_col));
        planned.insert(link.ref_col);
        planned.insert(link.fk_col);
        varies.push_back(std::move(v));
    }
    for (const auto& [col, s] : svi) {
        if (planned.count(col)) continue;
        const AttrDomain& dom = ordinal_dom(col);
        if (dom.kind == DomainKind::TextCategorical) {
            // satisfying alternates by enum sweep (selection only; the
            // authoritative literal set comes from the costed loop)
            VarySpec v;
            v.cols = {col};
            v.grid = dom;
            Value v0 = cell_value(db, col);
            for (const auto& lit : dom.enum_values) {
                if (same_cell(Value{lit}, v0)) continue;
                if (probe_fit(m, oracle, col, Value{lit})) v.explicit_values.push_back(Value{lit});
                if (v.explicit_values.size() >= 4) break;
            }
            if (!v.explicit_values.empty()) {
                planned.insert(col);
                varies.push_back(std::move(v));
            }
            continue;
        }
        if (s.point()) continue;  // pinned by an equality filter
        VarySpec v;
        v.cols = {col};
        v.grid = dom;
        v.lo = ordinal_of(dom, s.lb);
        v.hi = ordinal_of(dom, s.ub);
        v.origin = ordinal_of(dom, cell_value(db, col));
        planned.insert(col);
        varies.push_back(std::move(v));
    }
    for (const auto& tname : tables_order) {
        for (const auto& c : db.catalog().table(tname).columns) {
            if (c.domain.kind != DomainKind::TextFree) continue;
            ColKey col{tname, c.name};
            if (planned.count(col)) continue;
            std::string core;
            bool constrained_exact = false;
            for (const auto& a : spec.atoms) {
                if (a.col != col) continue;
                if (a.kind == PredicateAtom::Kind::Like) core = a.pattern;
                if (a.kind == PredicateAtom::Kind::Arith) constrained_exact = true;
            }
            if (constrained_exact) continue;
            VarySpec v;
            v.cols = {col};
            v.text_mode = true;
            if (!core.empty()) {
                // strip the % wildcards back off the pattern
                std::string inner = core;
                std::erase(inner, '%');
                v.text_core = inner;
            }
            planned.insert(col);
            varies.push_back(std::move(v));
        }
    }

    auto apply_vary = [&](const VarySpec& v, long long slot) -> std::pair<UndoToken, Value> {
        UndoToken mark = m.mark();
        Value val = v.value_for_slot(slot);
        for (const auto& c : v.cols) m.set_value(c.table, c.column, val);
        return {mark, val};
    };

    // One inserted "universe": copies of the rows of the tables owning
    // the varied columns, with those columns set to the slot value.
    auto insert_universe = [&](const VarySpec& v, long long slot) -> UndoToken {
        UndoToken mark = m.mark();
        Value val = v.value_for_slot(slot);
        std::set<std::string> tables;
        for (const auto& c : v.cols) tables.insert(c.table);
        for (const auto& t : tables) {
            Row row = db.rows(t).front().values;
            for (const auto& c : v.cols)
                if (c.table == t) row[static_cast<size_t>(column_index(db, c))] = val;
            m.insert_rows(t, {row});
        }
        return mark;
    };

    // ---- projection dependencies ----
    std::vector<std::optional<ColKey>> dep(ncols);
    std::vector<bool> identity(ncols, false);
    auto column_values = [&](const ResultSet& r, size_t j) {
        std::vector<std::string> vals;
        for (const auto& row : r.rows) vals.push_back(is_null(row[j]) ? "\\N" : canonical_text(row[j]));
        std::sort(vals.begin(), vals.end());
        return vals;
    };
    for (const auto& v : varies) {
        if (vary_room(v) < 1) continue;
        auto [mark, val] = apply_vary(v, 0);
        InvokeOutcome probe = oracle.invoke(db);
        m.undo_all_after(mark);
        if (!probe.fit()) continue;
        const ResultSet& r1 = *probe.result;
        if (r1.rows.size() != r0.rows.size()) continue;
        for (size_t j = 0; j < ncols; ++j) {
            if (column_values(r1, j) == column_values(r0, j)) continue;
            if (!dep[j]) {
                // representative: prefer a member projected as-is
                dep[j] = v.cols.front();
                if (r1.rows.size() == 1 && same_cell(r1.rows[0][j], val)) identity[j] = true;
            }
        }
    }

    // ---- grouping / aggregation ----
    std::string dup_table = required.empty() ? tables_order.front() : required.front();
    ResultSet rdup;
    {
        UndoToken mark = m.mark();
        m.insert_rows(dup_table, {db.rows(dup_table).front().values});
        InvokeOutcome probe = oracle.invoke(db);
        m.undo_all_after(mark);
        if (!probe.ok()) {
            spec.notes.push_back("duplication probe failed");
            return;
        }
        rdup = *probe.result;
    }
    spec.grouped = rdup.rows.size() == r0.rows.size();

    std::vector<std::optional<AggFunc>> agg(ncols);
    if (spec.grouped && r0.rows.size() == 1) {
        for (size_t j = 0; j < ncols; ++j) {
            const Value& before = r0.rows[0][j];
            const Value& after = rdup.rows[0][j];
            if (is_numeric(before) && is_numeric(after) && same_cell(after, mul(before, 2LL))) {
                agg[j] = dep[j] ? AggFunc::Sum : AggFunc::Count;
                continue;
            }
            if (!dep[j]) continue;
            // distinguish MIN / MAX / AVG / plain with an unequal twin
            const VarySpec* v = nullptr;
            for (const auto& cand : varies)
                for (const auto& c : cand.cols)
                    if (c == *dep[j]) v = &cand;
            if (!v || vary_room(*v) < 1 || v->text_mode) continue;
            UndoToken mark = insert_universe(*v, 0);
            InvokeOutcome probe = oracle.invoke(db);
            Value v2 = v->value_for_slot(0);
            m.undo_all_after(mark);
            if (!probe.fit()) continue;
            const ResultSet& r2 = *probe.result;
            if (r2.rows.size() > r0.rows.size()) continue;  // split: plain group key
            if (r2.rows.size() != 1) continue;
            Value v1 = cell_value(db, *dep[j]);
            const Value& got = r2.rows[0][j];
            Value lo_v = compare(v1, v2) <= 0 ? v1 : v2;
            Value hi_v = compare(v1, v2) <= 0 ? v2 : v1;
            if (same_cell(got, lo_v)) agg[j] = AggFunc::Min;
            else if (same_cell(got, hi_v)) agg[j] = AggFunc::Max;
            else if (is_numeric(got) && same_cell(got, divide(add(v1, v2), 2LL))) agg[j] = AggFunc::Avg;
        }
    }

    // ---- GROUP BY membership ----
    if (spec.grouped) {
        for (const auto& v : varies) {
            if (vary_room(v) < 1) continue;
            UndoToken mark = insert_universe(v, 1 % std::max(1LL, vary_room(v)));
            InvokeOutcome probe = oracle.invoke(db);
            m.undo_all_after(mark);
            if (!probe.ok()) continue;
            if (probe.result->rows.size() > r0.rows.size()) {
                // choose the member that's projected, else the first
                ColKey rep = v.cols.front();
                for (const auto& c : v.cols) {
                    for (size_t j = 0; j < ncols; ++j)
                        if (dep[j] && *dep[j] == c && identity[j]) rep = c;
                }
                bool seen = false;
                for (const auto& g : spec.group_by)
                    if (g == rep) seen = true;
                if (!seen) spec.group_by.push_back(rep);
            }
        }
        std::sort(spec.group_by.begin(), spec.group_by.end());
    }

    // ---- projections ----
    for (size_t j = 0; j < ncols; ++j) {
        ProjectionSpec p;
        p.alias = r0.headers[j];
        if (agg[j]) {
            p.agg = agg[j];
            if (*agg[j] != AggFunc::Count) p.source = dep[j];
        } else if (dep[j]) {
            p.source = dep[j];
        } else {
            // fall back to matching the output value against the row
            bool found = false;
            for (const auto& tname : tables_order) {
                if (db.rows(tname).empty()) continue;
                const TableSchema& ts = db.catalog().table(tname);
                const Row& row = db.rows(tname).front().values;
                for (size_t c = 0; c < ts.columns.size() && !found; ++c) {
                    if (r0.rows.size() == 1 && same_cell(row[c], r0.rows[0][j])) {
                        p.source = ColKey{tname, ts.columns[c].name};
                        p.note = "value-matched";
                        found = true;
                    }
                }
                if (found) break;
            }
            if (!found) {
                p.note = "unresolved projection";
                spec.notes.push_back("projection '" + p.alias + "' has no detectable source");
            }
        }
        spec.projections.push_back(std::move(p));
    }

    // ---- ORDER BY ----
    if (opts.detect_order_by && r0.rows.size() == 1) {
        auto candidate_ok = [&](size_t j) {
            if (!dep[j] || !identity[j] || agg[j]) return false;
            if (spec.grouped) {
                bool in_keys = false;
                for (const auto& g : spec.group_by)
                    if (g == *dep[j]) in_keys = true;
                if (!in_keys) return false;
            }
            return true;
        };
        auto find_vary = [&](const ColKey& c) -> const VarySpec* {
            for (const auto& v : varies)
                for (const auto& vc : v.cols)
                    if (vc == c) return &v;
            return nullptr;
        };
        auto probe_direction = [&](size_t j, const VarySpec& v, bool reversed) -> int {
            // returns +1 ascending, -1 descending, 0 neither
            UndoToken mark = m.mark();
            if (!reversed) {
                insert_universe(v, 0);
                insert_universe(v, 1);
            } else {
                insert_universe(v, 1);
                insert_universe(v, 0);
            }
            InvokeOutcome probe = oracle.invoke(db);
            m.undo_all_after(mark);
            if (!probe.ok() || probe.result->rows.size() < 3) return 0;
            const auto& rows = probe.result->rows;
            bool asc = true, desc = true;
            for (size_t k = 0; k + 1 < rows.size(); ++k) {
                if (is_null(rows[k][j]) || is_null(rows[k + 1][j])) return 0;
                auto c = compare(rows[k][j], rows[k + 1][j]);
                if (*c > 0) asc = false;
                if (*c < 0) desc = false;
            }
            if (asc && !desc) return 1;
            if (desc && !asc) return -1;
            return 0;
        };
        for (size_t j = 0; j < ncols && spec.order_by.empty(); ++j) {
            if (!candidate_ok(j)) continue;
            const VarySpec* v = find_vary(*dep[j]);
            if (!v || vary_room(*v) < 2) continue;
            int fwd = probe_direction(j, *v, false);
            if (fwd == 0) continue;
            int rev = probe_direction(j, *v, true);
            if (fwd == rev) spec.order_by.emplace_back(*dep[j], fwd > 0);
        }
        // one secondary key: vary another projected column under a tie
        if (!spec.order_by.empty()) {
            for (size_t j = 0; j < ncols; ++j) {
                if (!candidate_ok(j)) continue;
                if (*dep[j] == spec.order_by.front().first) continue;
                const VarySpec* v = find_vary(*dep[j]);
                if (!v || vary_room(*v) < 2) continue;
                int fwd = probe_direction(j, *v, false);
                if (fwd == 0) continue;
                int rev = probe_direction(j, *v, true);
                if (fwd == rev) {
                    spec.order_by.emplace_back(*dep[j], fwd > 0);
                    break;
                }
            }
        }
    }

    // ---- LIMIT ----
    if (opts.detect_limit) {
        const VarySpec* wide = nullptr;
        for (const auto& v : varies) {
            if (v.text_mode || vary_room(v) < 14) continue;
            if (spec.grouped) {
                bool key = false;
                for (const auto& g : spec.group_by)
                    for (const auto& c : v.cols)
                        if (g == c) key = true;
                if (!key) continue;
            }
            wide = &v;
            break;
        }
        if (wide) {
            auto inflate_count = [&](int k) -> std::optional<size_t> {
                UndoToken mark = m.mark();
                for (int i = 0; i < k; ++i) insert_universe(*wide, i);
                InvokeOutcome probe = oracle.invoke(db);
                m.undo_all_after(mark);
                if (!probe.ok()) return std::nullopt;
                return probe.result->rows.size();
            };
            auto o1 = inflate_count(8);
            auto o2 = inflate_count(12);
            if (o1 && o2 && *o1 == *o2 && *o1 < r0.rows.size() + 8)
                spec.limit = static_cast<long long>(*o1);
        }
    }
}

}  // namespace

BranchSpec extract_branch(Mutator& m, Oracle& oracle, const UnionFamily& family, size_t branch_idx,
                          const ExtractOptions& opts) {
    DatabaseState& db = m.db();
    const BranchFrom& bf = family.branches[branch_idx];
    BranchSpec spec;
    spec.tables = bf.tables;
    spec.optional = bf.optional;

    UndoToken iso = isolate_subquery(m, bf.tables, family.t_h);

    std::vector<std::string> required;
    std::vector<std::string> tables_order;
    for (const auto& t : db.catalog().tables) {
        if (!bf.tables.count(t.name)) continue;
        tables_order.push_back(t.name);
        if (!bf.optional.count(t.name)) required.push_back(t.name);
    }

    // --- outer-join key recovery on the full isolated state ---
    for (const auto& opt_table : bf.optional) {
        struct Candidate { ColKey on_opt, on_req; };
        std::vector<Candidate> candidates;
        const TableSchema& ts = db.catalog().table(opt_table);
        for (const auto& fk : ts.foreign_keys) {
            if (!bf.tables.count(fk.ref_table) || bf.optional.count(fk.ref_table)) continue;
            if (fk.columns.size() != 1) continue;
            candidates.push_back({ColKey{opt_table, fk.columns[0]},
                                  ColKey{fk.ref_table, fk.ref_columns[0]}});
        }
        for (const auto& req : required) {
            for (const auto& fk : db.catalog().table(req).foreign_keys) {
                if (fk.ref_table != opt_table || fk.columns.size() != 1) continue;
                candidates.push_back({ColKey{opt_table, fk.ref_columns[0]},
                                      ColKey{req, fk.columns[0]}});
            }
        }

        UndoToken vt = m.void_tables({opt_table});
        InvokeOutcome voided = oracle.invoke(db);
        std::string void_digest = voided.ok() ? voided.result->digest() : "err";
        m.undo(vt);

        for (const auto& cand : candidates) {
            // Mismatch every key on the optional side: under a left join
            // that is indistinguishable from voiding the table.
            const AttrDomain& dom = domain_of(db, cand.on_opt);
            std::set<std::string> partner_values;
            int pci = column_index(db, cand.on_req);
            for (const auto& sr : db.rows(cand.on_req.table))
                partner_values.insert(canonical_text(sr.values[static_cast<size_t>(pci)]));
            UndoToken mark = m.mark();
            long long fresh = dom.grid_size() - 1;
            bool feasible = true;
            std::vector<std::pair<long long, Value>> assignments;
            for (const auto& sr : db.rows(cand.on_opt.table)) {
                while (fresh >= 0 && partner_values.count(canonical_text(dom.value_at(fresh)))) --fresh;
                if (fresh < 0) { feasible = false; break; }
                assignments.emplace_back(sr.id, dom.value_at(fresh));
                --fresh;
            }
            if (!feasible) continue;
            for (const auto& [rid, v] : assignments)
                m.set_value_row(cand.on_opt.table, rid, cand.on_opt.column, v);
            InvokeOutcome mismatched = oracle.invoke(db);
            std::string mm_digest = mismatched.ok() ? mismatched.result->digest() : "err";
            m.undo_all_after(mark);
            if (mm_digest == void_digest) {
                LojLink link;
                link.optional_table = opt_table;
                link.fk_col = cand.on_opt;
                link.ref_col = cand.on_req;
                const auto& pk = ts.primary_key;
                link.escape_col = pk.empty() ? cand.on_opt : ColKey{opt_table, pk[0]};
                spec.loj.push_back(std::move(link));
                break;
            }
        }
    }

    // --- minimize onto the single-row database ---
    MinimizeOptions mo;
    mo.tables = tables_order;
    mo.optional_tables = bf.optional;
    mo.purpose = "branch" + std::to_string(branch_idx);
    MinimizeStats mstats;
    UndoToken min_tok = minimize(m, oracle, mo, &mstats);

    // Pin outer-join rows onto a matching pair when the data allows it;
    // filters behind padding are unreachable otherwise.
    for (auto& link : spec.loj) {
        Value partner = cell_value(db, link.ref_col);
        if (!domain_of(db, link.fk_col).contains(partner)) continue;
        UndoToken tok = m.set_value(link.fk_col.table, link.fk_col.column, partner);
        if (oracle.invoke(db).fit()) {
            link.pinned = true;
        } else {
            m.undo(tok);
            spec.notes.push_back("padding masks filters behind " + link.optional_table);
        }
    }

    // --- s-value sweep and predicate extraction ---
    auto svi = compute_svi_all(m, oracle, bf.tables);

    std::vector<ColKey> inlist_queue;
    for (auto& [col, s] : svi) {
        const AttrDomain& dom = domain_of(db, col);
        if (dom.kind == DomainKind::TextCategorical) {
            // Any binding narrower than the whole enum goes through the
            // literal loop; a full-range sweep means no predicate.
            if (s.non_monotone || !(s.at_domain_min && s.at_domain_max)) inlist_queue.push_back(col);
        } else if (s.non_monotone) {
            spec.notes.push_back("non-monotone satisfaction on " + col.text() +
                                 " (value disjunction outside categorical scope)");
        }
    }

    auto edges = enumerate_inequality_candidates(db, svi);
    for (const auto& e : edges) {
        if (auto atom = confirm_inequality(m, oracle, e, svi)) spec.atoms.push_back(*atom);
    }

    spec.cliques = extract_equalities(m, oracle, svi);
    std::set<ColKey> clique_members;
    for (const auto& cl : spec.cliques) {
        for (size_t i = 0; i + 1 < cl.members.size(); ++i)
            spec.atoms.push_back(PredicateAtom::algebraic(cl.members[i], CmpOp::Eq,
                                                          cl.members[i + 1], "joint-mutation"));
        for (const auto& c : cl.members) clique_members.insert(c);
        if (cl.bounded_below)
            spec.atoms.push_back(
                PredicateAtom::arith(cl.members.front(), CmpOp::Ge, cl.joint_lb, "joint-bounds"));
        if (cl.bounded_above)
            spec.atoms.push_back(
                PredicateAtom::arith(cl.members.front(), CmpOp::Le, cl.joint_ub, "joint-bounds"));
    }

    // Point singletons on ordered domains are plain equality filters;
    // categorical ones already sit in the IN-list queue.
    for (const auto& [col, s] : svi) {
        if (!s.point() || clique_members.count(col)) continue;
        const AttrDomain& dom = domain_of(db, col);
        if (dom.kind == DomainKind::TextCategorical) continue;
        spec.atoms.push_back(PredicateAtom::arith(col, CmpOp::Eq, s.lb, "point-svi"));
    }

    // Interval bounds become arithmetic filters unless the bound floats
    // with another column (those became algebraic atoms above).
    for (const auto& [col, s] : svi) {
        if (s.point() || clique_members.count(col)) continue;
        const AttrDomain& dom = domain_of(db, col);
        if (dom.kind == DomainKind::TextCategorical) continue;
        bool part_of_algebraic = false;
        for (const auto& a : spec.atoms)
            if (a.kind == PredicateAtom::Kind::Algebraic && (a.col == col || a.rhs_col == col))
                part_of_algebraic = true;
        if (part_of_algebraic) continue;
        if (!s.at_domain_min)
            spec.atoms.push_back(PredicateAtom::arith(col, CmpOp::Ge, s.lb, "binary-search"));
        if (!s.at_domain_max)
            spec.atoms.push_back(PredicateAtom::arith(col, CmpOp::Le, s.ub, "binary-search"));
    }

    // Outer-join links surface as equi-join atoms (the degradation the
    // seed is expected to carry).
    for (const auto& link : spec.loj)
        spec.atoms.push_back(
            PredicateAtom::algebraic(link.fk_col, CmpOp::Eq, link.ref_col, "loj-degraded"));

    // Free-text columns: unconstrained, LIKE, or exact.
    for (const auto& tname : tables_order) {
        const TableSchema& ts = db.catalog().table(tname);
        for (const auto& c : ts.columns) {
            if (c.domain.kind != DomainKind::TextFree) continue;
            if (auto atom = extract_text_predicate(m, oracle, ColKey{tname, c.name}))
                spec.atoms.push_back(*atom);
        }
    }

    // --- tail clauses on the minimized database ---
    extract_tail(m, oracle, spec, svi, tables_order, required, opts);

    // escape probe: does violating a pinned filter survive through
    // outer-join padding?
    for (auto& link : spec.loj) {
        if (!link.pinned) continue;
        for (const auto& atom : spec.atoms) {
            if (atom.kind != PredicateAtom::Kind::Arith) continue;
            if (atom.op != CmpOp::Le && atom.op != CmpOp::Ge) continue;
            if (atom.col.table == link.optional_table) continue;
            const AttrDomain& dom = domain_of(db, atom.col);
            long long ord = ordinal_of(dom, atom.constant);
            long long lo_ord = ordinal_of(dom, dom.i_min), hi_ord = ordinal_of(dom, dom.i_max);
            std::optional<Value> violating;
            if (atom.op == CmpOp::Le && ord + 1 <= hi_ord)
                violating = value_of_ordinal(dom, hi_ord);
            else if (atom.op == CmpOp::Ge && ord - 1 >= lo_ord)
                violating = value_of_ordinal(dom, lo_ord);
            if (!violating) continue;
            UndoToken mark = m.mark();
            const AttrDomain& fkdom = domain_of(db, link.fk_col);
            long long unfresh = fkdom.grid_size() - 1;
            Value partner = cell_value(db, link.ref_col);
            while (same_cell(fkdom.value_at(unfresh), partner)) --unfresh;
            m.set_value(link.fk_col.table, link.fk_col.column, fkdom.value_at(unfresh));
            m.set_value(atom.col.table, atom.col.column, *violating);
            bool fit = oracle.invoke(db).fit();
            m.undo_all_after(mark);
            if (fit) link.escape_active = true;
        }
    }

    // --- literal loops need the pre-minimize instance back ---
    m.undo_all_after(min_tok);
    for (const auto& col : inlist_queue) {
        spec.atoms.push_back(
            extract_in_list(m, oracle, col, tables_order, bf.optional, opts));
    }

    m.undo(iso);
    return spec;
}

}  // namespace hqe
