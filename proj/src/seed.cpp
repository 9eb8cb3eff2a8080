#include "hqe/seed.hpp"

#include <algorithm>
#include <chrono>

namespace hqe {

namespace {

// Columns render unqualified when unique across the branch tables.
ColumnRef ref_for(const ColKey& col, const TableSet& tables, const SchemaCatalog& catalog) {
    int owners = 0;
    for (const auto& t : tables)
        if (catalog.table(t).column_index(col.column) >= 0) ++owners;
    if (owners > 1) return ColumnRef{col.table, col.column};
    return ColumnRef{"", col.column};
}

Pred atom_pred(const PredicateAtom& a, const TableSet& tables, const SchemaCatalog& catalog) {
    switch (a.kind) {
        case PredicateAtom::Kind::Arith:
            return Pred::make_cmp(Expr::make_column(ref_for(a.col, tables, catalog)), a.op,
                                  Expr::make_literal(a.constant));
        case PredicateAtom::Kind::Algebraic:
            return Pred::make_cmp(Expr::make_column(ref_for(a.col, tables, catalog)), a.op,
                                  Expr::make_column(ref_for(a.rhs_col, tables, catalog)));
        case PredicateAtom::Kind::Like:
            return Pred::make_like(ref_for(a.col, tables, catalog), a.pattern);
        case PredicateAtom::Kind::InList:
            return Pred::make_in_list(ref_for(a.col, tables, catalog), a.literals);
    }
    throw ExtractionError("unreachable atom kind");
}

}  // namespace

Query assemble_seed(const std::vector<BranchSpec>& branches, const SchemaCatalog& catalog) {
    Query q;
    for (const auto& spec : branches) {
        QueryBlock b;
        for (const auto& t : spec.tables) b.from.push_back(FromItem{t, nullptr, "", JoinKind::Cross, {}});

        for (const auto& p : spec.projections) {
            SelectItem item;
            if (p.agg) {
                std::optional<Expr> arg;
                if (p.source) arg = Expr::make_column(ref_for(*p.source, spec.tables, catalog));
                item.expr = Expr::make_agg(*p.agg, std::move(arg));
            } else if (p.source) {
                item.expr = Expr::make_column(ref_for(*p.source, spec.tables, catalog));
            } else {
                item.expr = Expr::make_literal(Value{std::string("?")});
            }
            item.alias = p.alias;
            b.select.push_back(std::move(item));
        }

        // Escape-active outer joins wrap the branch's range filters in an
        // OR with the padding witness.
        std::vector<const LojLink*> escapes;
        for (const auto& l : spec.loj)
            if (l.escape_active) escapes.push_back(&l);

        std::vector<PredicateAtom> sorted_atoms = spec.atoms;
        std::sort(sorted_atoms.begin(), sorted_atoms.end(),
                  [](const PredicateAtom& a, const PredicateAtom& b) { return a.text() < b.text(); });

        std::vector<Pred> conjuncts;
        std::vector<Pred> escaped_filters;
        for (const auto& a : sorted_atoms) {
            bool escape_target = false;
            if (!escapes.empty() && a.kind == PredicateAtom::Kind::Arith &&
                (a.op == CmpOp::Le || a.op == CmpOp::Ge || a.op == CmpOp::Lt || a.op == CmpOp::Gt)) {
                escape_target = true;
                for (const auto* l : escapes)
                    if (a.col.table == l->optional_table) escape_target = false;
            }
            if (escape_target) escaped_filters.push_back(atom_pred(a, spec.tables, catalog));
            else conjuncts.push_back(atom_pred(a, spec.tables, catalog));
        }
        if (!escaped_filters.empty()) {
            Pred filters = escaped_filters.size() == 1 ? escaped_filters.front()
                                                       : Pred::make_and(escaped_filters);
            std::vector<Pred> alts{std::move(filters)};
            for (const auto* l : escapes)
                alts.push_back(Pred::make_is_null(ref_for(l->escape_col, spec.tables, catalog)));
            conjuncts.push_back(Pred::make_or(std::move(alts)));
        } else if (!escapes.empty()) {
            // no filters to guard; the escape disjunct alone is vacuous on
            // a NULL-free instance, so it is recorded but not rendered
        }
        if (!conjuncts.empty())
            b.where = conjuncts.size() == 1 ? conjuncts.front() : Pred::make_and(conjuncts);

        for (const auto& g : spec.group_by) b.group_by.push_back(ref_for(g, spec.tables, catalog));
        for (const auto& [col, asc] : spec.order_by)
            b.order_by.push_back(OrderItem{ref_for(col, spec.tables, catalog), asc});
        b.limit = spec.limit;
        q.branches.push_back(std::move(b));
    }
    return q;
}

SeedResult run_seed_extraction(Mutator& m, Oracle& oracle, const SeedOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    long long inv0 = oracle.invocation_count();
    SeedResult out;

    InvokeOutcome initial = oracle.invoke(m.db());
    if (!initial.fit())
        throw ExtractionError("hidden query does not produce a FIT result on the initial instance");

    std::vector<std::string> t_h = extract_tables_ebe(m, oracle);
    if (t_h.empty()) throw ExtractionError("no tables detected: every rename probe succeeded");

    TableSet common = extract_common_tables(m, oracle, t_h);
    out.family = assign_tables(m, oracle, t_h, common, opts.assign);
    augment_branches(m, oracle, out.family);

    for (size_t i = 0; i < out.family.branches.size(); ++i)
        out.branches.push_back(extract_branch(m, oracle, out.family, i, opts.extract));

    out.seed = assemble_seed(out.branches, m.db().catalog());
    out.seed_digest = canonical_digest(out.seed, &m.db().catalog());
    out.invocations = oracle.invocation_count() - inv0;
    out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count();
    if (m.journal()) {
        nlohmann::json rec = seed_report(out);
        rec["t"] = "union_report";
        m.journal()->add(std::move(rec));
    }
    return out;
}

nlohmann::json seed_report(const SeedResult& r) {
    auto set_list = [](const TableSet& s) { return std::vector<std::string>(s.begin(), s.end()); };
    nlohmann::json fam;
    fam["t_h"] = r.family.t_h;
    fam["hard_common"] = set_list(r.family.hard_common);
    fam["common"] = set_list(r.family.common);
    fam["aux_all"] = set_list(r.family.aux_all);
    fam["void_probes"] = r.family.void_probes;
    fam["lattice_size"] = r.family.lattice_size;
    auto sets_list = [&](const std::vector<TableSet>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : v) arr.push_back(set_list(s));
        return arr;
    };
    fam["core_tables"] = sets_list(r.family.core_tables);
    fam["side_tables"] = sets_list(r.family.side_tables);
    fam["max_side_tables"] = sets_list(r.family.max_side_tables);
    fam["aux"] = sets_list(r.family.aux);

    nlohmann::json branches = nlohmann::json::array();
    for (const auto& b : r.branches) {
        nlohmann::json jb;
        jb["tables"] = set_list(b.tables);
        jb["optional"] = set_list(b.optional);
        nlohmann::json atoms = nlohmann::json::array();
        for (const auto& a : b.atoms)
            atoms.push_back({{"text", a.text()}, {"provenance", a.provenance}});
        jb["atoms"] = atoms;
        jb["grouped"] = b.grouped;
        std::vector<std::string> gb;
        for (const auto& g : b.group_by) gb.push_back(g.text());
        jb["group_by"] = gb;
        jb["notes"] = b.notes;
        branches.push_back(std::move(jb));
    }
    return nlohmann::json{{"family", fam},
                          {"branches", branches},
                          {"seed_digest", r.seed_digest},
                          {"invocations", r.invocations},
                          {"elapsed_ms", r.elapsed_ms}};
}

}  // namespace hqe
