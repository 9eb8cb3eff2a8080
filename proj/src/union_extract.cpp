#include "hqe/union_extract.hpp"

#include <algorithm>

namespace hqe {

namespace {

std::string set_text(const TableSet& s) {
    std::string out = "{";
    for (const auto& t : s) out += (out.size() > 1 ? "," : "") + t;
    return out + "}";
}

}  // namespace

std::vector<std::string> extract_tables_ebe(Mutator& m, Oracle& oracle) {
    std::vector<std::string> t_h;
    for (const auto& t : m.db().catalog().tables) {
        UndoToken tok = m.rename_table(t.name, "__probe_" + t.name);
        InvokeOutcome out = oracle.invoke(m.db());
        m.undo(tok);
        if (!out.ok() && out.error->kind == EngineError::Kind::Resolution) t_h.push_back(t.name);
    }
    return t_h;
}

TableSet extract_common_tables(Mutator& m, Oracle& oracle, const std::vector<std::string>& t_h) {
    TableSet common;
    for (const auto& t : t_h) {
        UndoToken tok = m.void_tables({t});
        bool fit = oracle.invoke(m.db()).fit();
        m.undo(tok);
        if (!fit) common.insert(t);
    }
    return common;
}

UnionFamily assign_tables(Mutator& m, Oracle& oracle, const std::vector<std::string>& t_h,
                          const TableSet& common, const AssignOptions& opts) {
    UnionFamily fam;
    fam.t_h = t_h;
    fam.hard_common = common;

    std::vector<std::string> aux_all;
    for (const auto& t : t_h)
        if (!common.count(t)) aux_all.push_back(t);
    std::sort(aux_all.begin(), aux_all.end());

    if (aux_all.size() <= 1) {
        // Non-union shape (or one stray padding suspect): a single branch
        // owning every table.  The augmentation pass sorts out optionals.
        BranchFrom b;
        b.tables.insert(t_h.begin(), t_h.end());
        fam.branches.push_back(std::move(b));
        fam.common = TableSet(t_h.begin(), t_h.end());
        return fam;
    }
    if (static_cast<int>(aux_all.size()) > opts.max_aux_tables)
        throw ScopeError("auxiliary table count " + std::to_string(aux_all.size()) +
                         " exceeds the power-set cap of " + std::to_string(opts.max_aux_tables));

    // Enumerate the proper, non-empty subsets ascending by (size, lex).
    size_t n = aux_all.size();
    std::vector<TableSet> lattice;
    for (size_t mask = 1; mask + 1 < (size_t(1) << n); ++mask) {
        TableSet s;
        for (size_t i = 0; i < n; ++i)
            if (mask & (size_t(1) << i)) s.insert(aux_all[i]);
        lattice.push_back(std::move(s));
    }
    std::sort(lattice.begin(), lattice.end(), [](const TableSet& a, const TableSet& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    fam.lattice_size = static_cast<long long>(lattice.size());

    TableSet full(aux_all.begin(), aux_all.end());
    std::vector<TableSet> core{full};  // voiding every aux table kills all branches
    std::vector<TableSet> side;

    auto is_subset = [](const TableSet& a, const TableSet& b) {
        return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };

    for (const auto& u : lattice) {
        bool shortcut = false;
        for (const auto& c : core) {
            if (c.size() >= u.size()) continue;
            if (is_subset(c, u)) { shortcut = true; break; }
        }
        if (shortcut) {
            core.push_back(u);
            continue;
        }
        UndoToken tok = m.void_tables(u);
        ++fam.void_probes;
        bool fit = oracle.invoke(m.db()).fit();
        m.undo(tok);
        if (!fit) core.push_back(u);
        else side.push_back(u);
    }

    // Maximal side members: adding any remaining aux table lands in core.
    std::vector<TableSet> max_side;
    for (const auto& s : side) {
        bool maximal = true;
        for (const auto& t : full) {
            if (s.count(t)) continue;
            TableSet grown = s;
            grown.insert(t);
            bool in_core = false;
            for (const auto& c : core)
                if (c == grown) { in_core = true; break; }
            if (!in_core) { maximal = false; break; }
        }
        if (maximal) max_side.push_back(s);
    }
    if (max_side.empty())
        throw AssumptionViolation("no maximal side set exists; subqueries do not produce "
                                  "independent FIT results");

    std::vector<TableSet> aux;
    for (const auto& ms : max_side) {
        TableSet a;
        for (const auto& t : full)
            if (!ms.count(t)) a.insert(t);
        aux.push_back(std::move(a));
    }
    for (size_t i = 0; i < aux.size(); ++i)
        for (size_t j = 0; j < aux.size(); ++j)
            if (i != j && is_subset(aux[i], aux[j]))
                throw AssumptionViolation("per-branch auxiliary sets are comparable: " +
                                          set_text(aux[i]) + " within " + set_text(aux[j]));

    fam.core_tables = std::move(core);
    fam.side_tables = std::move(side);
    fam.max_side_tables = max_side;
    fam.aux = aux;
    for (const auto& a : aux) {
        BranchFrom b;
        b.tables = a;
        b.tables.insert(common.begin(), common.end());
        fam.branches.push_back(std::move(b));
    }
    fam.common = common;
    return fam;
}

UndoToken isolate_subquery(Mutator& m, const TableSet& fs, const std::vector<std::string>& t_h) {
    TableSet others;
    for (const auto& t : t_h)
        if (!fs.count(t)) others.insert(t);
    return m.void_tables(others);
}

void augment_branches(Mutator& m, Oracle& oracle, UnionFamily& family) {
    std::vector<TableSet> raw_aux = family.aux;  // assign-stage sets, used as probe guards
    for (size_t bi = 0; bi < family.branches.size(); ++bi) {
        auto& branch = family.branches[bi];
        // Attachment: with the branch isolated, restoring an absent table
        // must leave the result untouched.  A digest change means the
        // table participates in this branch without being essential to
        // its FIT result, which is the outer-join signature.
        TableSet absent;
        for (const auto& t : family.t_h)
            if (!branch.tables.count(t)) absent.insert(t);

        UndoToken iso = isolate_subquery(m, branch.tables, family.t_h);
        InvokeOutcome base = oracle.invoke(m.db());
        std::string base_digest = base.ok() ? base.result->digest() : "err";
        m.undo(iso);

        for (const auto& t : absent) {
            // Restoring t must not wake a sibling branch, or the digest
            // change says nothing about this branch.
            bool wakes_sibling = false;
            for (size_t bj = 0; bj < raw_aux.size(); ++bj) {
                if (bj == bi) continue;
                bool covered = true;
                for (const auto& a : raw_aux[bj])
                    if (a != t && !branch.tables.count(a)) covered = false;
                if (covered) wakes_sibling = true;
            }
            if (wakes_sibling) continue;
            TableSet others;
            for (const auto& o : absent)
                if (o != t) others.insert(o);
            UndoToken tok = m.void_tables(others);
            InvokeOutcome probe = oracle.invoke(m.db());
            m.undo(tok);
            std::string d = probe.ok() ? probe.result->digest() : "err";
            if (d != base_digest) {
                branch.tables.insert(t);
                branch.optional.insert(t);
            }
        }

        // Within-branch voidability: a FROM table whose void leaves the
        // isolated branch FIT is an outer-join padding suspect too.
        UndoToken iso2 = isolate_subquery(m, branch.tables, family.t_h);
        for (const auto& t : branch.tables) {
            if (branch.optional.count(t)) continue;
            UndoToken tok = m.void_tables({t});
            bool fit = oracle.invoke(m.db()).fit();
            m.undo(tok);
            if (fit) branch.optional.insert(t);
        }
        m.undo(iso2);
    }

    // Finalize the family from the actual FROM sets.
    family.common.clear();
    for (const auto& t : family.t_h) {
        bool everywhere = true;
        for (const auto& b : family.branches)
            if (!b.tables.count(t)) everywhere = false;
        if (everywhere) family.common.insert(t);
    }
    family.aux.clear();
    family.aux_all.clear();
    for (const auto& b : family.branches) {
        TableSet a;
        for (const auto& t : b.tables)
            if (!family.common.count(t)) a.insert(t);
        family.aux_all.insert(a.begin(), a.end());
        family.aux.push_back(std::move(a));
    }
    family.max_side_tables.clear();
    if (family.branches.size() > 1) {
        for (const auto& a : family.aux) {
            TableSet ms;
            for (const auto& t : family.aux_all)
                if (!a.count(t)) ms.insert(t);
            family.max_side_tables.push_back(std::move(ms));
        }
    }
}

}  // namespace hqe
