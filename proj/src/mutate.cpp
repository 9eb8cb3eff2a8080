#include "hqe/mutate.hpp"

#include <algorithm>

namespace hqe {

long long Mutator::next_seq_hint() const { return db_.next_undo_seq(); }

void Mutator::log(nlohmann::json rec) {
    if (journal_) journal_->add(std::move(rec));
}

UndoToken Mutator::void_tables(const std::set<std::string>& ts) {
    UndoToken tok = db_.void_tables(ts);
    log({{"t", "mutation"}, {"op", "void"}, {"tables", std::vector<std::string>(ts.begin(), ts.end())},
         {"seq", tok.seq}});
    return tok;
}

UndoToken Mutator::rename_table(const std::string& table, const std::string& dummy) {
    UndoToken tok = db_.rename_table(table, dummy);
    log({{"t", "mutation"}, {"op", "rename"}, {"table", table}, {"dummy", dummy}, {"seq", tok.seq}});
    return tok;
}

UndoToken Mutator::set_value(const std::string& table, const std::string& column, const Value& v) {
    const auto& rows = db_.rows(table);
    if (rows.empty()) throw MutationError("set_value on empty table " + table);
    return set_value_row(table, rows.front().id, column, v);
}

UndoToken Mutator::set_value_row(const std::string& table, long long row_id,
                                 const std::string& column, const Value& v) {
    UndoToken tok = db_.set_cell(table, row_id, column, v);
    log({{"t", "mutation"},
         {"op", "set"},
         {"table", table},
         {"row", row_id},
         {"column", column},
         {"value", value_to_json(v)},
         {"seq", tok.seq}});
    return tok;
}

UndoToken Mutator::delete_rows(const std::string& table, const std::vector<long long>& ids) {
    UndoToken tok = db_.delete_rows(table, ids);
    log({{"t", "mutation"}, {"op", "delete"}, {"table", table}, {"rows", ids}, {"seq", tok.seq}});
    return tok;
}

UndoToken Mutator::insert_rows(const std::string& table, const std::vector<Row>& rows) {
    UndoToken tok = db_.insert_rows(table, rows);
    nlohmann::json jrows = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& v : r) jr.push_back(value_to_json(v));
        jrows.push_back(jr);
    }
    log({{"t", "mutation"}, {"op", "insert"}, {"table", table}, {"values", jrows}, {"seq", tok.seq}});
    return tok;
}

void Mutator::undo(UndoToken token) {
    db_.undo(token);
    log({{"t", "mutation"}, {"op", "undo"}, {"seq", token.seq}});
}

void Mutator::undo_all_after(UndoToken token) {
    db_.undo_all_after(token);
    log({{"t", "mutation"}, {"op", "undo_after"}, {"seq", token.seq}});
}

UndoToken minimize(Mutator& m, Oracle& oracle, const MinimizeOptions& opts, MinimizeStats* stats) {
    MinimizeStats local;
    MinimizeStats& st = stats ? *stats : local;
    DatabaseState& db = m.db();
    UndoToken start = m.mark();
    if (m.journal())
        m.journal()->add({{"t", "minimize_begin"}, {"purpose", opts.purpose}, {"tables", opts.tables}});

    auto fit_now = [&]() {
        ++st.invocations;
        return oracle.invoke(db).fit();
    };

    if (!fit_now())
        throw MinimizeFailure("minimize requires a FIT result on the incoming state");

    // Hygiene: everything outside the participating set plays no role
    // in this (sub)query, so empty it.
    std::set<std::string> keep(opts.tables.begin(), opts.tables.end());
    std::set<std::string> drop;
    for (const auto& t : db.catalog().tables)
        if (!keep.count(t.name) && !db.is_void(t.name) && db.row_count(t.name) > 0)
            drop.insert(t.name);
    if (!drop.empty()) {
        m.void_tables(drop);
        if (!fit_now()) {
            m.undo_all_after(start);
            throw MinimizeFailure("emptying non-participating tables broke the FIT result");
        }
    }

    auto row_ids = [&](const std::string& t) {
        std::vector<long long> ids;
        for (const auto& sr : db.rows(t)) ids.push_back(sr.id);
        return ids;
    };

    bool progress = true;
    while (progress) {
        progress = false;
        for (const auto& t : opts.tables) {
            while (db.row_count(t) > 1) {
                ++st.halving_rounds;
                auto ids = row_ids(t);
                size_t half = ids.size() / 2;
                std::vector<long long> first(ids.begin(), ids.begin() + half);
                std::vector<long long> second(ids.begin() + half, ids.end());
                UndoToken tok = m.delete_rows(t, second);
                if (fit_now()) { progress = true; continue; }
                m.undo(tok);
                tok = m.delete_rows(t, first);
                if (fit_now()) { progress = true; continue; }
                m.undo(tok);
                // Neither half alone preserves FIT: fall back to
                // one-row-at-a-time elimination for this table.
                bool removed_one = false;
                for (long long id : ids) {
                    tok = m.delete_rows(t, {id});
                    if (fit_now()) { removed_one = true; break; }
                    m.undo(tok);
                }
                if (removed_one) { progress = true; continue; }
                break;  // stuck on this table for now; another table may unstick it
            }
        }
    }

    for (const auto& t : opts.tables) {
        if (db.row_count(t) > 1) {
            m.undo_all_after(start);
            throw MinimizeFailure("no FIT-preserving removal exists for table " + t);
        }
    }

    // Verified minimality: the surviving row of each table must be
    // essential, except for declared outer-join suspects.
    for (const auto& t : opts.tables) {
        if (db.row_count(t) != 1) {
            m.undo_all_after(start);
            throw MinimizeFailure("table " + t + " minimized to zero rows");
        }
        UndoToken tok = m.delete_rows(t, row_ids(t));
        bool still_fit = fit_now();
        m.undo(tok);
        if (still_fit) {
            if (opts.optional_tables.count(t)) {
                st.removable_singletons.insert(t);
            } else {
                m.undo_all_after(start);
                throw MinimizeFailure("minimality post-check failed: last row of " + t +
                                      " is removable");
            }
        }
    }

    if (m.journal())
        m.journal()->add({{"t", "minimize_end"},
                          {"purpose", opts.purpose},
                          {"rounds", st.halving_rounds},
                          {"invocations", st.invocations}});
    return start;
}

}  // namespace hqe
