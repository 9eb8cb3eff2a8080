#pragma once

#include <set>
#include <string>
#include <vector>

#include "hqe/database.hpp"
#include "hqe/journal.hpp"
#include "hqe/oracle.hpp"

namespace hqe {

struct MinimizeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Journaling wrapper over the undo-tracked DatabaseState mutations.
// Every state change in an extraction session goes through here so the
// journal can replay the exact sequence.
class Mutator {
  public:
    Mutator(DatabaseState& db, Journal* journal = nullptr) : db_(db), journal_(journal) {}

    DatabaseState& db() { return db_; }
    const DatabaseState& db() const { return db_; }
    Journal* journal() { return journal_; }

    UndoToken void_tables(const std::set<std::string>& ts);
    UndoToken rename_table(const std::string& table, const std::string& dummy);
    // Single-row convenience used on the minimized database.
    UndoToken set_value(const std::string& table, const std::string& column, const Value& v);
    UndoToken set_value_row(const std::string& table, long long row_id, const std::string& column,
                            const Value& v);
    UndoToken delete_rows(const std::string& table, const std::vector<long long>& ids);
    UndoToken insert_rows(const std::string& table, const std::vector<Row>& rows);

    void undo(UndoToken token);
    void undo_all_after(UndoToken token);
    // Marker for "current stack position": undoing to it unwinds
    // everything mutated after this call.
    UndoToken mark() const { return UndoToken{next_seq_hint()}; }

  private:
    long long next_seq_hint() const;
    void log(nlohmann::json rec);
    DatabaseState& db_;
    Journal* journal_;
};

struct MinimizeStats {
    int halving_rounds = 0;
    long long invocations = 0;
    // Tables whose final single row can be removed while the result
    // stays FIT (outer-join padding suspects).
    std::set<std::string> removable_singletons;
};

struct MinimizeOptions {
    // Tables whose rows get reduced; everything else is emptied.
    std::vector<std::string> tables;
    // Tables allowed to fail the strict "last row essential" post-check.
    std::set<std::string> optional_tables;
    std::string purpose = "minimize";
};

// Recursive-halving reduction of the current state onto a single row
// per participating table, preserving a FIT result throughout.  Runs in
// place; returns the token that unwinds all of its mutations.  The
// post-check (removing any remaining row must break FIT) runs inside.
UndoToken minimize(Mutator& m, Oracle& oracle, const MinimizeOptions& opts,
                   MinimizeStats* stats = nullptr);

}  // namespace hqe
