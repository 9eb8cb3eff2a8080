#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hqe/resultset.hpp"
#include "hqe/schema.hpp"

namespace hqe {

struct MutationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rows carry stable ids so undo re-inserts them in place and digests
// stay deterministic across delete/restore cycles.
struct StoredRow {
    long long id;
    Row values;
};

struct TableData {
    long long next_id = 1;
    std::vector<StoredRow> rows;  // kept sorted by id
};

// Opaque LIFO handle for reverting a mutation.  Tokens must be undone
// in reverse order of issue; anything else is rejected.
struct UndoToken {
    long long seq = -1;
};

// Snapshot of a relational instance plus the mutation overlays the
// extraction drives: renames (for error-probing) and voided tables.
class DatabaseState {
  public:
    DatabaseState() = default;
    explicit DatabaseState(SchemaCatalog catalog);

    const SchemaCatalog& catalog() const { return catalog_; }
    long long generation() const { return generation_; }

    // Name resolution honoring the rename overlay: a table renamed away
    // no longer answers to its original name.
    bool resolves(const std::string& name) const;
    bool is_void(const std::string& name) const;
    const std::vector<StoredRow>& rows(const std::string& name) const;
    size_t row_count(const std::string& name) const;

    // --- loading / plain edits (not undo-tracked) ---
    void insert_row(const std::string& table, Row values);
    void clear_table(const std::string& table);
    // CSV directory: one <table>.csv per catalog table, header row
    // mandatory, empty field = NULL.  require_null_free rejects NULLs,
    // which is the contract for the initial instance.
    void load_csv_dir(const std::string& dir, bool require_null_free);
    void assert_null_free() const;
    void dump_csv_dir(const std::string& dir) const;

    // --- undo-tracked mutations ---
    UndoToken void_tables(const std::set<std::string>& tables);
    UndoToken rename_table(const std::string& table, const std::string& dummy);
    UndoToken set_cell(const std::string& table, long long row_id, const std::string& column,
                       const Value& v);
    UndoToken set_cell_first_row(const std::string& table, const std::string& column, const Value& v);
    UndoToken delete_rows(const std::string& table, const std::vector<long long>& row_ids);
    UndoToken insert_rows(const std::string& table, const std::vector<Row>& rows);

    void undo(UndoToken token);
    void undo_all_after(UndoToken token);  // unwinds back to (and incl.) token
    long long undo_depth() const { return static_cast<long long>(undo_stack_.size()); }
    long long next_undo_seq() const { return next_undo_seq_; }

    std::string digest() const;
    bool deep_equal(const DatabaseState& other) const;
    DatabaseState clone() const { return *this; }

  private:
    struct UndoEntry;
    TableData& table_data(const std::string& name);
    const TableData& table_data(const std::string& name) const;
    UndoToken push_undo(UndoEntry e);

    SchemaCatalog catalog_;
    std::map<std::string, TableData> tables_;
    std::map<std::string, std::string> rename_overlay_;  // original -> effective
    std::set<std::string> void_set_;
    long long generation_ = 0;
    long long next_undo_seq_ = 1;

    struct UndoEntry {
        long long seq;
        enum Kind { Void, Rename, SetCell, DeleteRows, InsertRows } kind;
        std::set<std::string> voided;
        std::string table;
        std::string dummy;
        long long row_id = 0;
        int column_index = -1;
        Value old_value;
        std::vector<StoredRow> removed_rows;   // DeleteRows: restore set; Void: per-table below
        std::map<std::string, std::vector<StoredRow>> voided_rows;
        std::vector<long long> inserted_ids;
    };
    std::vector<UndoEntry> undo_stack_;
};

}  // namespace hqe
