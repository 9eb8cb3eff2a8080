#include "hqe/database.hpp"

#include <algorithm>
#include <filesystem>

#include "hqe/util.hpp"

namespace hqe {

namespace fs = std::filesystem;

DatabaseState::DatabaseState(SchemaCatalog catalog) : catalog_(std::move(catalog)) {
    catalog_.validate();
    for (const auto& t : catalog_.tables) tables_[t.name] = TableData{};
}

bool DatabaseState::resolves(const std::string& name) const {
    auto it = rename_overlay_.find(name);
    if (it != rename_overlay_.end() && it->second != name) return false;
    return tables_.count(name) > 0;
}

bool DatabaseState::is_void(const std::string& name) const { return void_set_.count(name) > 0; }

const std::vector<StoredRow>& DatabaseState::rows(const std::string& name) const {
    static const std::vector<StoredRow> kEmpty;
    if (is_void(name)) return kEmpty;
    return table_data(name).rows;
}

size_t DatabaseState::row_count(const std::string& name) const { return rows(name).size(); }

TableData& DatabaseState::table_data(const std::string& name) {
    auto it = tables_.find(name);
    if (it == tables_.end()) throw MutationError("unknown table " + name);
    return it->second;
}

const TableData& DatabaseState::table_data(const std::string& name) const {
    auto it = tables_.find(name);
    if (it == tables_.end()) throw MutationError("unknown table " + name);
    return it->second;
}

void DatabaseState::insert_row(const std::string& table, Row values) {
    const TableSchema& schema = catalog_.table(table);
    if (values.size() != schema.columns.size())
        throw MutationError("row arity mismatch for " + table);
    TableData& td = table_data(table);
    td.rows.push_back(StoredRow{td.next_id++, std::move(values)});
    ++generation_;
}

void DatabaseState::clear_table(const std::string& table) {
    table_data(table).rows.clear();
    ++generation_;
}

namespace {

Value parse_cell(const AttrDomain& dom, const std::string& text) {
    if (text.empty()) return std::monostate{};
    switch (dom.kind) {
        case DomainKind::Integer:
            return std::stoll(text);
        case DomainKind::Decimal: {
            auto dot = text.find('.');
            int sc = dot == std::string::npos ? 0 : static_cast<int>(text.size() - dot - 1);
            std::string digits = text;
            if (dot != std::string::npos) digits.erase(dot, 1);
            return Decimal{std::stoll(digits), sc}.rescaled(std::max(sc, dom.scale));
        }
        case DomainKind::DateKind: {
            auto d = Date::parse(text);
            if (!d) throw MutationError("bad date cell: " + text);
            return *d;
        }
        case DomainKind::TextCategorical:
        case DomainKind::TextFree:
            return text;
    }
    return std::monostate{};
}

}  // namespace

void DatabaseState::load_csv_dir(const std::string& dir, bool require_null_free) {
    for (const auto& t : catalog_.tables) {
        fs::path p = fs::path(dir) / (t.name + ".csv");
        if (!fs::exists(p)) throw MutationError("missing data file " + p.string());
        auto rows = parse_csv(read_file(p.string()));
        if (rows.empty()) throw MutationError("data file lacks header row: " + p.string());
        const auto& header = rows.front();
        if (header.size() != t.columns.size())
            throw MutationError("header arity mismatch in " + p.string());
        for (size_t i = 0; i < header.size(); ++i)
            if (lower(header[i]) != t.columns[i].name)
                throw MutationError("header mismatch in " + p.string() + ": expected " +
                                    t.columns[i].name + ", got " + header[i]);
        clear_table(t.name);
        for (size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != t.columns.size())
                throw MutationError("row arity mismatch in " + p.string() + " line " +
                                    std::to_string(r + 1));
            Row row;
            row.reserve(t.columns.size());
            for (size_t c = 0; c < t.columns.size(); ++c) {
                Value v = parse_cell(t.columns[c].domain, rows[r][c]);
                if (require_null_free && is_null(v))
                    throw MutationError("NULL cell in initial instance at " + t.name + "." +
                                        t.columns[c].name + " row " + std::to_string(r));
                row.push_back(std::move(v));
            }
            insert_row(t.name, std::move(row));
        }
    }
}

void DatabaseState::assert_null_free() const {
    for (const auto& [name, td] : tables_)
        for (const auto& sr : td.rows)
            for (const auto& v : sr.values)
                if (is_null(v)) throw MutationError("NULL cell found in table " + name);
}

void DatabaseState::dump_csv_dir(const std::string& dir) const {
    fs::create_directories(dir);
    for (const auto& t : catalog_.tables) {
        // Effective name honors renames; voided tables dump headers only.
        std::string eff = t.name;
        auto it = rename_overlay_.find(t.name);
        if (it != rename_overlay_.end()) eff = it->second;
        std::vector<std::string> header;
        for (const auto& c : t.columns) header.push_back(c.name);
        std::string out = csv_line(header);
        if (!is_void(t.name))
            for (const auto& sr : table_data(t.name).rows) {
                std::vector<std::string> fields;
                for (const auto& v : sr.values) fields.push_back(canonical_text(v));
                out += csv_line(fields);
            }
        write_file((fs::path(dir) / (eff + ".csv")).string(), out);
    }
}

UndoToken DatabaseState::push_undo(UndoEntry e) {
    e.seq = next_undo_seq_++;
    undo_stack_.push_back(std::move(e));
    ++generation_;
    return UndoToken{undo_stack_.back().seq};
}

UndoToken DatabaseState::void_tables(const std::set<std::string>& ts) {
    UndoEntry e;
    e.kind = UndoEntry::Void;
    for (const auto& t : ts) {
        if (!tables_.count(t)) throw MutationError("unknown table " + t);
        if (void_set_.count(t)) continue;  // already void: nothing to stash
        e.voided.insert(t);
        e.voided_rows[t] = table_data(t).rows;
        table_data(t).rows.clear();
        void_set_.insert(t);
    }
    return push_undo(std::move(e));
}

UndoToken DatabaseState::rename_table(const std::string& table, const std::string& dummy) {
    if (!tables_.count(table)) throw MutationError("unknown table " + table);
    if (tables_.count(dummy) || dummy == table) throw MutationError("rename collision: " + dummy);
    if (rename_overlay_.count(table)) throw MutationError("table already renamed: " + table);
    rename_overlay_[table] = dummy;
    UndoEntry e;
    e.kind = UndoEntry::Rename;
    e.table = table;
    e.dummy = dummy;
    return push_undo(std::move(e));
}

UndoToken DatabaseState::set_cell(const std::string& table, long long row_id,
                                  const std::string& column, const Value& v) {
    const TableSchema& schema = catalog_.table(table);
    int ci = schema.column_index(column);
    if (ci < 0) throw MutationError("unknown column " + table + "." + column);
    if (!is_null(v) && !schema.columns[static_cast<size_t>(ci)].domain.contains(v))
        throw MutationError("value outside domain for " + table + "." + column + ": " +
                            canonical_text(v));
    TableData& td = table_data(table);
    for (auto& sr : td.rows) {
        if (sr.id != row_id) continue;
        UndoEntry e;
        e.kind = UndoEntry::SetCell;
        e.table = table;
        e.row_id = row_id;
        e.column_index = ci;
        e.old_value = sr.values[static_cast<size_t>(ci)];
        sr.values[static_cast<size_t>(ci)] = v;
        return push_undo(std::move(e));
    }
    throw MutationError("row id not found in " + table);
}

UndoToken DatabaseState::set_cell_first_row(const std::string& table, const std::string& column,
                                            const Value& v) {
    const auto& rs = rows(table);
    if (rs.empty()) throw MutationError("set_cell on empty table " + table);
    return set_cell(table, rs.front().id, column, v);
}

UndoToken DatabaseState::delete_rows(const std::string& table, const std::vector<long long>& ids) {
    TableData& td = table_data(table);
    std::set<long long> want(ids.begin(), ids.end());
    UndoEntry e;
    e.kind = UndoEntry::DeleteRows;
    e.table = table;
    std::vector<StoredRow> kept;
    kept.reserve(td.rows.size());
    for (auto& sr : td.rows) {
        if (want.count(sr.id)) e.removed_rows.push_back(sr);
        else kept.push_back(std::move(sr));
    }
    if (e.removed_rows.size() != want.size()) throw MutationError("delete_rows: missing row id");
    td.rows = std::move(kept);
    return push_undo(std::move(e));
}

UndoToken DatabaseState::insert_rows(const std::string& table, const std::vector<Row>& rows_in) {
    const TableSchema& schema = catalog_.table(table);
    TableData& td = table_data(table);
    UndoEntry e;
    e.kind = UndoEntry::InsertRows;
    e.table = table;
    for (const auto& r : rows_in) {
        if (r.size() != schema.columns.size()) throw MutationError("row arity mismatch for " + table);
        td.rows.push_back(StoredRow{td.next_id, r});
        e.inserted_ids.push_back(td.next_id);
        ++td.next_id;
    }
    return push_undo(std::move(e));
}

void DatabaseState::undo(UndoToken token) {
    if (undo_stack_.empty() || undo_stack_.back().seq != token.seq)
        throw MutationError("out-of-order undo rejected (tokens are LIFO)");
    UndoEntry e = std::move(undo_stack_.back());
    undo_stack_.pop_back();
    ++generation_;
    switch (e.kind) {
        case UndoEntry::Void:
            for (const auto& t : e.voided) {
                table_data(t).rows = e.voided_rows[t];
                void_set_.erase(t);
            }
            break;
        case UndoEntry::Rename:
            rename_overlay_.erase(e.table);
            break;
        case UndoEntry::SetCell:
            for (auto& sr : table_data(e.table).rows)
                if (sr.id == e.row_id) {
                    sr.values[static_cast<size_t>(e.column_index)] = e.old_value;
                    return;
                }
            throw MutationError("undo target row vanished in " + e.table);
        case UndoEntry::DeleteRows: {
            TableData& td = table_data(e.table);
            for (auto& sr : e.removed_rows) td.rows.push_back(std::move(sr));
            std::sort(td.rows.begin(), td.rows.end(),
                      [](const StoredRow& a, const StoredRow& b) { return a.id < b.id; });
            break;
        }
        case UndoEntry::InsertRows: {
            TableData& td = table_data(e.table);
            std::set<long long> drop(e.inserted_ids.begin(), e.inserted_ids.end());
            std::erase_if(td.rows, [&](const StoredRow& sr) { return drop.count(sr.id) > 0; });
            break;
        }
    }
}

void DatabaseState::undo_all_after(UndoToken token) {
    while (!undo_stack_.empty() && undo_stack_.back().seq >= token.seq)
        undo(UndoToken{undo_stack_.back().seq});
}

std::string DatabaseState::digest() const {
    std::string blob;
    for (const auto& [name, td] : tables_) {
        blob += "#" + name;
        auto it = rename_overlay_.find(name);
        if (it != rename_overlay_.end()) blob += "->" + it->second;
        if (void_set_.count(name)) blob += "[void]";
        blob += "\n";
        for (const auto& sr : td.rows) {
            std::vector<std::string> fields{std::to_string(sr.id)};
            for (const auto& v : sr.values)
                fields.push_back(is_null(v) ? "\\N" : canonical_text(v));
            blob += csv_line(fields);
        }
    }
    return sha256_hex(blob);
}

bool DatabaseState::deep_equal(const DatabaseState& other) const {
    return digest() == other.digest();
}

}  // namespace hqe
