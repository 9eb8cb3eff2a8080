#include "hqe/schema.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hqe {

AttrDomain AttrDomain::integer_domain(long long lo, long long hi) {
    AttrDomain d;
    d.kind = DomainKind::Integer;
    d.i_min = lo;
    d.i_max = hi;
    return d;
}

AttrDomain AttrDomain::decimal_domain(int scale, Decimal lo, Decimal hi) {
    AttrDomain d;
    d.kind = DomainKind::Decimal;
    d.scale = scale;
    d.i_min = lo.rescaled(scale);
    d.i_max = hi.rescaled(scale);
    return d;
}

AttrDomain AttrDomain::date_domain(Date lo, Date hi) {
    AttrDomain d;
    d.kind = DomainKind::DateKind;
    d.i_min = lo;
    d.i_max = hi;
    return d;
}

AttrDomain AttrDomain::categorical(std::vector<std::string> values) {
    if (values.empty()) throw SchemaError("categorical domain needs at least one value");
    AttrDomain d;
    d.kind = DomainKind::TextCategorical;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    d.enum_values = std::move(values);
    d.i_min = d.enum_values.front();
    d.i_max = d.enum_values.back();
    return d;
}

AttrDomain AttrDomain::text_free() {
    AttrDomain d;
    d.kind = DomainKind::TextFree;
    return d;
}

long long AttrDomain::grid_size() const {
    switch (kind) {
        case DomainKind::Integer:
            return std::get<long long>(i_max) - std::get<long long>(i_min) + 1;
        case DomainKind::Decimal:
            return std::get<Decimal>(i_max).unscaled - std::get<Decimal>(i_min).unscaled + 1;
        case DomainKind::DateKind:
            return std::get<Date>(i_max).days - std::get<Date>(i_min).days + 1;
        case DomainKind::TextCategorical:
            return static_cast<long long>(enum_values.size());
        case DomainKind::TextFree:
            throw SchemaError("free text domain has no grid");
    }
    return 0;
}

long long AttrDomain::index_of(const Value& v) const {
    switch (kind) {
        case DomainKind::Integer:
            return std::get<long long>(v) - std::get<long long>(i_min);
        case DomainKind::Decimal: {
            Decimal d = std::get<Decimal>(v).rescaled(scale);
            return d.unscaled - std::get<Decimal>(i_min).unscaled;
        }
        case DomainKind::DateKind:
            return std::get<Date>(v).days - std::get<Date>(i_min).days;
        case DomainKind::TextCategorical: {
            const auto& s = std::get<std::string>(v);
            auto it = std::lower_bound(enum_values.begin(), enum_values.end(), s);
            if (it == enum_values.end() || *it != s)
                throw SchemaError("value '" + s + "' not in categorical domain");
            return it - enum_values.begin();
        }
        case DomainKind::TextFree:
            throw SchemaError("free text domain has no grid");
    }
    return 0;
}

Value AttrDomain::value_at(long long idx) const {
    if (idx < 0 || idx >= grid_size()) throw SchemaError("grid index out of domain");
    switch (kind) {
        case DomainKind::Integer:
            return std::get<long long>(i_min) + idx;
        case DomainKind::Decimal:
            return Decimal{std::get<Decimal>(i_min).unscaled + idx, scale};
        case DomainKind::DateKind:
            return Date{std::get<Date>(i_min).days + static_cast<int>(idx)};
        case DomainKind::TextCategorical:
            return enum_values[static_cast<size_t>(idx)];
        case DomainKind::TextFree:
            throw SchemaError("free text domain has no grid");
    }
    return {};
}

bool AttrDomain::contains(const Value& v) const {
    if (is_null(v)) return false;
    if (kind == DomainKind::TextFree) return std::holds_alternative<std::string>(v);
    if (kind == DomainKind::TextCategorical) {
        if (!std::holds_alternative<std::string>(v)) return false;
        return std::binary_search(enum_values.begin(), enum_values.end(), std::get<std::string>(v));
    }
    if (kind == DomainKind::DateKind && !std::holds_alternative<Date>(v)) return false;
    if ((kind == DomainKind::Integer || kind == DomainKind::Decimal) && !is_numeric(v)) return false;
    return compare(i_min, v) <= 0 && compare(v, i_max) <= 0;
}

Value AttrDomain::midpoint(const Value& lo, const Value& hi) const {
    long long a = index_of(lo), b = index_of(hi);
    if (a > b) throw SchemaError("midpoint over inverted interval");
    return value_at(a + (b - a) / 2);
}

int TableSchema::column_index(const std::string& col) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == col) return static_cast<int>(i);
    return -1;
}

const ColumnDef& TableSchema::column(const std::string& col) const {
    int i = column_index(col);
    if (i < 0) throw SchemaError("no column " + col + " in table " + name);
    return columns[static_cast<size_t>(i)];
}

const TableSchema* SchemaCatalog::find_table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

const TableSchema& SchemaCatalog::table(const std::string& name) const {
    const TableSchema* t = find_table(name);
    if (!t) throw SchemaError("no table named " + name);
    return *t;
}

void SchemaCatalog::validate() const {
    std::set<std::string> names;
    for (const auto& t : tables) {
        if (!names.insert(t.name).second) throw SchemaError("duplicate table " + t.name);
        std::set<std::string> cols;
        for (const auto& c : t.columns)
            if (!cols.insert(c.name).second)
                throw SchemaError("duplicate column " + c.name + " in " + t.name);
        for (const auto& pk : t.primary_key)
            if (t.column_index(pk) < 0) throw SchemaError("primary key column missing: " + pk);
        for (const auto& fk : t.foreign_keys) {
            const TableSchema* ref = find_table(fk.ref_table);
            if (!ref) throw SchemaError("foreign key references missing table " + fk.ref_table);
            if (fk.columns.size() != fk.ref_columns.size())
                throw SchemaError("foreign key arity mismatch in " + t.name);
            for (const auto& c : fk.columns)
                if (t.column_index(c) < 0) throw SchemaError("foreign key column missing: " + c);
            for (const auto& c : fk.ref_columns)
                if (ref->column_index(c) < 0)
                    throw SchemaError("foreign key target column missing: " + c);
        }
    }
}

namespace {

std::string type_ddl(const AttrDomain& d) {
    switch (d.kind) {
        case DomainKind::Integer: return "INTEGER";
        case DomainKind::Decimal: return "DECIMAL(15," + std::to_string(d.scale) + ")";
        case DomainKind::DateKind: return "DATE";
        case DomainKind::TextCategorical:
        case DomainKind::TextFree: return "VARCHAR(64)";
    }
    return "VARCHAR(64)";
}

}  // namespace

std::string SchemaCatalog::ddl_text() const {
    std::ostringstream out;
    for (const auto& t : tables) {
        out << "CREATE TABLE " << t.name << " (\n";
        for (size_t i = 0; i < t.columns.size(); ++i) {
            out << "  " << t.columns[i].name << " " << type_ddl(t.columns[i].domain);
            if (i + 1 < t.columns.size() || !t.primary_key.empty() || !t.foreign_keys.empty())
                out << ",";
            out << "\n";
        }
        if (!t.primary_key.empty()) {
            out << "  PRIMARY KEY (";
            for (size_t i = 0; i < t.primary_key.size(); ++i)
                out << (i ? ", " : "") << t.primary_key[i];
            out << ")" << (t.foreign_keys.empty() ? "" : ",") << "\n";
        }
        for (size_t i = 0; i < t.foreign_keys.size(); ++i) {
            const auto& fk = t.foreign_keys[i];
            out << "  FOREIGN KEY (";
            for (size_t j = 0; j < fk.columns.size(); ++j) out << (j ? ", " : "") << fk.columns[j];
            out << ") REFERENCES " << fk.ref_table << " (";
            for (size_t j = 0; j < fk.ref_columns.size(); ++j)
                out << (j ? ", " : "") << fk.ref_columns[j];
            out << ")" << (i + 1 < t.foreign_keys.size() ? "," : "") << "\n";
        }
        out << ");\n";
    }
    return out.str();
}

namespace {

// Minimal tokenizer shared by the DDL reader.
struct DdlLexer {
    std::string text;
    size_t pos = 0;

    void skip_ws() {
        while (pos < text.size()) {
            if (std::isspace(static_cast<unsigned char>(text[pos]))) { ++pos; continue; }
            if (text.compare(pos, 2, "--") == 0) {
                while (pos < text.size() && text[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
    }
    bool eof() { skip_ws(); return pos >= text.size(); }
    char peek() { skip_ws(); return pos < text.size() ? text[pos] : '\0'; }
    char take() { skip_ws(); return text[pos++]; }
    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (start == pos) throw SchemaError("expected identifier in DDL near offset " + std::to_string(pos));
        std::string s = text.substr(start, pos - start);
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return s;
    }
    long long number() {
        skip_ws();
        size_t start = pos;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        return std::stoll(text.substr(start, pos - start));
    }
    void expect(char c) {
        if (peek() != c)
            throw SchemaError(std::string("expected '") + c + "' in DDL near offset " + std::to_string(pos));
        ++pos;
    }
    bool accept_kw(const std::string& kw) {
        skip_ws();
        size_t save = pos;
        for (char c : kw) {
            if (pos >= text.size() || std::tolower(static_cast<unsigned char>(text[pos])) != std::tolower(static_cast<unsigned char>(c))) {
                pos = save;
                return false;
            }
            ++pos;
        }
        if (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            pos = save;
            return false;
        }
        return true;
    }
};

// Default domains when the sidecar gives nothing: integers span +/-2^31,
// dates 1990-01-01..2030-12-31, decimals +/-10^9 at the declared scale.
AttrDomain default_domain_for(const std::string& type_name, int /*p1*/, int p2) {
    if (type_name == "integer" || type_name == "int" || type_name == "bigint")
        return AttrDomain::integer_domain(-(1LL << 31), (1LL << 31));
    if (type_name == "decimal" || type_name == "numeric") {
        int scale = p2 >= 0 ? p2 : 2;
        long long bound = 1000000000LL;
        long long p = 1;
        for (int i = 0; i < scale; ++i) p *= 10;
        return AttrDomain::decimal_domain(scale, Decimal{-bound * p, scale}, Decimal{bound * p, scale});
    }
    if (type_name == "date")
        return AttrDomain::date_domain(Date::from_ymd(1990, 1, 1), Date::from_ymd(2030, 12, 31));
    if (type_name == "varchar" || type_name == "char" || type_name == "text")
        return AttrDomain::text_free();
    throw SchemaError("unsupported column type in DDL: " + type_name);
}

std::vector<std::string> ident_list(DdlLexer& lex) {
    std::vector<std::string> out;
    lex.expect('(');
    while (true) {
        out.push_back(lex.ident());
        if (lex.peek() == ',') { lex.take(); continue; }
        break;
    }
    lex.expect(')');
    return out;
}

}  // namespace

SchemaCatalog parse_ddl(const std::string& ddl) {
    SchemaCatalog catalog;
    DdlLexer lex{ddl};
    while (!lex.eof()) {
        if (!lex.accept_kw("create") || !lex.accept_kw("table"))
            throw SchemaError("expected CREATE TABLE near offset " + std::to_string(lex.pos));
        TableSchema t;
        t.name = lex.ident();
        lex.expect('(');
        while (true) {
            if (lex.accept_kw("primary")) {
                if (!lex.accept_kw("key")) throw SchemaError("expected KEY after PRIMARY");
                t.primary_key = ident_list(lex);
            } else if (lex.accept_kw("foreign")) {
                if (!lex.accept_kw("key")) throw SchemaError("expected KEY after FOREIGN");
                ForeignKey fk;
                fk.columns = ident_list(lex);
                if (!lex.accept_kw("references")) throw SchemaError("expected REFERENCES");
                fk.ref_table = lex.ident();
                fk.ref_columns = ident_list(lex);
                t.foreign_keys.push_back(std::move(fk));
            } else {
                ColumnDef col;
                col.name = lex.ident();
                std::string type_name = lex.ident();
                int p1 = -1, p2 = -1;
                if (lex.peek() == '(') {
                    lex.take();
                    p1 = static_cast<int>(lex.number());
                    if (lex.peek() == ',') {
                        lex.take();
                        p2 = static_cast<int>(lex.number());
                    }
                    lex.expect(')');
                }
                col.domain = default_domain_for(type_name, p1, p2);
                if (lex.accept_kw("not")) {
                    if (!lex.accept_kw("null")) throw SchemaError("expected NULL after NOT");
                    col.nullable = false;
                }
                t.columns.push_back(std::move(col));
            }
            if (lex.peek() == ',') { lex.take(); continue; }
            break;
        }
        lex.expect(')');
        if (lex.peek() == ';') lex.take();
        catalog.tables.push_back(std::move(t));
    }
    catalog.validate();
    return catalog;
}

void apply_domain_sidecar(SchemaCatalog& catalog, const std::string& json_text) {
    auto j = nlohmann::json::parse(json_text);
    for (auto& [key, spec] : j.items()) {
        auto dot = key.find('.');
        if (dot == std::string::npos) throw SchemaError("sidecar key must be table.column: " + key);
        std::string tname = key.substr(0, dot), cname = key.substr(dot + 1);
        TableSchema* table = nullptr;
        for (auto& t : catalog.tables)
            if (t.name == tname) table = &t;
        if (!table) throw SchemaError("sidecar references missing table " + tname);
        int ci = table->column_index(cname);
        if (ci < 0) throw SchemaError("sidecar references missing column " + key);
        AttrDomain& dom = table->columns[static_cast<size_t>(ci)].domain;
        if (spec.contains("enum")) {
            std::vector<std::string> vals = spec["enum"].get<std::vector<std::string>>();
            dom = AttrDomain::categorical(std::move(vals));
            continue;
        }
        auto parse_bound = [&](const nlohmann::json& b) -> Value {
            switch (dom.kind) {
                case DomainKind::Integer: return b.get<long long>();
                case DomainKind::Decimal: {
                    // bounds given as strings to stay exact, e.g. "-999999.99"
                    std::string s = b.is_string() ? b.get<std::string>() : b.dump();
                    auto dotpos = s.find('.');
                    int sc = dotpos == std::string::npos ? 0 : static_cast<int>(s.size() - dotpos - 1);
                    std::string digits = s;
                    if (dotpos != std::string::npos) digits.erase(dotpos, 1);
                    return Decimal{std::stoll(digits), sc}.rescaled(dom.scale);
                }
                case DomainKind::DateKind: {
                    auto d = Date::parse(b.get<std::string>());
                    if (!d) throw SchemaError("bad date bound in sidecar: " + b.dump());
                    return *d;
                }
                default:
                    throw SchemaError("min/max sidecar bounds need an ordered column: " + b.dump());
            }
        };
        if (spec.contains("min")) dom.i_min = parse_bound(spec["min"]);
        if (spec.contains("max")) dom.i_max = parse_bound(spec["max"]);
        if (compare(dom.i_min, dom.i_max) > 0) throw SchemaError("sidecar min > max for " + key);
    }
}

}  // namespace hqe
