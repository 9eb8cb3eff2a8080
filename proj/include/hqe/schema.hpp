#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hqe/value.hpp"

namespace hqe {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DomainKind { Integer, Decimal, DateKind, TextCategorical, TextFree };

// Mutation-facing description of a column's value space.  i_min/i_max
// bound the ordered kinds; step is the smallest representable increment
// (1 for integers and dates, 10^-scale for decimals).  Categorical text
// is ordered by enum index so the same interval machinery applies.
struct AttrDomain {
    DomainKind kind = DomainKind::Integer;
    int scale = 0;                          // decimals only
    Value i_min;
    Value i_max;
    std::vector<std::string> enum_values;   // TextCategorical only, sorted

    static AttrDomain integer_domain(long long lo, long long hi);
    static AttrDomain decimal_domain(int scale, Decimal lo, Decimal hi);
    static AttrDomain date_domain(Date lo, Date hi);
    static AttrDomain categorical(std::vector<std::string> values);
    static AttrDomain text_free();

    bool ordered() const { return kind != DomainKind::TextFree; }
    // Grid coordinates: ordered domains map onto 0..grid_size()-1.
    long long grid_size() const;
    long long index_of(const Value& v) const;
    Value value_at(long long idx) const;
    bool contains(const Value& v) const;
    // Midpoint on the step grid; v == lo iff hi - lo < step.
    Value midpoint(const Value& lo, const Value& hi) const;
};

struct ColumnDef {
    std::string name;
    AttrDomain domain;
    bool nullable = true;
};

struct ForeignKey {
    std::vector<std::string> columns;
    std::string ref_table;
    std::vector<std::string> ref_columns;
};

struct TableSchema {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::string> primary_key;
    std::vector<ForeignKey> foreign_keys;

    int column_index(const std::string& col) const;  // -1 when absent
    const ColumnDef& column(const std::string& col) const;
};

struct SchemaCatalog {
    std::vector<TableSchema> tables;

    const TableSchema* find_table(const std::string& name) const;
    const TableSchema& table(const std::string& name) const;
    void validate() const;  // unique names, FK edges resolve
    std::string ddl_text() const;
};

// CREATE TABLE subset: column types INTEGER, DECIMAL(p,s), DATE,
// VARCHAR(n)/CHAR(n)/TEXT, with PRIMARY KEY and FOREIGN KEY clauses.
SchemaCatalog parse_ddl(const std::string& ddl);

// Optional sidecar narrowing domains: JSON object keyed "table.column"
// with {"min":..,"max":..} or {"enum":[..]}.
void apply_domain_sidecar(SchemaCatalog& catalog, const std::string& json_text);

}  // namespace hqe
