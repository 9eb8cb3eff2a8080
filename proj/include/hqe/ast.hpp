#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hqe/value.hpp"

namespace hqe {

struct Query;

struct ColumnRef {
    std::string qualifier;  // table name or alias; empty when bare
    std::string column;

    std::string text() const { return qualifier.empty() ? column : qualifier + "." + column; }
    bool operator==(const ColumnRef&) const = default;
};

enum class AggFunc { Sum, Count, Min, Max, Avg };
enum class CmpOp { Eq, Le, Ge, Lt, Gt };

const char* agg_name(AggFunc f);
const char* cmp_text(CmpOp op);
CmpOp flip_cmp(CmpOp op);  // orientation under operand swap

// Scalar expression: column, literal, binary arithmetic, aggregate call,
// scalar subquery, or * (only under COUNT and SELECT).
struct Expr {
    enum Kind { Column, Literal, Arith, Aggregate, ScalarSubquery, Star } kind = Column;
    ColumnRef column;
    Value literal;
    char op = 0;                       // Arith: one of + - * /
    std::vector<Expr> children;        // Arith: exactly 2; Aggregate: 0 or 1
    AggFunc agg = AggFunc::Sum;
    std::shared_ptr<Query> subquery;

    static Expr make_column(ColumnRef c);
    static Expr make_column(const std::string& qualifier, const std::string& column);
    static Expr make_literal(Value v);
    static Expr make_agg(AggFunc f, std::optional<Expr> arg);
    static Expr make_arith(char op, Expr lhs, Expr rhs);
    static Expr make_subquery(Query q);
};

struct Pred {
    enum Kind { And, Or, Cmp, Like, InList, InSubquery, IsNull } kind = And;
    std::vector<Pred> children;        // And/Or
    Expr lhs, rhs;                     // Cmp
    CmpOp op = CmpOp::Eq;
    ColumnRef col;                     // Like/InList/InSubquery/IsNull
    std::string pattern;               // Like (%-wildcards only)
    std::vector<Value> in_values;      // InList
    std::shared_ptr<Query> subquery;   // InSubquery

    static Pred make_and(std::vector<Pred> ps);
    static Pred make_or(std::vector<Pred> ps);
    static Pred make_cmp(Expr lhs, CmpOp op, Expr rhs);
    static Pred make_like(ColumnRef c, std::string pattern);
    static Pred make_in_list(ColumnRef c, std::vector<Value> vals);
    static Pred make_in_subquery(ColumnRef c, Query q);
    static Pred make_is_null(ColumnRef c);
};

enum class JoinKind { Cross, Inner, LeftOuter };

struct FromItem {
    std::string table;                // empty for derived tables
    std::shared_ptr<Query> derived;
    std::string alias;                // binding name; empty -> table name
    JoinKind join = JoinKind::Cross;  // attachment to the previous item
    std::optional<Pred> join_cond;

    std::string binding() const { return alias.empty() ? table : alias; }
};

struct SelectItem {
    Expr expr;
    std::string alias;  // output column name when present
};

struct OrderItem {
    ColumnRef col;
    bool asc = true;
};

// One SELECT block.  An empty select list means SELECT *.
struct QueryBlock {
    std::vector<SelectItem> select;
    std::vector<FromItem> from;
    std::optional<Pred> where;
    std::vector<ColumnRef> group_by;
    std::vector<OrderItem> order_by;
    std::optional<long long> limit;
};

// UNION ALL of blocks; a single branch is a plain query.
struct Query {
    std::vector<QueryBlock> branches;
};

// Deep copies: the IR shares subqueries through shared_ptr, so anything
// that rewrites a tree must clone first.
Query deep_copy(const Query& q);
QueryBlock deep_copy(const QueryBlock& b);
Expr deep_copy(const Expr& e);
Pred deep_copy(const Pred& p);

// Flatten an AND tree into conjuncts (non-AND predicates yield themselves).
std::vector<Pred> conjuncts_of(const Pred& p);

// Table name -> number of occurrences, including derived/nested blocks.
std::map<std::string, int> table_multiset(const Query& q);
// Tables appearing in this block and its where-clause subqueries (not
// derived-table branches).
std::map<std::string, int> block_table_multiset(const QueryBlock& b);

// Maximum predicate-subquery nesting depth (IN / scalar chains).
int nesting_depth(const Query& q);

bool query_has_order_by(const Query& q);

}  // namespace hqe
