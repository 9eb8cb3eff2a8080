#include "hqe/ast.hpp"

#include <algorithm>

namespace hqe {

const char* agg_name(AggFunc f) {
    switch (f) {
        case AggFunc::Sum: return "SUM";
        case AggFunc::Count: return "COUNT";
        case AggFunc::Min: return "MIN";
        case AggFunc::Max: return "MAX";
        case AggFunc::Avg: return "AVG";
    }
    return "?";
}

const char* cmp_text(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Le: return "<=";
        case CmpOp::Ge: return ">=";
        case CmpOp::Lt: return "<";
        case CmpOp::Gt: return ">";
    }
    return "?";
}

CmpOp flip_cmp(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return CmpOp::Eq;
        case CmpOp::Le: return CmpOp::Ge;
        case CmpOp::Ge: return CmpOp::Le;
        case CmpOp::Lt: return CmpOp::Gt;
        case CmpOp::Gt: return CmpOp::Lt;
    }
    return op;
}

Expr Expr::make_column(ColumnRef c) {
    Expr e;
    e.kind = Column;
    e.column = std::move(c);
    return e;
}

Expr Expr::make_column(const std::string& qualifier, const std::string& column) {
    return make_column(ColumnRef{qualifier, column});
}

Expr Expr::make_literal(Value v) {
    Expr e;
    e.kind = Literal;
    e.literal = std::move(v);
    return e;
}

Expr Expr::make_agg(AggFunc f, std::optional<Expr> arg) {
    Expr e;
    e.kind = Aggregate;
    e.agg = f;
    if (arg) e.children.push_back(std::move(*arg));
    return e;
}

Expr Expr::make_arith(char op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Arith;
    e.op = op;
    e.children.push_back(std::move(lhs));
    e.children.push_back(std::move(rhs));
    return e;
}

Expr Expr::make_subquery(Query q) {
    Expr e;
    e.kind = ScalarSubquery;
    e.subquery = std::make_shared<Query>(std::move(q));
    return e;
}

Pred Pred::make_and(std::vector<Pred> ps) {
    Pred p;
    p.kind = And;
    p.children = std::move(ps);
    return p;
}

Pred Pred::make_or(std::vector<Pred> ps) {
    Pred p;
    p.kind = Or;
    p.children = std::move(ps);
    return p;
}

Pred Pred::make_cmp(Expr lhs, CmpOp op, Expr rhs) {
    Pred p;
    p.kind = Cmp;
    p.lhs = std::move(lhs);
    p.rhs = std::move(rhs);
    p.op = op;
    return p;
}

Pred Pred::make_like(ColumnRef c, std::string pattern) {
    Pred p;
    p.kind = Like;
    p.col = std::move(c);
    p.pattern = std::move(pattern);
    return p;
}

Pred Pred::make_in_list(ColumnRef c, std::vector<Value> vals) {
    Pred p;
    p.kind = InList;
    p.col = std::move(c);
    p.in_values = std::move(vals);
    return p;
}

Pred Pred::make_in_subquery(ColumnRef c, Query q) {
    Pred p;
    p.kind = InSubquery;
    p.col = std::move(c);
    p.subquery = std::make_shared<Query>(std::move(q));
    return p;
}

Pred Pred::make_is_null(ColumnRef c) {
    Pred p;
    p.kind = IsNull;
    p.col = std::move(c);
    return p;
}

Expr deep_copy(const Expr& e) {
    Expr out = e;
    out.children.clear();
    for (const auto& c : e.children) out.children.push_back(deep_copy(c));
    if (e.subquery) out.subquery = std::make_shared<Query>(deep_copy(*e.subquery));
    return out;
}

Pred deep_copy(const Pred& p) {
    Pred out = p;
    out.children.clear();
    for (const auto& c : p.children) out.children.push_back(deep_copy(c));
    out.lhs = deep_copy(p.lhs);
    out.rhs = deep_copy(p.rhs);
    if (p.subquery) out.subquery = std::make_shared<Query>(deep_copy(*p.subquery));
    return out;
}

QueryBlock deep_copy(const QueryBlock& b) {
    QueryBlock out = b;
    out.select.clear();
    for (const auto& s : b.select) out.select.push_back(SelectItem{deep_copy(s.expr), s.alias});
    out.from.clear();
    for (const auto& f : b.from) {
        FromItem fi = f;
        if (f.derived) fi.derived = std::make_shared<Query>(deep_copy(*f.derived));
        if (f.join_cond) fi.join_cond = deep_copy(*f.join_cond);
        out.from.push_back(std::move(fi));
    }
    if (b.where) out.where = deep_copy(*b.where);
    return out;
}

Query deep_copy(const Query& q) {
    Query out;
    for (const auto& b : q.branches) out.branches.push_back(deep_copy(b));
    return out;
}

std::vector<Pred> conjuncts_of(const Pred& p) {
    if (p.kind != Pred::And) return {p};
    std::vector<Pred> out;
    for (const auto& c : p.children) {
        auto sub = conjuncts_of(c);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

namespace {

void collect_expr_tables(const Expr& e, std::map<std::string, int>& out);
void collect_pred_tables(const Pred& p, std::map<std::string, int>& out);

void collect_query_tables(const Query& q, std::map<std::string, int>& out) {
    for (const auto& b : q.branches) {
        for (const auto& f : b.from) {
            if (f.derived) collect_query_tables(*f.derived, out);
            else out[f.table] += 1;
            if (f.join_cond) collect_pred_tables(*f.join_cond, out);
        }
        for (const auto& s : b.select) collect_expr_tables(s.expr, out);
        if (b.where) collect_pred_tables(*b.where, out);
    }
}

void collect_expr_tables(const Expr& e, std::map<std::string, int>& out) {
    for (const auto& c : e.children) collect_expr_tables(c, out);
    if (e.subquery) collect_query_tables(*e.subquery, out);
}

void collect_pred_tables(const Pred& p, std::map<std::string, int>& out) {
    for (const auto& c : p.children) collect_pred_tables(c, out);
    if (p.kind == Pred::Cmp) {
        collect_expr_tables(p.lhs, out);
        collect_expr_tables(p.rhs, out);
    }
    if (p.subquery) collect_query_tables(*p.subquery, out);
}

int pred_depth(const Pred& p);
int expr_depth(const Expr& e);

int block_depth(const QueryBlock& b) {
    int d = 0;
    if (b.where) d = std::max(d, pred_depth(*b.where));
    for (const auto& s : b.select) d = std::max(d, expr_depth(s.expr));
    return d;
}

int query_pred_depth(const Query& q) {
    int d = 0;
    for (const auto& b : q.branches) d = std::max(d, block_depth(b));
    return d;
}

int expr_depth(const Expr& e) {
    int d = 0;
    for (const auto& c : e.children) d = std::max(d, expr_depth(c));
    if (e.subquery) d = std::max(d, 1 + query_pred_depth(*e.subquery));
    return d;
}

int pred_depth(const Pred& p) {
    int d = 0;
    for (const auto& c : p.children) d = std::max(d, pred_depth(c));
    if (p.kind == Pred::Cmp) d = std::max({d, expr_depth(p.lhs), expr_depth(p.rhs)});
    if (p.subquery) d = std::max(d, 1 + query_pred_depth(*p.subquery));
    return d;
}

}  // namespace

std::map<std::string, int> table_multiset(const Query& q) {
    std::map<std::string, int> out;
    collect_query_tables(q, out);
    return out;
}

std::map<std::string, int> block_table_multiset(const QueryBlock& b) {
    std::map<std::string, int> out;
    for (const auto& f : b.from) {
        if (f.derived) collect_query_tables(*f.derived, out);
        else out[f.table] += 1;
    }
    if (b.where) collect_pred_tables(*b.where, out);
    for (const auto& s : b.select) collect_expr_tables(s.expr, out);
    return out;
}

int nesting_depth(const Query& q) { return query_pred_depth(q); }

bool query_has_order_by(const Query& q) {
    for (const auto& b : q.branches)
        if (!b.order_by.empty()) return true;
    return false;
}

}  // namespace hqe
