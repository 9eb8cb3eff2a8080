#include "hqe/printer.hpp"

#include <algorithm>

#include "hqe/util.hpp"

namespace hqe {

namespace {

std::string render_block(const QueryBlock& b);

std::string render_query_text(const Query& q) {
    if (q.branches.size() == 1) return render_block(q.branches.front());
    std::string out;
    for (size_t i = 0; i < q.branches.size(); ++i) {
        if (i) out += " UNION ALL ";
        out += "(" + render_block(q.branches[i]) + ")";
    }
    return out;
}

std::string render_expr_prec(const Expr& e, bool parenthesize_arith) {
    switch (e.kind) {
        case Expr::Column:
            return e.column.text();
        case Expr::Literal:
            return sql_literal(e.literal);
        case Expr::Star:
            return "*";
        case Expr::Arith: {
            std::string s = render_expr_prec(e.children[0], true) + " " + e.op + " " +
                            render_expr_prec(e.children[1], true);
            return parenthesize_arith ? "(" + s + ")" : s;
        }
        case Expr::Aggregate: {
            std::string arg = e.children.empty() ? "*" : render_expr_prec(e.children[0], false);
            return std::string(agg_name(e.agg)) + "(" + arg + ")";
        }
        case Expr::ScalarSubquery:
            return "(" + render_query_text(*e.subquery) + ")";
    }
    return "?";
}

std::string render_pred_text(const Pred& p, bool parenthesize) {
    switch (p.kind) {
        case Pred::And: {
            std::string s;
            for (size_t i = 0; i < p.children.size(); ++i) {
                if (i) s += " AND ";
                s += render_pred_text(p.children[i], true);
            }
            return parenthesize && p.children.size() > 1 ? "(" + s + ")" : s;
        }
        case Pred::Or: {
            std::string s;
            for (size_t i = 0; i < p.children.size(); ++i) {
                if (i) s += " OR ";
                s += render_pred_text(p.children[i], true);
            }
            return parenthesize && p.children.size() > 1 ? "(" + s + ")" : s;
        }
        case Pred::Cmp:
            return render_expr_prec(p.lhs, false) + " " + cmp_text(p.op) + " " +
                   render_expr_prec(p.rhs, false);
        case Pred::Like:
            return p.col.text() + " LIKE '" + p.pattern + "'";
        case Pred::InList: {
            std::string s = p.col.text() + " IN (";
            for (size_t i = 0; i < p.in_values.size(); ++i) {
                if (i) s += ", ";
                s += sql_literal(p.in_values[i]);
            }
            return s + ")";
        }
        case Pred::InSubquery:
            return p.col.text() + " IN (" + render_query_text(*p.subquery) + ")";
        case Pred::IsNull:
            return p.col.text() + " IS NULL";
    }
    return "?";
}

std::string render_block(const QueryBlock& b) {
    std::string out = "SELECT ";
    if (b.select.empty()) {
        out += "*";
    } else {
        for (size_t i = 0; i < b.select.size(); ++i) {
            if (i) out += ", ";
            out += render_expr_prec(b.select[i].expr, false);
            if (!b.select[i].alias.empty()) out += " AS " + b.select[i].alias;
        }
    }
    out += " FROM ";
    for (size_t i = 0; i < b.from.size(); ++i) {
        const FromItem& f = b.from[i];
        if (i) {
            if (f.join == JoinKind::Cross) out += ", ";
            else if (f.join == JoinKind::Inner) out += " JOIN ";
            else out += " LEFT JOIN ";
        }
        if (f.derived) out += "(" + render_query_text(*f.derived) + ")";
        else out += f.table;
        if (!f.alias.empty()) out += " AS " + f.alias;
        if (i && f.join != JoinKind::Cross && f.join_cond)
            out += " ON " + render_pred_text(*f.join_cond, false);
    }
    if (b.where) out += " WHERE " + render_pred_text(*b.where, false);
    if (!b.group_by.empty()) {
        out += " GROUP BY ";
        for (size_t i = 0; i < b.group_by.size(); ++i) {
            if (i) out += ", ";
            out += b.group_by[i].text();
        }
    }
    if (!b.order_by.empty()) {
        out += " ORDER BY ";
        for (size_t i = 0; i < b.order_by.size(); ++i) {
            if (i) out += ", ";
            out += b.order_by[i].col.text() + (b.order_by[i].asc ? " ASC" : " DESC");
        }
    }
    if (b.limit) out += " LIMIT " + std::to_string(*b.limit);
    return out;
}

// ---------------------------------------------------------------------------
// Canonicalization
// ---------------------------------------------------------------------------

// Binding scope used to renumber aliases and qualify bare columns.
struct Scope {
    struct Binding {
        std::string old_name;               // original binding (alias or table)
        std::string new_name;
        std::vector<std::string> columns;   // resolvable output columns
    };
    std::vector<Binding> bindings;
    const Scope* parent = nullptr;

    const Binding* lookup_binding(const std::string& name) const {
        for (const auto& b : bindings)
            if (b.old_name == name) return &b;
        return parent ? parent->lookup_binding(name) : nullptr;
    }
    const Binding* lookup_column(const std::string& col) const {
        const Binding* found = nullptr;
        for (const auto& b : bindings)
            for (const auto& c : b.columns)
                if (c == col) {
                    if (found) return nullptr;  // ambiguous: leave untouched
                    found = &b;
                }
        if (found) return found;
        return parent ? parent->lookup_column(col) : nullptr;
    }
};

struct Canon {
    const SchemaCatalog* catalog;

    std::vector<std::string> output_columns(const Query& q, const Scope* outer) {
        const QueryBlock& b = q.branches.front();
        std::vector<std::string> cols;
        if (b.select.empty()) {
            // SELECT *: concatenate underlying outputs
            for (const auto& f : b.from) {
                if (f.derived) {
                    auto sub = output_columns(*f.derived, outer);
                    cols.insert(cols.end(), sub.begin(), sub.end());
                } else if (catalog) {
                    if (const TableSchema* t = catalog->find_table(f.table))
                        for (const auto& c : t->columns) cols.push_back(c.name);
                }
            }
            return cols;
        }
        for (size_t i = 0; i < b.select.size(); ++i) {
            const auto& s = b.select[i];
            if (!s.alias.empty()) cols.push_back(s.alias);
            else if (s.expr.kind == Expr::Column) cols.push_back(s.expr.column.column);
            else cols.push_back("c" + std::to_string(i));
        }
        return cols;
    }

    ColumnRef fix_ref(const ColumnRef& ref, const Scope& scope) {
        if (!ref.qualifier.empty()) {
            if (const Scope::Binding* b = scope.lookup_binding(ref.qualifier))
                return ColumnRef{b->new_name, ref.column};
            return ref;
        }
        if (const Scope::Binding* b = scope.lookup_column(ref.column))
            return ColumnRef{b->new_name, ref.column};
        return ref;
    }

    Expr fix_expr(const Expr& e, const Scope& scope, int depth) {
        Expr out = e;
        if (e.kind == Expr::Column) out.column = fix_ref(e.column, scope);
        out.children.clear();
        for (const auto& c : e.children) out.children.push_back(fix_expr(c, scope, depth));
        if (e.subquery)
            out.subquery = std::make_shared<Query>(canon_query(*e.subquery, &scope, depth + 1));
        return out;
    }

    Pred fix_pred(const Pred& p, const Scope& scope, int depth) {
        Pred out = p;
        out.children.clear();
        for (const auto& c : p.children) out.children.push_back(fix_pred(c, scope, depth));
        out.lhs = fix_expr(p.lhs, scope, depth);
        out.rhs = fix_expr(p.rhs, scope, depth);
        out.col = fix_ref(p.col, scope);
        if (p.subquery)
            out.subquery = std::make_shared<Query>(canon_query(*p.subquery, &scope, depth + 1));
        return out;
    }

    // Normalize one comparison atom: literals to the right, column pairs
    // oriented so the textually smaller side is on the left of =, and
    // >=/> flipped into <=/<.
    Pred orient(Pred p) {
        if (p.kind == Pred::InList) {
            std::sort(p.in_values.begin(), p.in_values.end(), [](const Value& a, const Value& b) {
                return sql_literal(a) < sql_literal(b);
            });
            return p;
        }
        if (p.kind != Pred::Cmp) return p;
        bool lhs_col = p.lhs.kind == Expr::Column;
        bool rhs_col = p.rhs.kind == Expr::Column;
        if (!lhs_col && rhs_col) {
            std::swap(p.lhs, p.rhs);
            p.op = flip_cmp(p.op);
        }
        if (lhs_col && rhs_col) {
            if (p.op == CmpOp::Ge || p.op == CmpOp::Gt) {
                std::swap(p.lhs, p.rhs);
                p.op = flip_cmp(p.op);
            }
            if (p.op == CmpOp::Eq && p.rhs.column.text() < p.lhs.column.text())
                std::swap(p.lhs, p.rhs);
        }
        return p;
    }

    Pred canon_pred_tree(const Pred& p) {
        if (p.kind == Pred::And || p.kind == Pred::Or) {
            std::vector<Pred> kids;
            for (const auto& c : p.children) {
                Pred k = canon_pred_tree(c);
                // flatten same-kind nesting
                if (k.kind == p.kind) {
                    for (auto& g : k.children) kids.push_back(std::move(g));
                } else {
                    kids.push_back(std::move(k));
                }
            }
            std::sort(kids.begin(), kids.end(), [](const Pred& a, const Pred& b) {
                return render_pred_text(a, true) < render_pred_text(b, true);
            });
            if (kids.size() == 1) return kids.front();
            Pred out;
            out.kind = p.kind;
            out.children = std::move(kids);
            return out;
        }
        return orient(p);
    }

    QueryBlock canon_block(const QueryBlock& input, const Scope* outer, int depth) {
        QueryBlock b = deep_copy(input);

        // Fold inner-join ON conditions into WHERE; Cross attachment after.
        std::vector<Pred> extra;
        for (size_t i = 0; i < b.from.size(); ++i) {
            if (b.from[i].join == JoinKind::Inner) {
                if (b.from[i].join_cond) extra.push_back(*b.from[i].join_cond);
                b.from[i].join = JoinKind::Cross;
                b.from[i].join_cond.reset();
            }
        }
        if (!extra.empty()) {
            if (b.where) extra.push_back(*b.where);
            b.where = extra.size() == 1 ? extra.front() : Pred::make_and(extra);
        }

        // Sort pure cross-joined items; keep order when outer joins pin it.
        bool has_loj = false;
        for (const auto& f : b.from)
            if (f.join == JoinKind::LeftOuter) has_loj = true;
        if (!has_loj) {
            std::stable_sort(b.from.begin(), b.from.end(), [](const FromItem& x, const FromItem& y) {
                std::string kx = x.derived ? "~derived" : x.table;
                std::string ky = y.derived ? "~derived" : y.table;
                return kx < ky;
            });
        }

        // Renumber aliases positionally; depth picks the letter so nested
        // scopes never shadow outer ones.
        static const char* prefixes[] = {"t", "u", "v", "w"};
        const char* prefix = prefixes[std::min(depth, 3)];
        Scope scope;
        scope.parent = outer;
        for (size_t i = 0; i < b.from.size(); ++i) {
            FromItem& f = b.from[i];
            Scope::Binding bind;
            bind.old_name = f.binding();
            bind.new_name = prefix + std::to_string(i);
            if (f.derived) {
                *f.derived = canon_query(*f.derived, outer, depth + 1);
                bind.columns = output_columns(*f.derived, outer);
            } else if (catalog) {
                if (const TableSchema* t = catalog->find_table(f.table))
                    for (const auto& c : t->columns) bind.columns.push_back(c.name);
            }
            f.alias = bind.new_name;
            scope.bindings.push_back(std::move(bind));
        }

        // Expand * when output columns are known.
        if (b.select.empty()) {
            std::vector<std::string> cols;
            for (const auto& bind : scope.bindings)
                for (const auto& c : bind.columns) cols.push_back(c);
            for (const auto& c : cols) {
                SelectItem item;
                item.expr = Expr::make_column("", c);
                item.alias = c;
                b.select.push_back(std::move(item));
            }
        }

        for (auto& s : b.select) {
            s.expr = fix_expr(s.expr, scope, depth);
            if (s.alias.empty() && s.expr.kind == Expr::Column) s.alias = s.expr.column.column;
        }
        for (size_t i = 0; i < b.from.size(); ++i)
            if (b.from[i].join_cond) {
                Pred p = fix_pred(*b.from[i].join_cond, scope, depth);
                b.from[i].join_cond = canon_pred_tree(p);
            }
        if (b.where) {
            Pred p = fix_pred(*b.where, scope, depth);
            b.where = canon_pred_tree(p);
        }
        for (auto& g : b.group_by) g = fix_ref(g, scope);
        std::sort(b.group_by.begin(), b.group_by.end(),
                  [](const ColumnRef& a, const ColumnRef& b2) { return a.text() < b2.text(); });
        for (auto& o : b.order_by) o.col = fix_ref(o.col, scope);
        return b;
    }

    Query canon_query(const Query& q, const Scope* outer, int depth) {
        Query out;
        for (const auto& b : q.branches) out.branches.push_back(canon_block(b, outer, depth));
        std::sort(out.branches.begin(), out.branches.end(),
                  [](const QueryBlock& a, const QueryBlock& b2) {
                      return render_block(a) < render_block(b2);
                  });
        return out;
    }
};

}  // namespace

std::string render_sql(const Query& q) { return render_query_text(q); }
std::string render_expr(const Expr& e) { return render_expr_prec(e, false); }
std::string render_pred(const Pred& p) { return render_pred_text(p, false); }

Query canonicalize(const Query& q, const SchemaCatalog* catalog) {
    Canon c{catalog};
    return c.canon_query(q, nullptr, 0);
}

std::string canonical_sql(const Query& q, const SchemaCatalog* catalog) {
    return render_sql(canonicalize(q, catalog));
}

std::string canonical_digest(const Query& q, const SchemaCatalog* catalog) {
    return sha256_hex(canonical_sql(q, catalog));
}

bool structurally_equal(const Query& a, const Query& b, const SchemaCatalog* catalog) {
    return canonical_sql(a, catalog) == canonical_sql(b, catalog);
}

}  // namespace hqe
