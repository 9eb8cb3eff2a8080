#include "hqe/executor.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "hqe/util.hpp"

namespace hqe {

namespace {

enum class Tri { True, False, Unknown };

Tri tri_not_null(bool b) { return b ? Tri::True : Tri::False; }

Tri tri_and(Tri a, Tri b) {
    if (a == Tri::False || b == Tri::False) return Tri::False;
    if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
    return Tri::True;
}

Tri tri_or(Tri a, Tri b) {
    if (a == Tri::True || b == Tri::True) return Tri::True;
    if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
    return Tri::False;
}

bool like_match(const std::string& text, const std::string& pattern) {
    // %-only wildcards: split into segments, match greedily in order.
    std::vector<std::string> segs;
    std::string cur;
    for (char c : pattern) {
        if (c == '%') {
            segs.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    segs.push_back(cur);
    bool anchored_start = !pattern.empty() && pattern.front() != '%';
    bool anchored_end = !pattern.empty() && pattern.back() != '%';
    size_t pos = 0;
    for (size_t i = 0; i < segs.size(); ++i) {
        const std::string& seg = segs[i];
        if (seg.empty()) continue;
        size_t found;
        if (i == 0 && anchored_start) {
            if (text.compare(0, seg.size(), seg) != 0) return false;
            found = 0;
        } else {
            found = text.find(seg, pos);
            if (found == std::string::npos) return false;
        }
        pos = found + seg.size();
    }
    if (anchored_end) {
        const std::string& last = segs.back();
        if (text.size() < last.size()) return false;
        if (text.compare(text.size() - last.size(), last.size(), last) != 0) return false;
    }
    return true;
}

struct ColInfo {
    std::string binding;  // from-item binding name
    std::string name;     // column name
};

struct Frame {
    const std::vector<ColInfo>* cols = nullptr;
    const Row* row = nullptr;
    const Frame* parent = nullptr;
};

struct Evaluator {
    const DatabaseState& db;

    // --- column resolution ---
    static int find_col(const std::vector<ColInfo>& cols, const ColumnRef& ref) {
        int found = -1;
        for (size_t i = 0; i < cols.size(); ++i) {
            if (!ref.qualifier.empty() && cols[i].binding != ref.qualifier) continue;
            if (cols[i].name != ref.column) continue;
            if (found >= 0) throw EngineFault("ambiguous column reference " + ref.text());
            found = static_cast<int>(i);
        }
        return found;
    }

    static Value lookup(const Frame& frame, const ColumnRef& ref) {
        for (const Frame* f = &frame; f; f = f->parent) {
            int idx = find_col(*f->cols, ref);
            if (idx >= 0) return (*f->row)[static_cast<size_t>(idx)];
        }
        throw EngineFault("cannot resolve column " + ref.text());
    }

    // --- scalar expressions (no aggregates at this level) ---
    Value eval_expr(const Expr& e, const Frame& frame) {
        switch (e.kind) {
            case Expr::Column:
                return lookup(frame, e.column);
            case Expr::Literal:
                return e.literal;
            case Expr::Arith: {
                Value a = eval_expr(e.children[0], frame);
                Value b = eval_expr(e.children[1], frame);
                switch (e.op) {
                    case '+': return add(a, b);
                    case '-': return sub(a, b);
                    case '*': return mul(a, b);
                    case '/': return divide(a, b);
                }
                throw EngineFault("bad arithmetic operator");
            }
            case Expr::ScalarSubquery: {
                ResultSet r = exec_query(*e.subquery, &frame);
                if (r.headers.size() != 1)
                    throw EngineFault("scalar subquery must produce one column");
                if (r.rows.empty()) return std::monostate{};
                if (r.rows.size() > 1) throw EngineFault("scalar subquery produced multiple rows");
                return r.rows[0][0];
            }
            case Expr::Aggregate:
                throw EngineFault("aggregate used outside grouping context");
            case Expr::Star:
                throw EngineFault("* used outside COUNT/select list");
        }
        return {};
    }

    Tri eval_cmp(const Value& a, CmpOp op, const Value& b) {
        auto c = compare(a, b);
        if (!c) return Tri::Unknown;
        switch (op) {
            case CmpOp::Eq: return tri_not_null(*c == 0);
            case CmpOp::Le: return tri_not_null(*c <= 0);
            case CmpOp::Ge: return tri_not_null(*c >= 0);
            case CmpOp::Lt: return tri_not_null(*c < 0);
            case CmpOp::Gt: return tri_not_null(*c > 0);
        }
        return Tri::Unknown;
    }

    Tri eval_pred(const Pred& p, const Frame& frame) {
        switch (p.kind) {
            case Pred::And: {
                Tri acc = Tri::True;
                for (const auto& c : p.children) {
                    acc = tri_and(acc, eval_pred(c, frame));
                    if (acc == Tri::False) return acc;
                }
                return acc;
            }
            case Pred::Or: {
                Tri acc = Tri::False;
                for (const auto& c : p.children) {
                    acc = tri_or(acc, eval_pred(c, frame));
                    if (acc == Tri::True) return acc;
                }
                return acc;
            }
            case Pred::Cmp:
                return eval_cmp(eval_expr(p.lhs, frame), p.op, eval_expr(p.rhs, frame));
            case Pred::Like: {
                Value v = lookup(frame, p.col);
                if (is_null(v)) return Tri::Unknown;
                if (!std::holds_alternative<std::string>(v))
                    throw EngineFault("LIKE applies to text columns");
                return tri_not_null(like_match(std::get<std::string>(v), p.pattern));
            }
            case Pred::InList: {
                Value v = lookup(frame, p.col);
                if (is_null(v)) return Tri::Unknown;
                bool saw_null = false;
                for (const auto& lit : p.in_values) {
                    if (is_null(lit)) { saw_null = true; continue; }
                    if (compare(v, lit) == 0) return Tri::True;
                }
                return saw_null ? Tri::Unknown : Tri::False;
            }
            case Pred::InSubquery: {
                Value v = lookup(frame, p.col);
                ResultSet r = exec_query(*p.subquery, &frame);
                if (r.headers.size() != 1)
                    throw EngineFault("IN subquery must produce one column");
                if (is_null(v)) return r.rows.empty() ? Tri::False : Tri::Unknown;
                bool saw_null = false;
                for (const auto& row : r.rows) {
                    if (is_null(row[0])) { saw_null = true; continue; }
                    if (compare(v, row[0]) == 0) return Tri::True;
                }
                return saw_null ? Tri::Unknown : Tri::False;
            }
            case Pred::IsNull:
                return tri_not_null(is_null(lookup(frame, p.col)));
        }
        return Tri::Unknown;
    }

    // --- aggregates ---
    bool expr_has_aggregate(const Expr& e) {
        if (e.kind == Expr::Aggregate) return true;
        for (const auto& c : e.children)
            if (expr_has_aggregate(c)) return true;
        return false;
    }

    Value eval_agg_expr(const Expr& e, const std::vector<ColInfo>& cols,
                        const std::vector<const Row*>& group, const Frame* parent,
                        const std::vector<int>& group_key_indexes) {
        switch (e.kind) {
            case Expr::Aggregate: {
                if (e.children.empty()) {
                    // COUNT(*)
                    return static_cast<long long>(group.size());
                }
                std::vector<Value> vals;
                vals.reserve(group.size());
                for (const Row* row : group) {
                    Frame f{&cols, row, parent};
                    Value v = eval_expr(e.children[0], f);
                    if (!is_null(v)) vals.push_back(std::move(v));
                }
                switch (e.agg) {
                    case AggFunc::Count:
                        return static_cast<long long>(vals.size());
                    case AggFunc::Sum: {
                        if (vals.empty()) return std::monostate{};
                        Value acc = vals[0];
                        for (size_t i = 1; i < vals.size(); ++i) acc = add(acc, vals[i]);
                        return acc;
                    }
                    case AggFunc::Avg: {
                        if (vals.empty()) return std::monostate{};
                        Value acc = vals[0];
                        for (size_t i = 1; i < vals.size(); ++i) acc = add(acc, vals[i]);
                        return divide(acc, static_cast<long long>(vals.size()));
                    }
                    case AggFunc::Min:
                    case AggFunc::Max: {
                        if (vals.empty()) return std::monostate{};
                        Value best = vals[0];
                        for (size_t i = 1; i < vals.size(); ++i) {
                            auto c = compare(vals[i], best);
                            if (c && ((e.agg == AggFunc::Min && *c < 0) ||
                                      (e.agg == AggFunc::Max && *c > 0)))
                                best = vals[i];
                        }
                        return best;
                    }
                }
                return {};
            }
            case Expr::Arith: {
                Value a = eval_agg_expr(e.children[0], cols, group, parent, group_key_indexes);
                Value b = eval_agg_expr(e.children[1], cols, group, parent, group_key_indexes);
                switch (e.op) {
                    case '+': return add(a, b);
                    case '-': return sub(a, b);
                    case '*': return mul(a, b);
                    case '/': return divide(a, b);
                }
                throw EngineFault("bad arithmetic operator");
            }
            case Expr::Column: {
                // Non-aggregated column inside a grouped block: must be a
                // grouping column; evaluate on the group representative.
                if (group.empty()) return std::monostate{};
                Frame f{&cols, group[0], parent};
                int idx = find_col(cols, e.column);
                if (idx < 0) {
                    // correlated reference to an outer block
                    return lookup(f, e.column);
                }
                bool is_key = false;
                for (int k : group_key_indexes)
                    if (k == idx) is_key = true;
                if (!is_key)
                    throw EngineFault("column " + e.column.text() +
                                      " must appear in GROUP BY or an aggregate");
                return (*group[0])[static_cast<size_t>(idx)];
            }
            default: {
                Frame f{&cols, group.empty() ? nullptr : group[0], parent};
                return eval_expr(e, f);
            }
        }
    }

    // --- FROM construction ---
    struct Working {
        std::vector<ColInfo> cols;
        std::vector<Row> rows;
    };

    struct ItemRel {
        std::vector<ColInfo> cols;
        std::vector<Row> rows;
    };

    ItemRel load_item(const FromItem& f, const Frame* env) {
        ItemRel rel;
        std::string binding = f.binding();
        if (f.derived) {
            ResultSet r = exec_query(*f.derived, env);
            for (const auto& h : r.headers) rel.cols.push_back(ColInfo{binding, h});
            rel.rows = std::move(r.rows);
            return rel;
        }
        if (!db.resolves(f.table))
            throw ResolutionError("relation \"" + f.table + "\" does not exist");
        const TableSchema& schema = db.catalog().table(f.table);
        for (const auto& c : schema.columns) rel.cols.push_back(ColInfo{binding, c.name});
        for (const auto& sr : db.rows(f.table)) rel.rows.push_back(sr.values);
        return rel;
    }

    // Split a predicate into conjuncts for pushdown.
    static void collect_conjuncts(const Pred& p, std::vector<const Pred*>& out) {
        if (p.kind == Pred::And) {
            for (const auto& c : p.children) collect_conjuncts(c, out);
        } else {
            out.push_back(&p);
        }
    }

    bool pred_resolvable(const Pred& p, const std::vector<ColInfo>& cols, const Frame* env) {
        // True when every column the predicate mentions resolves against
        // cols or the enclosing environment (correlation).
        bool ok = true;
        auto check_ref = [&](const ColumnRef& ref) {
            if (!ok) return;
            if (find_col(cols, ref) >= 0) return;
            for (const Frame* f = env; f; f = f->parent)
                if (find_col(*f->cols, ref) >= 0) return;
            ok = false;
        };
        std::function<void(const Expr&)> walk_expr = [&](const Expr& e) {
            if (e.kind == Expr::Column) check_ref(e.column);
            for (const auto& c : e.children) walk_expr(c);
            if (e.subquery) ok = false;  // subqueries are never pushed down
        };
        std::function<void(const Pred&)> walk_pred = [&](const Pred& q) {
            for (const auto& c : q.children) walk_pred(c);
            if (q.kind == Pred::Cmp) {
                walk_expr(q.lhs);
                walk_expr(q.rhs);
            } else if (q.kind == Pred::Like || q.kind == Pred::InList || q.kind == Pred::IsNull) {
                check_ref(q.col);
            } else if (q.kind == Pred::InSubquery) {
                ok = false;
            }
        };
        walk_pred(p);
        return ok;
    }

    // Find an equi-join pair (new-side column, expression over acc/env)
    // usable for hashing the incoming relation.
    struct HashPlan {
        int new_col = -1;
        const Expr* probe = nullptr;
    };

    HashPlan plan_hash(const std::vector<const Pred*>& conjuncts, const std::vector<ColInfo>& acc_cols,
                       const std::vector<ColInfo>& new_cols, const Frame* env) {
        for (const Pred* p : conjuncts) {
            if (p->kind != Pred::Cmp || p->op != CmpOp::Eq) continue;
            for (int side = 0; side < 2; ++side) {
                const Expr& a = side ? p->rhs : p->lhs;
                const Expr& b = side ? p->lhs : p->rhs;
                if (a.kind != Expr::Column) continue;
                int ni = find_col(new_cols, a.column);
                if (ni < 0) continue;
                // probe side must not touch the new relation
                bool probe_ok = true;
                std::function<void(const Expr&)> walk = [&](const Expr& e) {
                    if (e.kind == Expr::Column && find_col(new_cols, e.column) >= 0) probe_ok = false;
                    if (e.subquery) probe_ok = false;
                    for (const auto& c : e.children) walk(c);
                };
                walk(b);
                if (!probe_ok) continue;
                // and must resolve against acc/env
                Pred fake = Pred::make_cmp(deep_copy(b), CmpOp::Eq, Expr::make_literal(0LL));
                if (!pred_resolvable(fake, acc_cols, env)) continue;
                return HashPlan{ni, &b};
            }
        }
        return {};
    }

    ResultSet exec_block(const QueryBlock& b, const Frame* env) {
        // load + join from items
        Working acc;
        std::vector<const Pred*> where_conjuncts;
        if (b.where) collect_conjuncts(*b.where, where_conjuncts);
        std::vector<bool> applied(where_conjuncts.size(), false);

        auto apply_pushable = [&]() {
            for (size_t ci = 0; ci < where_conjuncts.size(); ++ci) {
                if (applied[ci]) continue;
                if (!pred_resolvable(*where_conjuncts[ci], acc.cols, env)) continue;
                applied[ci] = true;
                std::vector<Row> kept;
                kept.reserve(acc.rows.size());
                for (auto& row : acc.rows) {
                    Frame f{&acc.cols, &row, env};
                    if (eval_pred(*where_conjuncts[ci], f) == Tri::True) kept.push_back(std::move(row));
                }
                acc.rows = std::move(kept);
            }
        };

        for (size_t i = 0; i < b.from.size(); ++i) {
            ItemRel rel = load_item(b.from[i], env);
            if (i == 0) {
                acc.cols = rel.cols;
                acc.rows = std::move(rel.rows);
                apply_pushable();
                continue;
            }
            const FromItem& f = b.from[i];
            std::vector<ColInfo> joined_cols = acc.cols;
            joined_cols.insert(joined_cols.end(), rel.cols.begin(), rel.cols.end());

            std::vector<const Pred*> on_conjuncts;
            if (f.join_cond) collect_conjuncts(*f.join_cond, on_conjuncts);

            std::vector<Row> joined;
            if (f.join == JoinKind::LeftOuter) {
                for (const auto& lrow : acc.rows) {
                    bool matched = false;
                    for (const auto& rrow : rel.rows) {
                        Row combined = lrow;
                        combined.insert(combined.end(), rrow.begin(), rrow.end());
                        Frame frame{&joined_cols, &combined, env};
                        bool ok = true;
                        for (const Pred* p : on_conjuncts)
                            if (eval_pred(*p, frame) != Tri::True) { ok = false; break; }
                        if (ok) {
                            matched = true;
                            joined.push_back(std::move(combined));
                        }
                    }
                    if (!matched) {
                        Row combined = lrow;
                        combined.resize(joined_cols.size(), std::monostate{});
                        joined.push_back(std::move(combined));
                    }
                }
            } else {
                HashPlan hp = plan_hash(on_conjuncts, acc.cols, rel.cols, env);
                if (hp.new_col >= 0 && acc.rows.size() * rel.rows.size() > 256) {
                    std::unordered_map<std::string, std::vector<const Row*>> index;
                    for (const auto& rrow : rel.rows) {
                        const Value& v = rrow[static_cast<size_t>(hp.new_col)];
                        if (is_null(v)) continue;
                        index[canonical_text(v)].push_back(&rrow);
                    }
                    for (const auto& lrow : acc.rows) {
                        Frame lframe{&acc.cols, &lrow, env};
                        Value probe = eval_expr(*hp.probe, lframe);
                        if (is_null(probe)) continue;
                        auto it = index.find(canonical_text(probe));
                        if (it == index.end()) continue;
                        for (const Row* rrow : it->second) {
                            Row combined = lrow;
                            combined.insert(combined.end(), rrow->begin(), rrow->end());
                            Frame frame{&joined_cols, &combined, env};
                            bool ok = true;
                            for (const Pred* p : on_conjuncts)
                                if (eval_pred(*p, frame) != Tri::True) { ok = false; break; }
                            if (ok) joined.push_back(std::move(combined));
                        }
                    }
                } else {
                    for (const auto& lrow : acc.rows) {
                        for (const auto& rrow : rel.rows) {
                            Row combined = lrow;
                            combined.insert(combined.end(), rrow.begin(), rrow.end());
                            Frame frame{&joined_cols, &combined, env};
                            bool ok = true;
                            for (const Pred* p : on_conjuncts)
                                if (eval_pred(*p, frame) != Tri::True) { ok = false; break; }
                            if (ok) joined.push_back(std::move(combined));
                        }
                    }
                }
            }
            acc.cols = std::move(joined_cols);
            acc.rows = std::move(joined);
            // Pushdown is unsafe across a pending left join only for
            // right-side refs, which cannot resolve yet, so this is safe.
            apply_pushable();
        }

        // residual WHERE conjuncts
        for (size_t ci = 0; ci < where_conjuncts.size(); ++ci) {
            if (applied[ci]) continue;
            std::vector<Row> kept;
            kept.reserve(acc.rows.size());
            for (auto& row : acc.rows) {
                Frame f{&acc.cols, &row, env};
                if (eval_pred(*where_conjuncts[ci], f) == Tri::True) kept.push_back(std::move(row));
            }
            acc.rows = std::move(kept);
        }

        // select list (expand *)
        std::vector<SelectItem> select = b.select;
        if (select.empty()) {
            for (const auto& c : acc.cols) {
                SelectItem item;
                item.expr = Expr::make_column(c.binding, c.name);
                item.alias = c.name;
                select.push_back(std::move(item));
            }
        }

        bool any_agg = false;
        for (const auto& s : select)
            if (expr_has_aggregate(s.expr)) any_agg = true;

        ResultSet out;
        for (size_t i = 0; i < select.size(); ++i) {
            const auto& s = select[i];
            if (!s.alias.empty()) out.headers.push_back(s.alias);
            else if (s.expr.kind == Expr::Column) out.headers.push_back(s.expr.column.column);
            else if (s.expr.kind == Expr::Aggregate) out.headers.push_back(lower(agg_name(s.expr.agg)));
            else out.headers.push_back("c" + std::to_string(i));
        }

        if (!any_agg && b.group_by.empty()) {
            for (const auto& row : acc.rows) {
                Frame f{&acc.cols, &row, env};
                Row orow;
                orow.reserve(select.size());
                for (const auto& s : select) orow.push_back(eval_expr(s.expr, f));
                out.rows.push_back(std::move(orow));
            }
            sort_and_limit(b, select, acc, out, env, /*grouped=*/false);
            return out;
        }

        // grouped / aggregated path
        std::vector<int> key_indexes;
        for (const auto& g : b.group_by) {
            int idx = find_col(acc.cols, g);
            if (idx < 0) throw EngineFault("GROUP BY column not found: " + g.text());
            key_indexes.push_back(idx);
        }
        std::map<std::string, std::vector<const Row*>> groups;
        std::vector<std::string> group_order;
        for (const auto& row : acc.rows) {
            std::string key;
            for (int k : key_indexes) {
                key += is_null(row[static_cast<size_t>(k)])
                           ? std::string("\\N")
                           : canonical_text(row[static_cast<size_t>(k)]);
                key += '\x1f';
            }
            auto [it, inserted] = groups.try_emplace(key);
            if (inserted) group_order.push_back(key);
            it->second.push_back(&row);
        }
        if (groups.empty() && b.group_by.empty() && any_agg) {
            // scalar aggregate over empty input still yields one row
            groups.try_emplace(std::string());
            group_order.push_back(std::string());
        }
        for (const auto& key : group_order) {
            const auto& grp = groups[key];
            Row orow;
            orow.reserve(select.size());
            for (const auto& s : select)
                orow.push_back(eval_agg_expr(s.expr, acc.cols, grp, env, key_indexes));
            out.rows.push_back(std::move(orow));
        }
        sort_and_limit(b, select, acc, out, env, /*grouped=*/true);
        return out;
    }

    void sort_and_limit(const QueryBlock& b, const std::vector<SelectItem>& select, const Working&,
                        ResultSet& out, const Frame*, bool) {
        if (!b.order_by.empty()) {
            // order keys resolve against output columns (alias or plain
            // column-name projection)
            std::vector<std::pair<int, bool>> keys;
            for (const auto& oi : b.order_by) {
                int idx = -1;
                for (size_t i = 0; i < select.size(); ++i) {
                    const auto& s = select[i];
                    std::string outname = !s.alias.empty()
                                              ? s.alias
                                              : (s.expr.kind == Expr::Column ? s.expr.column.column
                                                                             : std::string());
                    if (oi.col.qualifier.empty() && outname == oi.col.column) { idx = (int)i; break; }
                    if (s.expr.kind == Expr::Column && s.expr.column.column == oi.col.column &&
                        (oi.col.qualifier.empty() || s.expr.column.qualifier == oi.col.qualifier)) {
                        idx = (int)i;
                        break;
                    }
                }
                if (idx < 0) throw EngineFault("ORDER BY key must be a projected column: " + oi.col.text());
                keys.emplace_back(idx, oi.asc);
            }
            std::stable_sort(out.rows.begin(), out.rows.end(), [&](const Row& x, const Row& y) {
                for (auto [idx, asc] : keys) {
                    const Value& a = x[static_cast<size_t>(idx)];
                    const Value& b2 = y[static_cast<size_t>(idx)];
                    bool an = is_null(a), bn = is_null(b2);
                    if (an || bn) {
                        if (an == bn) continue;
                        // NULLS LAST for ASC, FIRST for DESC
                        return asc ? !an && bn : an && !bn;
                    }
                    auto c = compare(a, b2);
                    if (*c == 0) continue;
                    return asc ? *c < 0 : *c > 0;
                }
                return false;
            });
            out.order_significant = true;
        }
        if (b.limit && out.rows.size() > static_cast<size_t>(*b.limit))
            out.rows.resize(static_cast<size_t>(*b.limit));
    }

    ResultSet exec_query(const Query& q, const Frame* env) {
        ResultSet out;
        for (size_t i = 0; i < q.branches.size(); ++i) {
            ResultSet r = exec_block(q.branches[i], env);
            if (i == 0) {
                out = std::move(r);
            } else {
                if (r.headers.size() != out.headers.size())
                    throw EngineFault("UNION ALL branches have mismatched arity");
                for (auto& row : r.rows) out.rows.push_back(std::move(row));
                out.order_significant = false;
            }
        }
        return out;
    }
};

}  // namespace

ResultSet execute(const Query& q, const DatabaseState& db) {
    Evaluator ev{db};
    return ev.exec_query(q, nullptr);
}

}  // namespace hqe
