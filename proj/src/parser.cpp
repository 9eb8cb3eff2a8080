#include "hqe/parser.hpp"

#include <cctype>
#include <set>

#include "hqe/util.hpp"

namespace hqe {

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
    Tok kind;
    std::string text;   // idents lowercased, punct verbatim
    Value number;       // Number
    size_t offset;
};

struct Lexer {
    std::string src;
    size_t pos = 0;
    Token cur;

    explicit Lexer(std::string s) : src(std::move(s)) { advance(); }

    void advance() {
        while (pos < src.size()) {
            if (std::isspace(static_cast<unsigned char>(src[pos]))) { ++pos; continue; }
            if (src.compare(pos, 2, "--") == 0) {
                while (pos < src.size() && src[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        cur.offset = pos;
        if (pos >= src.size()) { cur.kind = Tok::End; cur.text.clear(); return; }
        char c = src[pos];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
                ++pos;
            cur.kind = Tok::Ident;
            cur.text = lower(src.substr(start, pos - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[pos + 1])))) {
            size_t start = pos;
            bool saw_dot = false;
            while (pos < src.size() && (std::isdigit(static_cast<unsigned char>(src[pos])) ||
                                        (!saw_dot && src[pos] == '.'))) {
                if (src[pos] == '.') saw_dot = true;
                ++pos;
            }
            std::string t = src.substr(start, pos - start);
            cur.kind = Tok::Number;
            cur.text = t;
            if (saw_dot) {
                auto dot = t.find('.');
                int scale = static_cast<int>(t.size() - dot - 1);
                t.erase(dot, 1);
                cur.number = Decimal{std::stoll(t), scale};
            } else {
                cur.number = std::stoll(t);
            }
            return;
        }
        if (c == '\'') {
            ++pos;
            std::string s;
            while (pos < src.size()) {
                if (src[pos] == '\'') {
                    if (pos + 1 < src.size() && src[pos + 1] == '\'') { s += '\''; pos += 2; continue; }
                    ++pos;
                    cur.kind = Tok::String;
                    cur.text = s;
                    return;
                }
                s += src[pos++];
            }
            throw ParseError("unterminated string literal", cur.offset);
        }
        // multi-char operators
        for (const char* op : {"<=", ">=", "<>", "!=", "||"}) {
            if (src.compare(pos, 2, op) == 0) {
                cur.kind = Tok::Punct;
                cur.text = op;
                pos += 2;
                return;
            }
        }
        cur.kind = Tok::Punct;
        cur.text = std::string(1, c);
        ++pos;
    }
};

struct Parser {
    Lexer lex;
    explicit Parser(std::string s) : lex(std::move(s)) {}

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, lex.cur.offset); }
    [[noreturn]] void unsupported(const std::string& feat) {
        throw UnsupportedFeature(feat, lex.cur.offset);
    }

    bool at_kw(const std::string& kw) { return lex.cur.kind == Tok::Ident && lex.cur.text == kw; }
    bool accept_kw(const std::string& kw) {
        if (!at_kw(kw)) return false;
        lex.advance();
        return true;
    }
    void expect_kw(const std::string& kw) {
        if (!accept_kw(kw)) fail("expected " + kw);
    }
    bool at_punct(const std::string& p) { return lex.cur.kind == Tok::Punct && lex.cur.text == p; }
    bool accept_punct(const std::string& p) {
        if (!at_punct(p)) return false;
        lex.advance();
        return true;
    }
    void expect_punct(const std::string& p) {
        if (!accept_punct(p)) fail("expected '" + p + "'");
    }
    std::string ident() {
        if (lex.cur.kind != Tok::Ident) fail("expected identifier");
        std::string s = lex.cur.text;
        lex.advance();
        return s;
    }

    static const std::set<std::string>& reserved() {
        static const std::set<std::string> kw = {
            "select", "from",  "where", "group", "order", "by",    "limit", "union",
            "all",    "and",   "or",    "not",   "in",    "is",    "null",  "like",
            "between", "join", "left",  "right", "full",  "outer", "inner", "on",
            "as",     "asc",   "desc",  "sum",   "count", "min",   "max",   "avg",
            "exists", "having", "distinct", "case", "cast", "date"};
        return kw;
    }
    bool at_reserved() {
        return lex.cur.kind == Tok::Ident && reserved().count(lex.cur.text) > 0;
    }

    Query parse_query() {
        Query q;
        q.branches.push_back(parse_block());
        while (at_kw("union")) {
            lex.advance();
            if (!accept_kw("all")) unsupported("UNION DISTINCT (only UNION ALL is supported)");
            q.branches.push_back(parse_block());
        }
        return q;
    }

    QueryBlock parse_block() {
        // allow optional outer parens around a branch
        if (accept_punct("(")) {
            // could be a parenthesized block or nothing else at this level
            QueryBlock b = parse_block();
            expect_punct(")");
            return b;
        }
        expect_kw("select");
        if (accept_kw("distinct")) unsupported("SELECT DISTINCT");
        QueryBlock b;
        if (accept_punct("*")) {
            // empty select list = *
        } else {
            while (true) {
                SelectItem item;
                item.expr = parse_expr();
                if (accept_kw("as")) item.alias = ident();
                else if (lex.cur.kind == Tok::Ident && !at_reserved()) item.alias = ident();
                b.select.push_back(std::move(item));
                if (!accept_punct(",")) break;
            }
        }
        expect_kw("from");
        b.from.push_back(parse_from_item(JoinKind::Cross));
        while (true) {
            if (accept_punct(",")) {
                b.from.push_back(parse_from_item(JoinKind::Cross));
                continue;
            }
            if (at_kw("join") || at_kw("inner") || at_kw("left")) {
                JoinKind k = JoinKind::Inner;
                if (accept_kw("left")) {
                    accept_kw("outer");
                    k = JoinKind::LeftOuter;
                } else {
                    accept_kw("inner");
                }
                expect_kw("join");
                FromItem fi = parse_from_item(k);
                expect_kw("on");
                fi.join_cond = parse_pred();
                b.from.push_back(std::move(fi));
                continue;
            }
            if (at_kw("right") || at_kw("full")) unsupported("RIGHT/FULL OUTER JOIN");
            break;
        }
        if (accept_kw("where")) b.where = parse_pred();
        if (accept_kw("group")) {
            expect_kw("by");
            while (true) {
                b.group_by.push_back(parse_colref());
                if (!accept_punct(",")) break;
            }
        }
        if (accept_kw("having")) unsupported("HAVING");
        if (accept_kw("order")) {
            expect_kw("by");
            while (true) {
                OrderItem oi;
                oi.col = parse_colref();
                if (accept_kw("desc")) oi.asc = false;
                else accept_kw("asc");
                b.order_by.push_back(std::move(oi));
                if (!accept_punct(",")) break;
            }
        }
        if (accept_kw("limit")) {
            if (lex.cur.kind != Tok::Number || !std::holds_alternative<long long>(lex.cur.number))
                fail("LIMIT expects a non-negative integer");
            long long n = std::get<long long>(lex.cur.number);
            if (n < 0) fail("LIMIT expects a non-negative integer");
            b.limit = n;
            lex.advance();
        }
        return b;
    }

    FromItem parse_from_item(JoinKind k) {
        FromItem fi;
        fi.join = k;
        if (accept_punct("(")) {
            Query sub = parse_query();
            expect_punct(")");
            fi.derived = std::make_shared<Query>(std::move(sub));
            accept_kw("as");
            fi.alias = ident();
            return fi;
        }
        fi.table = ident();
        if (accept_kw("as")) fi.alias = ident();
        else if (lex.cur.kind == Tok::Ident && !at_reserved()) fi.alias = ident();
        return fi;
    }

    ColumnRef parse_colref() {
        std::string first = ident();
        if (accept_punct(".")) return ColumnRef{first, ident()};
        return ColumnRef{"", first};
    }

    // --- predicates ---
    Pred parse_pred() { return parse_or(); }

    Pred parse_or() {
        std::vector<Pred> terms;
        terms.push_back(parse_and());
        while (accept_kw("or")) terms.push_back(parse_and());
        if (terms.size() == 1) return std::move(terms.front());
        return Pred::make_or(std::move(terms));
    }

    Pred parse_and() {
        std::vector<Pred> terms;
        terms.push_back(parse_atom());
        while (accept_kw("and")) terms.push_back(parse_atom());
        if (terms.size() == 1) return std::move(terms.front());
        return Pred::make_and(std::move(terms));
    }

    Pred parse_atom() {
        if (at_kw("not")) unsupported("NOT predicate");
        if (at_kw("exists")) unsupported("EXISTS predicate");
        if (accept_punct("(")) {
            Pred p = parse_pred();
            expect_punct(")");
            return p;
        }
        Expr lhs = parse_expr();
        if (at_kw("is")) {
            lex.advance();
            if (accept_kw("not")) unsupported("IS NOT NULL");
            expect_kw("null");
            if (lhs.kind != Expr::Column) fail("IS NULL applies to a column");
            return Pred::make_is_null(lhs.column);
        }
        if (at_kw("like")) {
            lex.advance();
            if (lhs.kind != Expr::Column) fail("LIKE applies to a column");
            if (lex.cur.kind != Tok::String) fail("LIKE expects a string pattern");
            std::string pat = lex.cur.text;
            lex.advance();
            if (pat.find('_') != std::string::npos)
                unsupported("LIKE underscore wildcard (only % is supported)");
            return Pred::make_like(lhs.column, pat);
        }
        if (at_kw("between")) {
            lex.advance();
            if (lhs.kind != Expr::Column) fail("BETWEEN applies to a column");
            Expr lo = parse_expr();
            expect_kw("and");
            Expr hi = parse_expr();
            return Pred::make_and({Pred::make_cmp(deep_copy(lhs), CmpOp::Ge, std::move(lo)),
                                   Pred::make_cmp(std::move(lhs), CmpOp::Le, std::move(hi))});
        }
        if (at_kw("in")) {
            lex.advance();
            if (lhs.kind != Expr::Column) fail("IN applies to a column");
            expect_punct("(");
            if (at_kw("select")) {
                Query sub = parse_query();
                expect_punct(")");
                return Pred::make_in_subquery(lhs.column, std::move(sub));
            }
            std::vector<Value> vals;
            while (true) {
                vals.push_back(parse_literal_value());
                if (!accept_punct(",")) break;
            }
            expect_punct(")");
            if (vals.empty()) fail("empty IN list");
            return Pred::make_in_list(lhs.column, std::move(vals));
        }
        CmpOp op;
        if (accept_punct("=")) op = CmpOp::Eq;
        else if (accept_punct("<=")) op = CmpOp::Le;
        else if (accept_punct(">=")) op = CmpOp::Ge;
        else if (accept_punct("<")) op = CmpOp::Lt;
        else if (accept_punct(">")) op = CmpOp::Gt;
        else if (at_punct("<>") || at_punct("!=")) unsupported("inequality operator <>");
        else fail("expected comparison operator");
        Expr rhs = parse_expr();
        return Pred::make_cmp(std::move(lhs), op, std::move(rhs));
    }

    Value parse_literal_value() {
        if (at_punct("-")) {
            lex.advance();
            if (lex.cur.kind != Tok::Number) fail("expected number after unary minus");
            Value v = lex.cur.number;
            lex.advance();
            if (const auto* i = std::get_if<long long>(&v)) return -*i;
            Decimal d = std::get<Decimal>(v);
            d.unscaled = -d.unscaled;
            return d;
        }
        if (lex.cur.kind == Tok::Number) {
            Value v = lex.cur.number;
            lex.advance();
            return v;
        }
        if (lex.cur.kind == Tok::String) {
            std::string s = lex.cur.text;
            lex.advance();
            if (auto d = Date::parse(s)) return *d;  // bare ISO dates coerce
            return s;
        }
        if (accept_kw("date")) {
            if (lex.cur.kind != Tok::String) fail("DATE expects a quoted literal");
            auto d = Date::parse(lex.cur.text);
            if (!d) fail("bad date literal: " + lex.cur.text);
            lex.advance();
            return *d;
        }
        if (accept_kw("null")) return std::monostate{};
        fail("expected literal");
    }

    // --- expressions ---
    Expr parse_expr() {
        Expr e = parse_term();
        while (at_punct("+") || at_punct("-")) {
            char op = lex.cur.text[0];
            lex.advance();
            e = Expr::make_arith(op, std::move(e), parse_term());
        }
        return e;
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (at_punct("*") || at_punct("/")) {
            char op = lex.cur.text[0];
            lex.advance();
            e = Expr::make_arith(op, std::move(e), parse_factor());
        }
        return e;
    }

    Expr parse_factor() {
        if (at_punct("-")) {
            lex.advance();
            if (lex.cur.kind != Tok::Number) fail("expected number after unary minus");
            Value v = lex.cur.number;
            lex.advance();
            if (const auto* i = std::get_if<long long>(&v)) return Expr::make_literal(-*i);
            Decimal d = std::get<Decimal>(v);
            d.unscaled = -d.unscaled;
            return Expr::make_literal(d);
        }
        if (lex.cur.kind == Tok::Number || lex.cur.kind == Tok::String || at_kw("date") ||
            at_kw("null"))
            return Expr::make_literal(parse_literal_value());
        if (at_kw("interval")) unsupported("INTERVAL arithmetic");
        if (at_kw("case")) unsupported("CASE expression");
        if (at_kw("cast")) unsupported("CAST expression");
        if (at_kw("sum") || at_kw("count") || at_kw("min") || at_kw("max") || at_kw("avg")) {
            AggFunc f = at_kw("sum")     ? AggFunc::Sum
                        : at_kw("count") ? AggFunc::Count
                        : at_kw("min")   ? AggFunc::Min
                        : at_kw("max")   ? AggFunc::Max
                                         : AggFunc::Avg;
            lex.advance();
            expect_punct("(");
            if (accept_punct("*")) {
                if (f != AggFunc::Count) fail("* argument is only valid for COUNT");
                expect_punct(")");
                return Expr::make_agg(f, std::nullopt);
            }
            if (accept_kw("distinct")) unsupported("aggregate DISTINCT");
            Expr arg = parse_expr();
            expect_punct(")");
            return Expr::make_agg(f, std::move(arg));
        }
        if (accept_punct("(")) {
            if (at_kw("select")) {
                Query sub = parse_query();
                expect_punct(")");
                return Expr::make_subquery(std::move(sub));
            }
            Expr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (lex.cur.kind == Tok::Ident && !at_reserved()) return Expr::make_column(parse_colref());
        fail("expected expression");
    }
};

}  // namespace

Query parse_sql(const std::string& text) {
    Parser p(text);
    Query q = p.parse_query();
    if (p.lex.cur.kind == Tok::Punct && p.lex.cur.text == ";") p.lex.advance();
    if (p.lex.cur.kind != Tok::End) p.fail("trailing input after query");
    if (nesting_depth(q) > 2)
        throw UnsupportedFeature("predicate subquery nesting deeper than two levels", 0);
    for (const auto& b : q.branches)
        for (const auto& f : b.from)
            if (f.derived && f.derived->branches.size() >= 1)
                for (const auto& ib : f.derived->branches)
                    for (const auto& inf : ib.from)
                        if (inf.derived)
                            throw UnsupportedFeature("derived tables nested inside derived tables", 0);
    return q;
}

}  // namespace hqe
