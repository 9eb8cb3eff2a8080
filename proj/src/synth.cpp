#include "hqe/synth.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <thread>

#include "httplib.h"

#include "hqe/util.hpp"

namespace hqe {

const std::vector<std::string>& synthesis_guidelines() {
    static const std::vector<std::string> g = {
        "Do not formulate syntactically incorrect SQL.",
        "Do not repeat any previously formulated incorrect SQL.",
        "Do not use redundant join conditions or redundant nesting.",
        "Do not use any predicates with place holder parameters.",
        "Strictly use the tables given in the seed query.",
        "If the seed query has a multi-instance table in its FROM clause, keep all the table "
        "instances in your query.",
        "Do not use join predicates absent from the seed query.",
        "Strictly reuse the order, attribute dependencies, and aliases of the projections from "
        "the seed query.",
        "Validate all the predicates in the seed query against the business description. Include "
        "all the valid predicates in your query.",
        "For the attributes in the invalid filter predicates, validate their use from the "
        "business description. Then formulate predicates with them.",
        "A semi-join, implying at least one match, may be incorrectly present as an equi-join in "
        "the seed query.",
        "A subquery used more than once should be a CTE with alias.",
        "A subquery may have at most one COUNT() aggregation.",
        "If the seed result has more rows than the actual result, consider performing UNION ALL "
        "before GROUP BY.",
        "If the seed result has fewer rows as compared to the actual result, consider either "
        "adding more GROUP BY attributes or having more GROUP BY clauses through nestings."};
    return g;
}

std::string build_initial_prompt(const PromptBundle& bundle) {
    if (bundle.description.empty())
        throw std::invalid_argument("initial prompt requires a business description");
    if (bundle.seed_sql.empty()) throw std::invalid_argument("initial prompt requires a seed query");
    std::string out;
    out += "You are an expert in formulating SQL queries from high-level textual business "
           "descriptions.\n";
    out += "Formulate SQL query for the following description:\n" + bundle.description + "\n";
    out += "Use the following schema to formulate SQL:\n" + bundle.schema_ddl + "\n";
    out += "Use the following SQL as a seed query. You should refine the seed query to produce "
           "the final SQL:\n" + bundle.seed_sql + "\n";
    out += "The actual result has the following number of rows: " +
           std::to_string(bundle.hidden_cardinality) + "\n";
    out += "The seed query produces the following number of rows: " +
           std::to_string(bundle.seed_cardinality) + "\n";
    out += "Follow the refinement guidelines mentioned below:\n";
    const auto& gs = synthesis_guidelines();
    for (size_t i = 0; i < gs.size(); ++i)
        out += "G" + std::to_string(i + 1) + ". " + gs[i] + "\n";
    return out;
}

namespace {

// Leaf branches of a query: union branches, reaching through a single
// derived-table wrapper when present.
std::vector<const QueryBlock*> leaf_branches(const Query& q) {
    if (q.branches.size() == 1) {
        const QueryBlock& b = q.branches.front();
        if (b.from.size() == 1 && b.from.front().derived &&
            b.from.front().derived->branches.size() >= 1) {
            std::vector<const QueryBlock*> out;
            for (const auto& ib : b.from.front().derived->branches) out.push_back(&ib);
            return out;
        }
    }
    std::vector<const QueryBlock*> out;
    for (const auto& b : q.branches) out.push_back(&b);
    return out;
}

// Column-column comparison pairs, by bare column name, oriented.
struct JoinPair {
    std::string a, b;
    CmpOp op;
    bool operator<(const JoinPair& o) const {
        return std::tie(a, b, op) < std::tie(o.a, o.b, o.op);
    }
};

JoinPair orient_pair(const std::string& x, const std::string& y, CmpOp op) {
    if (op == CmpOp::Ge || op == CmpOp::Gt) return JoinPair{y, x, flip_cmp(op)};
    if (op == CmpOp::Eq && y < x) return JoinPair{y, x, op};
    return JoinPair{x, y, op};
}

void collect_join_pairs(const Pred& p, std::set<JoinPair>& pairs, std::set<JoinPair>& semi_pairs);

void collect_block_pairs(const QueryBlock& b, std::set<JoinPair>& pairs,
                         std::set<JoinPair>& semi_pairs) {
    for (const auto& f : b.from) {
        if (f.join_cond) collect_join_pairs(*f.join_cond, pairs, semi_pairs);
        if (f.derived)
            for (const auto& ib : f.derived->branches) collect_block_pairs(ib, pairs, semi_pairs);
    }
    if (b.where) collect_join_pairs(*b.where, pairs, semi_pairs);
}

void collect_join_pairs(const Pred& p, std::set<JoinPair>& pairs, std::set<JoinPair>& semi_pairs) {
    for (const auto& c : p.children) collect_join_pairs(c, pairs, semi_pairs);
    if (p.kind == Pred::Cmp && p.lhs.kind == Expr::Column && p.rhs.kind == Expr::Column) {
        pairs.insert(orient_pair(p.lhs.column.column, p.rhs.column.column, p.op));
    }
    if (p.kind == Pred::InSubquery && p.subquery && p.subquery->branches.size() == 1) {
        const QueryBlock& ib = p.subquery->branches.front();
        if (ib.select.size() == 1 && ib.select.front().expr.kind == Expr::Column)
            semi_pairs.insert(
                orient_pair(p.col.column, ib.select.front().expr.column.column, CmpOp::Eq));
        for (const auto& ibb : p.subquery->branches) collect_block_pairs(ibb, pairs, semi_pairs);
    }
    if (p.kind == Pred::Cmp) {
        for (const Expr* e : {&p.lhs, &p.rhs})
            if (e->subquery)
                for (const auto& ib : e->subquery->branches) collect_block_pairs(ib, pairs, semi_pairs);
    }
}

std::vector<std::pair<std::string, std::string>> block_projection_names(const QueryBlock& b) {
    // (output name, source column name when the item is a plain column)
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : b.select) {
        std::string alias = s.alias;
        std::string source;
        if (s.expr.kind == Expr::Column) source = s.expr.column.column;
        if (alias.empty()) alias = source;
        out.emplace_back(alias, source);
    }
    return out;
}

}  // namespace

std::vector<AlignmentViolation> check_alignment(const Query& candidate, const Query& seed,
                                                const SchemaCatalog& catalog) {
    std::vector<AlignmentViolation> out;

    // G5/G6: whole-query table multiset equality.
    auto cand_tables = table_multiset(candidate);
    auto seed_tables = table_multiset(seed);
    if (cand_tables != seed_tables) {
        std::string detail = "use the tables as per the seed query:";
        for (const auto& [t, n] : seed_tables)
            detail += " " + t + (n > 1 ? " x" + std::to_string(n) : "");
        bool multi_instance = false;
        for (const auto& [t, n] : seed_tables)
            if (n > 1 && cand_tables[t] != n) multi_instance = true;
        out.push_back({multi_instance ? 6 : 5, "FROM", detail});
    }

    // G7: candidate column-column atoms must appear in the seed, where
    // IN-subquery membership counts as a rewrite of a seed equi-join.
    std::set<JoinPair> cand_pairs, cand_semi, seed_pairs, seed_semi;
    for (const auto* b : leaf_branches(candidate)) collect_block_pairs(*b, cand_pairs, cand_semi);
    for (const auto* b : leaf_branches(seed)) collect_block_pairs(*b, seed_pairs, seed_semi);
    for (const auto& jp : cand_pairs) {
        if (!seed_pairs.count(jp))
            out.push_back({7, "WHERE",
                           "do not use join predicates absent from the seed query (" + jp.a + " " +
                               cmp_text(jp.op) + " " + jp.b + ")"});
    }
    for (const auto& jp : cand_semi) {
        // allowed when the seed carries the same pair as an equi-join
        if (!seed_pairs.count(jp) && !seed_semi.count(jp))
            out.push_back({7, "WHERE",
                           "membership rewrite has no seed counterpart (" + jp.a + " IN ... " +
                               jp.b + ")"});
    }

    // G8: output projection order/aliases, and per-branch sources.
    auto cand_leaves = leaf_branches(candidate);
    auto seed_leaves = leaf_branches(seed);
    auto cand_out = block_projection_names(*cand_leaves.front());
    auto seed_out = block_projection_names(*seed_leaves.front());
    if (cand_out.size() != seed_out.size()) {
        out.push_back({8, "SELECT", "reuse the projection order and aliases of the seed query"});
    } else {
        for (size_t i = 0; i < cand_out.size(); ++i) {
            if (lower(cand_out[i].first) != lower(seed_out[i].first)) {
                out.push_back({8, "SELECT",
                               "projection " + std::to_string(i + 1) + " must be aliased '" +
                                   seed_out[i].first + "'"});
                break;
            }
        }
    }
    // dependency check on matched leaf branches (by table multiset)
    if (cand_leaves.size() == seed_leaves.size() && cand_leaves.size() > 1) {
        std::vector<bool> used(seed_leaves.size(), false);
        for (const auto* cb : cand_leaves) {
            auto ct = block_table_multiset(*cb);
            int match = -1;
            for (size_t i = 0; i < seed_leaves.size(); ++i) {
                if (used[i]) continue;
                if (block_table_multiset(*seed_leaves[i]) == ct) { match = (int)i; break; }
            }
            if (match < 0) continue;  // G5 already flagged any table drift
            used[static_cast<size_t>(match)] = true;
            auto cp = block_projection_names(*cb);
            auto sp = block_projection_names(*seed_leaves[static_cast<size_t>(match)]);
            if (cp.size() != sp.size()) continue;
            for (size_t i = 0; i < cp.size(); ++i) {
                if (!cp[i].second.empty() && !sp[i].second.empty() &&
                    lower(cp[i].second) != lower(sp[i].second)) {
                    out.push_back({8, "SELECT",
                                   "projection " + std::to_string(i + 1) +
                                       " must depend on " + sp[i].second});
                }
            }
        }
    }
    (void)catalog;
    return out;
}

std::string build_feedback_prompt(FeedbackKind kind, const std::string& last_sql,
                                  long long candidate_cardinality, long long hidden_cardinality,
                                  const std::vector<AlignmentViolation>& violations) {
    std::string out = "You formulated the following SQL:\n" + last_sql + "\n";
    switch (kind) {
        case FeedbackKind::ResultCardinality:
            out += "It produces the following number of rows: " +
                   std::to_string(candidate_cardinality) + "\n";
            out += "Below is the actual result cardinality: " +
                   std::to_string(hidden_cardinality) + "\n";
            out += "The results do not match. Fix the query.\n";
            break;
        case FeedbackKind::ResultContent:
            out += "Its result does not match with actual result. Fix the query.\n";
            break;
        case FeedbackKind::ClauseCorrection:
            for (const auto& v : violations)
                out += "Fix its " + v.clause + " clause as per the seed query: " + v.message + "\n";
            break;
    }
    return out;
}

MockChatClient MockChatClient::from_jsonl(const std::string& text) {
    std::map<long long, std::string> by_round;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        by_round[j.at("round").get<long long>()] = j.at("reply_sql").get<std::string>();
    }
    std::vector<std::string> replies;
    for (const auto& [round, sql] : by_round) {
        (void)round;
        replies.push_back(sql);
    }
    return MockChatClient(std::move(replies));
}

std::string MockChatClient::complete(const std::vector<std::pair<std::string, std::string>>&) {
    if (replies_.empty()) throw std::runtime_error("mock transcript is empty");
    if (round_ < replies_.size()) return replies_[round_++];
    return replies_.back();  // repeating forces duplicate-detection termination
}

HttpChatClient::HttpChatClient(std::string endpoint, std::string model, std::string api_key_env)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_env_(std::move(api_key_env)) {}

std::string HttpChatClient::complete(const std::vector<std::pair<std::string, std::string>>& messages) {
    // endpoint form: http(s)://host[:port]/path
    auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos) throw std::runtime_error("bad endpoint: " + endpoint_);
    auto path_start = endpoint_.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? endpoint_ : endpoint_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

    nlohmann::json body;
    body["model"] = model_;
    body["temperature"] = 0;
    body["messages"] = nlohmann::json::array();
    for (const auto& [role, content] : messages)
        body["messages"].push_back({{"role", role}, {"content", content}});

    const char* key = std::getenv(api_key_env_.c_str());
    httplib::Client cli(origin);
    cli.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (key) headers.emplace("Authorization", std::string("Bearer ") + key);

    for (int attempt = 0; attempt < 3; ++attempt) {
        auto res = cli.Post(path, headers, body.dump(), "application/json");
        if (res && res->status == 200) {
            auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(250 * (attempt + 1)));
    }
    throw std::runtime_error("chat endpoint unreachable: " + endpoint_);
}

std::string strip_code_fences(const std::string& reply) {
    auto first = reply.find("```");
    if (first == std::string::npos) return reply;
    auto line_end = reply.find('\n', first);
    if (line_end == std::string::npos) return reply;
    auto close = reply.find("```", line_end);
    if (close == std::string::npos) return reply.substr(line_end + 1);
    return reply.substr(line_end + 1, close - line_end - 1);
}

RefineOutcome refine_loop(ChatClient& client, DatabaseState& instance, const Query& seed,
                          const PromptBundle& bundle, const SchemaCatalog& catalog,
                          const ResultSet& hidden_result, Journal* journal,
                          const RefineOptions& opts) {
    RefineOutcome out;
    std::vector<std::pair<std::string, std::string>> messages;
    messages.emplace_back("user", build_initial_prompt(bundle));

    std::set<std::string> seen_digests;
    bool seed_ordered = query_has_order_by(seed);

    auto log_round = [&](const std::string& kind, const std::string& prompt, const std::string& reply) {
        if (journal)
            journal->add({{"t", "prompt_round"},
                          {"round", out.rounds},
                          {"kind", kind},
                          {"prompt", prompt},
                          {"reply", reply}});
    };

    std::string pending_kind = "IP";
    while (out.rounds < opts.max_total_rounds) {
        std::string reply = client.complete(messages);
        ++out.rounds;
        messages.emplace_back("assistant", reply);
        log_round(pending_kind, messages[messages.size() - 2].second, reply);

        std::string sql = strip_code_fences(reply);
        Query candidate;
        bool parsed = false;
        std::string parse_message;
        try {
            candidate = parse_sql(sql);
            parsed = true;
        } catch (const std::exception& e) {
            parse_message = e.what();
        }

        if (!parsed) {
            ++out.result_trials;
            if (out.result_trials >= opts.max_result_trials) {
                out.status = RefineOutcome::Status::FallbackNeeded;
                out.reason = "threshold";
                return out;
            }
            std::vector<AlignmentViolation> v{{1, "syntax", parse_message}};
            pending_kind = "CCP";
            messages.emplace_back("user",
                                  build_feedback_prompt(FeedbackKind::ClauseCorrection, sql, 0, 0, v));
            continue;
        }

        out.skeleton = deep_copy(candidate);
        std::string digest = canonical_digest(candidate, &catalog);
        if (!seen_digests.insert(digest).second) {
            out.status = RefineOutcome::Status::FallbackNeeded;
            out.reason = "duplicate";
            return out;
        }

        auto violations = check_alignment(candidate, seed, catalog);
        if (!violations.empty()) {
            pending_kind = "CCP";
            messages.emplace_back(
                "user", build_feedback_prompt(FeedbackKind::ClauseCorrection, sql, 0, 0, violations));
            continue;
        }

        ResultSet candidate_result;
        try {
            candidate_result = execute(candidate, instance);
        } catch (const std::exception& e) {
            ++out.result_trials;
            if (out.result_trials >= opts.max_result_trials) {
                out.status = RefineOutcome::Status::FallbackNeeded;
                out.reason = "threshold";
                return out;
            }
            std::vector<AlignmentViolation> v{{1, "semantics", e.what()}};
            pending_kind = "CCP";
            messages.emplace_back("user",
                                  build_feedback_prompt(FeedbackKind::ClauseCorrection, sql, 0, 0, v));
            continue;
        }

        bool match = seed_ordered ? ordered_equal(candidate_result, hidden_result)
                                  : multiset_equal(candidate_result, hidden_result);
        if (match) {
            out.status = RefineOutcome::Status::Success;
            out.final_query = candidate;
            return out;
        }

        ++out.result_trials;
        if (out.result_trials >= opts.max_result_trials) {
            out.status = RefineOutcome::Status::FallbackNeeded;
            out.reason = "threshold";
            return out;
        }
        FeedbackKind kind = candidate_result.size() != hidden_result.size()
                                ? FeedbackKind::ResultCardinality
                                : FeedbackKind::ResultContent;
        pending_kind = kind == FeedbackKind::ResultCardinality ? "RCP.v1" : "RCP.v2";
        messages.emplace_back(
            "user", build_feedback_prompt(kind, sql, static_cast<long long>(candidate_result.size()),
                                          static_cast<long long>(hidden_result.size()), {}));
    }
    out.status = RefineOutcome::Status::Failure;
    out.reason = "round budget exhausted";
    return out;
}

}  // namespace hqe
