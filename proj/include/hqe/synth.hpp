#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hqe/executor.hpp"
#include "hqe/journal.hpp"
#include "hqe/oracle.hpp"
#include "hqe/parser.hpp"
#include "hqe/printer.hpp"

namespace hqe {

// The fifteen synthesis guidelines, in order.  They are part of the
// prompt contract; alignment checks enforce the mechanical ones (5-8).
const std::vector<std::string>& synthesis_guidelines();

struct PromptBundle {
    std::string description;   // business-logic text for the hidden query
    std::string schema_ddl;
    std::string seed_sql;
    long long hidden_cardinality = 0;
    long long seed_cardinality = 0;
};

// Deterministic, byte-stable initial prompt.
std::string build_initial_prompt(const PromptBundle& bundle);

struct AlignmentViolation {
    int guideline;        // 5..8
    std::string clause;   // FROM / WHERE / SELECT
    std::string message;
};

// Mechanical seed-alignment checks: table multiset (G5/G6), join-atom
// subset with the semi-join rewrite allowance (G7/G11), projection
// order/alias/dependency equality (G8).
std::vector<AlignmentViolation> check_alignment(const Query& candidate, const Query& seed,
                                                const SchemaCatalog& catalog);

enum class FeedbackKind { ResultCardinality, ResultContent, ClauseCorrection };

std::string build_feedback_prompt(FeedbackKind kind, const std::string& last_sql,
                                  long long candidate_cardinality, long long hidden_cardinality,
                                  const std::vector<AlignmentViolation>& violations);

// Chat-completion client boundary.  Messages are (role, content).
class ChatClient {
  public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const std::vector<std::pair<std::string, std::string>>& messages) = 0;
};

// Scripted replies keyed by round index; JSON Lines {round, reply_sql}.
class MockChatClient : public ChatClient {
  public:
    explicit MockChatClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    static MockChatClient from_jsonl(const std::string& text);
    std::string complete(const std::vector<std::pair<std::string, std::string>>& messages) override;

  private:
    std::vector<std::string> replies_;
    size_t round_ = 0;
};

// POSTs the de-facto chat-completion JSON shape; key read from an
// environment variable, temperature pinned to 0.
class HttpChatClient : public ChatClient {
  public:
    HttpChatClient(std::string endpoint, std::string model, std::string api_key_env);
    std::string complete(const std::vector<std::pair<std::string, std::string>>& messages) override;

  private:
    std::string endpoint_, model_, api_key_env_;
};

struct RefineOptions {
    int max_result_trials = 6;   // unsuccessful result-correction rounds
    int max_total_rounds = 24;   // hard stop across all prompt kinds
};

struct RefineOutcome {
    enum class Status { Success, FallbackNeeded, Failure } status = Status::Failure;
    std::string reason;               // "duplicate" | "threshold" | ...
    std::optional<Query> final_query;
    std::optional<Query> skeleton;    // last structurally parsed candidate
    int rounds = 0;
    int result_trials = 0;
};

// The iterative prompting loop: initial prompt, clause corrections on
// misalignment (not counted as trials), result corrections on mismatch,
// success on result match, fallback on duplicates or trial exhaustion.
RefineOutcome refine_loop(ChatClient& client, DatabaseState& instance, const Query& seed,
                          const PromptBundle& bundle, const SchemaCatalog& catalog,
                          const ResultSet& hidden_result, Journal* journal,
                          const RefineOptions& opts = {});

std::string strip_code_fences(const std::string& reply);

}  // namespace hqe
