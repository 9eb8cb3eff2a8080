#pragma once

#include <memory>
#include <optional>
#include <string>

#include "hqe/ast.hpp"
#include "hqe/database.hpp"
#include "hqe/journal.hpp"
#include "hqe/resultset.hpp"

namespace hqe {

struct EngineError {
    enum class Kind { Resolution, Timeout, Protocol } kind;
    std::string message;
};

struct InvokeOutcome {
    std::optional<ResultSet> result;
    std::optional<EngineError> error;

    bool ok() const { return result.has_value(); }
    bool fit() const { return ok() && classify_fit(*result) == FitClass::Fit; }
    FitClass fit_class() const { return ok() ? classify_fit(*result) : FitClass::Empty; }
};

struct OracleOptions {
    int timeout_ms = 60000;           // external backend budget per request
    std::string workspace = "";       // scratch dir for external invocations
};

// The opaque executable: the only way to learn anything about the
// hidden query is invoke(db) -> result-or-error.  The embedded backend
// evaluates a sealed QueryIR that no public operation exposes; the
// external backend speaks a line protocol to a wrapped executable.
class Oracle {
  public:
    static Oracle embedded(Query hidden);
    static Oracle external(std::string command, OracleOptions opts = {});
    ~Oracle();
    Oracle(Oracle&&) noexcept;
    Oracle& operator=(Oracle&&) noexcept;

    InvokeOutcome invoke(const DatabaseState& db);
    long long invocation_count() const;

    // Per-invocation accounting: generation, state fingerprint, result
    // digest, fit class, elapsed.  No query text ever appears here.
    const std::vector<nlohmann::json>& invocation_log() const;
    void attach_journal(Journal* j);  // mirrors invocation records into a session journal

  private:
    Oracle();
    struct Backend;
    std::unique_ptr<Backend> backend_;
};

}  // namespace hqe
