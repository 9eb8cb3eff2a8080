#include "hqe/oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>

#include "hqe/executor.hpp"
#include "hqe/util.hpp"

namespace hqe {

namespace fs = std::filesystem;

namespace {

// Cheap per-invocation fingerprint of the mutated state: generation
// counter plus per-table row counts.  Full content digests would
// dominate runtime at tens of thousands of invocations.
std::string state_fingerprint(const DatabaseState& db) {
    std::string s = "g" + std::to_string(db.generation());
    for (const auto& t : db.catalog().tables) {
        s += "|" + t.name + ":";
        if (!db.resolves(t.name)) s += "x";
        else if (db.is_void(t.name)) s += "v";
        else s += std::to_string(db.row_count(t.name));
    }
    return s;
}

}  // namespace

struct Oracle::Backend {
    // embedded
    std::optional<Query> hidden;
    // external
    std::string command;
    OracleOptions opts;
    pid_t child_pid = -1;
    int to_child = -1;
    int from_child = -1;
    long long external_seq = 0;

    long long invocations = 0;
    std::vector<nlohmann::json> log;
    Journal* session_journal = nullptr;

    ~Backend() { stop_child(); }

    void stop_child() {
        if (child_pid > 0) {
            kill(child_pid, SIGKILL);
            waitpid(child_pid, nullptr, 0);
            child_pid = -1;
        }
        if (to_child >= 0) { close(to_child); to_child = -1; }
        if (from_child >= 0) { close(from_child); from_child = -1; }
    }

    void start_child() {
        int in_pipe[2], out_pipe[2];
        if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
            throw std::runtime_error("pipe() failed for external oracle");
        pid_t pid = fork();
        if (pid < 0) throw std::runtime_error("fork() failed for external oracle");
        if (pid == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]); close(in_pipe[1]);
            close(out_pipe[0]); close(out_pipe[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        child_pid = pid;
        to_child = in_pipe[1];
        from_child = out_pipe[0];
    }

    std::optional<std::string> read_line_with_timeout(int timeout_ms) {
        std::string line;
        auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
        char c;
        while (true) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
            if (left <= 0) return std::nullopt;
            pollfd pfd{from_child, POLLIN, 0};
            int pr = poll(&pfd, 1, static_cast<int>(left));
            if (pr <= 0) return std::nullopt;
            ssize_t n = read(from_child, &c, 1);
            if (n <= 0) return std::nullopt;
            if (c == '\n') return line;
            line += c;
        }
    }

    InvokeOutcome run_external(const DatabaseState& db) {
        if (child_pid < 0) start_child();
        std::string base = opts.workspace.empty() ? std::string("/tmp/hqe-oracle") : opts.workspace;
        fs::path dir = fs::path(base) / ("inv" + std::to_string(external_seq++));
        fs::create_directories(dir);
        db.dump_csv_dir(dir.string());
        std::string req = "RUN " + dir.string() + "\n";
        if (write(to_child, req.data(), req.size()) != static_cast<ssize_t>(req.size())) {
            stop_child();
            return {std::nullopt, EngineError{EngineError::Kind::Protocol, "write to executable failed"}};
        }
        auto line = read_line_with_timeout(opts.timeout_ms);
        if (!line) {
            stop_child();
            return {std::nullopt,
                    EngineError{EngineError::Kind::Timeout,
                                "no response within " + std::to_string(opts.timeout_ms) + " ms"}};
        }
        if (line->rfind("OK ", 0) == 0) {
            std::string csv_path = line->substr(3);
            auto cells = parse_csv(read_file(csv_path));
            ResultSet r;
            if (!cells.empty()) {
                r.headers = cells.front();
                for (size_t i = 1; i < cells.size(); ++i) {
                    Row row;
                    for (const auto& f : cells[i]) {
                        if (f.empty()) row.push_back(std::monostate{});
                        else row.push_back(Value{f});
                    }
                    r.rows.push_back(std::move(row));
                }
            }
            return {std::move(r), std::nullopt};
        }
        if (line->rfind("ERR ", 0) == 0) {
            std::string rest = line->substr(4);
            auto sp = rest.find(' ');
            std::string code = sp == std::string::npos ? rest : rest.substr(0, sp);
            std::string msg = sp == std::string::npos ? "" : rest.substr(sp + 1);
            EngineError::Kind kind = code == "resolution" ? EngineError::Kind::Resolution
                                                          : EngineError::Kind::Protocol;
            return {std::nullopt, EngineError{kind, msg}};
        }
        stop_child();
        return {std::nullopt, EngineError{EngineError::Kind::Protocol, "malformed response: " + *line}};
    }

    InvokeOutcome run(const DatabaseState& db) {
        if (hidden) {
            try {
                return {execute(*hidden, db), std::nullopt};
            } catch (const ResolutionError& e) {
                return {std::nullopt, EngineError{EngineError::Kind::Resolution, e.what()}};
            }
        }
        return run_external(db);
    }
};

Oracle::Oracle() : backend_(std::make_unique<Backend>()) {}
Oracle::~Oracle() = default;
Oracle::Oracle(Oracle&&) noexcept = default;
Oracle& Oracle::operator=(Oracle&&) noexcept = default;

Oracle Oracle::embedded(Query hidden) {
    Oracle o;
    o.backend_->hidden = std::move(hidden);
    return o;
}

Oracle Oracle::external(std::string command, OracleOptions opts) {
    Oracle o;
    o.backend_->command = std::move(command);
    o.backend_->opts = std::move(opts);
    return o;
}

InvokeOutcome Oracle::invoke(const DatabaseState& db) {
    auto t0 = std::chrono::steady_clock::now();
    InvokeOutcome out = backend_->run(db);
    // A black box does not advertise whether its row order is meaningful.
    if (out.result) out.result->order_significant = false;
    auto us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0)
                  .count();
    ++backend_->invocations;
    const char* fit = "error";
    if (out.ok()) {
        switch (classify_fit(*out.result)) {
            case FitClass::Fit: fit = "fit"; break;
            case FitClass::Unfit: fit = "unfit"; break;
            case FitClass::Empty: fit = "empty"; break;
        }
    }
    nlohmann::json rec{{"t", "invoke"},
                       {"n", backend_->invocations},
                       {"gen", db.generation()},
                       {"state", state_fingerprint(db)},
                       {"result", out.ok() ? out.result->digest() : ("err:" + out.error->message)},
                       {"fit", fit},
                       {"us", us}};
    backend_->log.push_back(rec);
    if (backend_->session_journal) backend_->session_journal->add(rec);
    return out;
}

long long Oracle::invocation_count() const { return backend_->invocations; }

const std::vector<nlohmann::json>& Oracle::invocation_log() const { return backend_->log; }

void Oracle::attach_journal(Journal* j) { backend_->session_journal = j; }

}  // namespace hqe
