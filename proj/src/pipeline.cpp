#include "hqe/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>

#include "hqe/parser.hpp"
#include "hqe/util.hpp"

namespace hqe {

namespace fs = std::filesystem;

LoadedSession load_session(const PipelineConfig& cfg) {
    SchemaCatalog catalog = parse_ddl(read_file(cfg.schema_ddl));
    if (!cfg.schema_domains.empty())
        apply_domain_sidecar(catalog, read_file(cfg.schema_domains));

    DatabaseState instance(catalog);
    instance.load_csv_dir(cfg.data_dir, /*require_null_free=*/true);

    Oracle oracle = [&] {
        if (cfg.oracle_mode == "embedded") {
            if (cfg.oracle_hidden_sql.empty())
                throw std::runtime_error("embedded oracle needs [oracle] hidden_sql");
            return Oracle::embedded(parse_sql(read_file(cfg.oracle_hidden_sql)));
        }
        if (cfg.oracle_mode == "external") {
            OracleOptions opts;
            opts.timeout_ms = cfg.oracle_timeout_ms;
            opts.workspace = cfg.out_dir + "/oracle-workspace";
            return Oracle::external(cfg.oracle_cmd, opts);
        }
        throw std::runtime_error("unknown oracle mode: " + cfg.oracle_mode);
    }();

    std::string description;
    if (!cfg.description_path.empty()) description = read_file(cfg.description_path);
    return LoadedSession{std::move(catalog), std::move(instance), std::move(oracle),
                         std::move(description)};
}

GenProfile profile_from_config(const PipelineConfig& cfg) {
    GenProfile p;
    p.default_rows = cfg.checker_rows;
    p.band_span = cfg.checker_band_span;
    return p;
}

namespace {

std::string strip_ws(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

}  // namespace

void apply_config_file(PipelineConfig& cfg, const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line, section;
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip_ws(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = strip_ws(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("malformed config line: " + line);
        std::string key = strip_ws(line.substr(0, eq));
        std::string value = unquote(strip_ws(line.substr(eq + 1)));
        kv[section.empty() ? key : section + "." + key] = value;
    }
    auto take = [&](const char* key, auto& slot) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        using T = std::decay_t<decltype(slot)>;
        if constexpr (std::is_same_v<T, std::string>) slot = it->second;
        else slot = static_cast<T>(std::stoll(it->second));
        kv.erase(it);
    };
    take("schema.ddl", cfg.schema_ddl);
    take("schema.domains", cfg.schema_domains);
    take("data.dir", cfg.data_dir);
    take("oracle.mode", cfg.oracle_mode);
    take("oracle.hidden_sql", cfg.oracle_hidden_sql);
    take("oracle.cmd", cfg.oracle_cmd);
    take("oracle.timeout_ms", cfg.oracle_timeout_ms);
    take("llm.mode", cfg.llm_mode);
    take("llm.transcript", cfg.llm_transcript);
    take("llm.endpoint", cfg.llm_endpoint);
    take("llm.model", cfg.llm_model);
    take("llm.api_key_env", cfg.llm_api_key_env);
    take("llm.description", cfg.description_path);
    take("limits.max_trials", cfg.max_trials);
    take("limits.max_candidates", cfg.max_candidates);
    take("limits.max_in_literals", cfg.max_in_literals);
    take("limits.max_aux_tables", cfg.max_aux_tables);
    take("checker.trials", cfg.checker_trials);
    take("checker.seed", cfg.checker_seed);
    take("checker.rows", cfg.checker_rows);
    take("checker.band_span", cfg.checker_band_span);
    take("out_dir", cfg.out_dir);
    if (!kv.empty())
        throw std::runtime_error("unknown config key: " + kv.begin()->first);
}

namespace {

std::string make_session_dir(const std::string& out_dir) {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
    std::string base = out_dir + "/session-" + buf;
    std::string dir = base;
    for (int k = 1; fs::exists(dir); ++k) dir = base + "-" + std::to_string(k);
    fs::create_directories(dir);
    return dir;
}

std::unique_ptr<ChatClient> make_client(const PipelineConfig& cfg) {
    if (cfg.llm_mode == "mock") {
        if (cfg.llm_transcript.empty())
            throw std::runtime_error("mock client needs [llm] transcript");
        return std::make_unique<MockChatClient>(
            MockChatClient::from_jsonl(read_file(cfg.llm_transcript)));
    }
    if (cfg.llm_mode == "http") {
        if (cfg.llm_endpoint.empty()) throw std::runtime_error("http client needs [llm] endpoint");
        return std::make_unique<HttpChatClient>(cfg.llm_endpoint, cfg.llm_model, cfg.llm_api_key_env);
    }
    throw std::runtime_error("unknown llm mode: " + cfg.llm_mode);
}

}  // namespace

int run_extract(const PipelineConfig& cfg, bool seed_only, std::string* session_dir_out) {
    std::string session_dir;
    try {
        LoadedSession s = load_session(cfg);
        session_dir = make_session_dir(cfg.out_dir);
        if (session_dir_out) *session_dir_out = session_dir;

        Journal journal;
        s.oracle.attach_journal(&journal);
        Mutator m(s.instance, &journal);

        nlohmann::json report;
        auto wall = [t0 = std::chrono::steady_clock::now()] {
            return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        };

        InvokeOutcome initial = s.oracle.invoke(s.instance);
        if (!initial.fit()) {
            std::cerr << "hidden query does not produce a FIT result on the initial instance\n";
            return 3;
        }
        ResultSet hidden_result = *initial.result;

        // --- reverse engineering ---
        SeedOptions seed_opts;
        seed_opts.extract.max_in_literals = cfg.max_in_literals;
        seed_opts.assign.max_aux_tables = cfg.max_aux_tables;
        SeedResult extraction = run_seed_extraction(m, s.oracle, seed_opts);
        std::string seed_sql = render_sql(extraction.seed);
        write_file(session_dir + "/seed.sql", seed_sql + "\n");
        report["reverse"] = seed_report(extraction);

        ResultSet seed_result = execute(extraction.seed, s.instance);
        report["cardinalities"] = {{"hidden", hidden_result.size()}, {"seed", seed_result.size()}};

        int exit_code = 0;
        Query final_query = deep_copy(extraction.seed);
        std::string how = "seed";

        double forward_ms = 0;
        long long inv_before_forward = s.oracle.invocation_count();
        if (!seed_only) {
            bool seed_matches = query_has_order_by(extraction.seed)
                                    ? ordered_equal(seed_result, hidden_result)
                                    : multiset_equal(seed_result, hidden_result);
            if (seed_matches) {
                how = "seed-exact";
            } else {
                auto t_forward = std::chrono::steady_clock::now();
                PromptBundle bundle;
                bundle.description = s.description;
                bundle.schema_ddl = s.catalog.ddl_text();
                bundle.seed_sql = seed_sql;
                bundle.hidden_cardinality = static_cast<long long>(hidden_result.size());
                bundle.seed_cardinality = static_cast<long long>(seed_result.size());

                RefineOptions ropts;
                ropts.max_result_trials = cfg.max_trials;
                auto client = make_client(cfg);
                RefineOutcome refined = refine_loop(*client, s.instance, extraction.seed, bundle, s.catalog,
                                                    hidden_result, &journal, ropts);
                report["forward"] = {{"rounds", refined.rounds},
                                 {"result_trials", refined.result_trials},
                                 {"status", refined.status == RefineOutcome::Status::Success
                                                ? "success"
                                                : (refined.status == RefineOutcome::Status::FallbackNeeded
                                                       ? "fallback:" + refined.reason
                                                       : "failure")}};
                if (refined.status == RefineOutcome::Status::Success) {
                    final_query = *refined.final_query;
                    how = "llm";
                } else if (refined.status == RefineOutcome::Status::FallbackNeeded &&
                           refined.skeleton) {
                    CombinatorialOptions copts;
                    copts.max_candidates = cfg.max_candidates;
                    CombinatorialResult cs =
                        combinatorial_synthesis(extraction.seed, *refined.skeleton, s.instance,
                                                hidden_result, s.catalog, &journal, copts);
                    report["combinatorial"] = {{"tried", cs.candidates_tried},
                                               {"matched", cs.query.has_value()},
                                               {"failure", cs.failure}};
                    if (cs.query) {
                        final_query = *cs.query;
                        how = "combinatorial";
                    } else {
                        exit_code = 1;
                    }
                } else {
                    exit_code = 1;
                }
                forward_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                   t_forward)
                             .count();
            }
        }
        long long inv_forward = s.oracle.invocation_count() - inv_before_forward;

        write_file(session_dir + "/final.sql", render_sql(final_query) + "\n");
        report["how"] = how;

        // --- result-based equivalence check ---
        if (!seed_only && exit_code == 0) {
            // trials run on separate generated instances; their probes are
            // not part of the replayable mutation narrative
            s.oracle.attach_journal(nullptr);
            journal.add({{"t", "checker_phase"}, {"trials", cfg.checker_trials}});
            long long inv_before_check = s.oracle.invocation_count();
            GenProfile profile = profile_from_config(cfg);
            tune_profile_to_instance(profile, s.instance);
            CheckVerdict verdict = result_equivalent(s.oracle, final_query, s.catalog, profile,
                                                     cfg.checker_trials, cfg.checker_seed);
            report["checker"] = {{"pass", verdict.pass},
                                 {"trials", verdict.trials_run},
                                 {"counterexample_seed", verdict.counterexample_seed},
                                 {"diff", verdict.diff},
                                 {"invocations",
                                  s.oracle.invocation_count() - inv_before_check}};
            if (!verdict.pass) {
                dump_counterexample(session_dir + "/counterexample", s.oracle, final_query,
                                    s.catalog, profile, verdict.counterexample_seed);
                exit_code = 2;
            }
        }

        report["timing_ms"] = {{"total", wall()}, {"reverse", extraction.elapsed_ms}, {"forward", forward_ms}};
        report["invocations"] = {{"total", s.oracle.invocation_count()},
                                 {"reverse", extraction.invocations},
                                 {"forward", inv_forward}};

        // --- session artifacts ---
        write_file(session_dir + "/journal.jsonl", journal.to_jsonl());
        fs::create_directories(session_dir + "/prompts");
        int round = 0;
        for (const auto& rec : journal.records()) {
            if (rec.value("t", "") != "prompt_round") continue;
            ++round;
            write_file(session_dir + "/prompts/round" + std::to_string(round) + "_prompt.txt",
                       rec.value("prompt", ""));
            write_file(session_dir + "/prompts/round" + std::to_string(round) + "_reply.txt",
                       rec.value("reply", ""));
        }
        write_file(session_dir + "/report.json", report.dump(2) + "\n");
        std::cout << "session: " << session_dir << "\n"
                  << "outcome: " << how << " (exit " << exit_code << ")\n";
        return exit_code;
    } catch (const ScopeError& e) {
        std::cerr << "scope error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return session_dir.empty() ? 3 : 1;
    }
}

int run_check(const PipelineConfig& cfg, const std::string& sql_path) {
    try {
        LoadedSession s = load_session(cfg);
        Query q = parse_sql(read_file(sql_path));
        GenProfile profile = profile_from_config(cfg);
        tune_profile_to_instance(profile, s.instance);
        CheckVerdict verdict = result_equivalent(s.oracle, q, s.catalog, profile,
                                                 cfg.checker_trials, cfg.checker_seed);
        if (verdict.pass) {
            std::cout << "equivalent over " << verdict.trials_run << " randomized trials\n";
            return 0;
        }
        std::cout << "counterexample at seed " << verdict.counterexample_seed << "\n";
        for (const auto& line : verdict.diff) std::cout << "  " << line << "\n";
        if (!verdict.error.empty()) std::cout << "  " << verdict.error << "\n";
        dump_counterexample(cfg.out_dir + "/counterexample", s.oracle, q, s.catalog, profile,
                            verdict.counterexample_seed);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run_replay(const PipelineConfig& cfg, const std::string& session_dir) {
    try {
        LoadedSession s = load_session(cfg);
        Journal journal = Journal::from_jsonl(read_file(session_dir + "/journal.jsonl"));
        std::map<long long, UndoToken> tokens;
        long long checked = 0, mismatches = 0;
        for (const auto& rec : journal.records()) {
            std::string type = rec.value("t", "");
            if (type == "mutation") {
                std::string op = rec.value("op", "");
                if (op == "void") {
                    std::set<std::string> ts;
                    for (const auto& t : rec.at("tables")) ts.insert(t.get<std::string>());
                    tokens[rec.at("seq").get<long long>()] = s.instance.void_tables(ts);
                } else if (op == "rename") {
                    tokens[rec.at("seq").get<long long>()] = s.instance.rename_table(
                        rec.at("table").get<std::string>(), rec.at("dummy").get<std::string>());
                } else if (op == "set") {
                    tokens[rec.at("seq").get<long long>()] = s.instance.set_cell(
                        rec.at("table").get<std::string>(), rec.at("row").get<long long>(),
                        rec.at("column").get<std::string>(), value_from_json(rec.at("value")));
                } else if (op == "delete") {
                    std::vector<long long> ids;
                    for (const auto& id : rec.at("rows")) ids.push_back(id.get<long long>());
                    tokens[rec.at("seq").get<long long>()] =
                        s.instance.delete_rows(rec.at("table").get<std::string>(), ids);
                } else if (op == "insert") {
                    std::vector<Row> rows;
                    for (const auto& jr : rec.at("values")) {
                        Row r;
                        for (const auto& jv : jr) r.push_back(value_from_json(jv));
                        rows.push_back(std::move(r));
                    }
                    tokens[rec.at("seq").get<long long>()] =
                        s.instance.insert_rows(rec.at("table").get<std::string>(), rows);
                } else if (op == "undo") {
                    s.instance.undo(UndoToken{rec.at("seq").get<long long>()});
                } else if (op == "undo_after") {
                    s.instance.undo_all_after(UndoToken{rec.at("seq").get<long long>()});
                }
            } else if (type == "invoke") {
                InvokeOutcome out = s.oracle.invoke(s.instance);
                std::string digest =
                    out.ok() ? out.result->digest() : ("err:" + out.error->message);
                ++checked;
                if (digest != rec.value("result", "")) ++mismatches;
            }
        }
        std::cout << "replayed " << checked << " invocations, " << mismatches << " mismatches\n";
        return mismatches == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run_gen_db(const PipelineConfig& cfg, uint64_t seed, const std::string& out_dir) {
    try {
        SchemaCatalog catalog = parse_ddl(read_file(cfg.schema_ddl));
        if (!cfg.schema_domains.empty())
            apply_domain_sidecar(catalog, read_file(cfg.schema_domains));
        DatabaseState db = gen_random_db(catalog, seed, profile_from_config(cfg));
        db.dump_csv_dir(out_dir);
        std::cout << "instance written to " << out_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run_corpus(const PipelineConfig& cfg, const std::string& corpus_dir) {
    try {
        SchemaCatalog catalog = parse_ddl(read_file(cfg.schema_ddl));
        if (!cfg.schema_domains.empty())
            apply_domain_sidecar(catalog, read_file(cfg.schema_domains));
        DatabaseState base(catalog);
        base.load_csv_dir(cfg.data_dir, true);

        std::vector<fs::path> cases;
        for (const auto& entry : fs::directory_iterator(corpus_dir))
            if (entry.path().extension() == ".sql") cases.push_back(entry.path());
        std::sort(cases.begin(), cases.end());

        int failures = 0;
        std::cout << "case                          seed==hidden   invocations\n";
        for (const auto& path : cases) {
            DatabaseState db = base.clone();
            Oracle oracle = Oracle::embedded(parse_sql(read_file(path.string())));
            Mutator m(db, nullptr);
            std::string verdict;
            long long inv = 0;
            try {
                ResultSet hidden = *oracle.invoke(db).result;
                SeedResult extraction = run_seed_extraction(m, oracle);
                ResultSet seeded = execute(extraction.seed, db);
                bool match = query_has_order_by(extraction.seed) ? ordered_equal(seeded, hidden)
                                                          : multiset_equal(seeded, hidden);
                verdict = match ? "PASS" : "FAIL";
                if (!match) ++failures;
                inv = oracle.invocation_count();
            } catch (const std::exception& e) {
                verdict = std::string("ERROR ") + e.what();
                ++failures;
            }
            std::string name = path.stem().string();
            name.resize(30, ' ');
            std::cout << name << verdict << "          " << inv << "\n";
        }
        return failures == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace hqe
