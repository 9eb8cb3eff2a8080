#include <iostream>

#include "CLI11.hpp"

#include "hqe/pipeline.hpp"

// Hidden-query extraction driver.  Subcommands:
//   extract    full pipeline: seed, synthesis, equivalence check
//   seed-only  stop after the reverse-engineered seed query
//   check      result-equivalence of a given SQL file vs the oracle
//   replay     re-execute a session journal and compare digests
//   gen-db     write a randomized instance as CSVs
//   corpus     run every .sql in a directory and tabulate outcomes
//
// The config file is read first; command-line flags override it.
int main(int argc, char** argv) {
    // pre-scan for --config so flags can override file values
    hqe::PipelineConfig cfg;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                hqe::apply_config_file(cfg, argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 3;
            }
        }
    }

    CLI::App app{"hidden query extraction engine"};
    app.require_subcommand(1);

    std::string config_path, sql_path, session_dir, out_dir = "generated-db", corpus_dir;
    uint64_t gen_seed = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "TOML config file (read before flags)");
        cmd->add_option("--schema-ddl", cfg.schema_ddl, "CREATE TABLE file");
        cmd->add_option("--schema-domains", cfg.schema_domains, "domain sidecar JSON");
        cmd->add_option("--data-dir", cfg.data_dir, "CSV directory of the initial instance");
        cmd->add_option("--oracle-mode", cfg.oracle_mode, "embedded | external");
        cmd->add_option("--hidden-sql", cfg.oracle_hidden_sql, "sealed query (embedded backend)");
        cmd->add_option("--oracle-cmd", cfg.oracle_cmd, "external executable command");
        cmd->add_option("--oracle-timeout-ms", cfg.oracle_timeout_ms, "external request budget");
        cmd->add_option("--llm-mode", cfg.llm_mode, "mock | http");
        cmd->add_option("--mock-transcript", cfg.llm_transcript, "scripted replies (JSON Lines)");
        cmd->add_option("--llm-endpoint", cfg.llm_endpoint, "chat-completion URL");
        cmd->add_option("--llm-model", cfg.llm_model, "model name");
        cmd->add_option("--llm-api-key-env", cfg.llm_api_key_env, "env var holding the API key");
        cmd->add_option("--description", cfg.description_path, "business description file");
        cmd->add_option("--max-trials", cfg.max_trials, "result-correction rounds before fallback");
        cmd->add_option("--max-candidates", cfg.max_candidates, "combinatorial cap");
        cmd->add_option("--max-in-literals", cfg.max_in_literals, "IN-list budget");
        cmd->add_option("--max-aux-tables", cfg.max_aux_tables, "power-set guard");
        cmd->add_option("--checker-trials", cfg.checker_trials, "randomized trials");
        cmd->add_option("--seed", cfg.checker_seed, "checker base seed");
        cmd->add_option("--checker-rows", cfg.checker_rows, "rows per generated table");
        cmd->add_option("--out-dir", cfg.out_dir, "session output directory");
    };

    CLI::App* extract = app.add_subcommand("extract", "run the full extraction pipeline");
    add_common(extract);
    CLI::App* seed_only = app.add_subcommand("seed-only", "stop after the seed query");
    add_common(seed_only);
    CLI::App* check = app.add_subcommand("check", "result-equivalence of a SQL file");
    add_common(check);
    check->add_option("--sql", sql_path, "query to check")->required();
    CLI::App* replay = app.add_subcommand("replay", "re-execute a session journal");
    add_common(replay);
    replay->add_option("--session", session_dir, "session directory")->required();
    CLI::App* gen = app.add_subcommand("gen-db", "write a randomized instance");
    add_common(gen);
    gen->add_option("--gen-seed", gen_seed, "instance seed");
    gen->add_option("--out", out_dir, "target directory");
    CLI::App* corpus = app.add_subcommand("corpus", "run every .sql in a directory");
    add_common(corpus);
    corpus->add_option("--dir", corpus_dir, "corpus directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (extract->parsed()) return hqe::run_extract(cfg, false);
    if (seed_only->parsed()) return hqe::run_extract(cfg, true);
    if (check->parsed()) return hqe::run_check(cfg, sql_path);
    if (replay->parsed()) return hqe::run_replay(cfg, session_dir);
    if (gen->parsed()) return hqe::run_gen_db(cfg, gen_seed, out_dir);
    if (corpus->parsed()) return hqe::run_corpus(cfg, corpus_dir);
    return 3;
}
