#pragma once

#include <cstdint>
#include <string>

#include "hqe/checker.hpp"
#include "hqe/combinatorial.hpp"
#include "hqe/seed.hpp"
#include "hqe/synth.hpp"

namespace hqe {

// Everything a session needs, resolvable from the TOML config plus
// command-line overrides.
struct PipelineConfig {
    // [schema]
    std::string schema_ddl;      // path to CREATE TABLE file
    std::string schema_domains;  // optional JSON sidecar
    // [data]
    std::string data_dir;
    // [oracle]
    std::string oracle_mode = "embedded";  // embedded | external
    std::string oracle_hidden_sql;         // embedded backend input
    std::string oracle_cmd;                // external backend command
    int oracle_timeout_ms = 60000;
    // [llm]
    std::string llm_mode = "mock";  // mock | http
    std::string llm_transcript;     // mock transcript (JSON Lines)
    std::string llm_endpoint;
    std::string llm_model = "gpt-4o";
    std::string llm_api_key_env = "HQE_LLM_API_KEY";
    std::string description_path;  // business description text
    // [limits]
    int max_trials = 6;
    long long max_candidates = 10000;
    int max_in_literals = 16;
    int max_aux_tables = 12;
    // [checker]
    int checker_trials = 30;
    uint64_t checker_seed = 1;
    int checker_rows = 8;
    long long checker_band_span = 60;

    std::string out_dir = ".";
};

struct LoadedSession {
    SchemaCatalog catalog;
    DatabaseState instance;
    Oracle oracle;
    std::string description;
};

LoadedSession load_session(const PipelineConfig& cfg);
GenProfile profile_from_config(const PipelineConfig& cfg);

// TOML subset: [section] headers, key = value with quoted strings,
// integers and booleans, # comments.
void apply_config_file(PipelineConfig& cfg, const std::string& path);

// exit codes: 0 success, 1 extraction failure, 2 checker counterexample,
// 3 configuration/scope error
int run_extract(const PipelineConfig& cfg, bool seed_only, std::string* session_dir_out = nullptr);
int run_check(const PipelineConfig& cfg, const std::string& sql_path);
int run_replay(const PipelineConfig& cfg, const std::string& session_dir);
int run_gen_db(const PipelineConfig& cfg, uint64_t seed, const std::string& out_dir);
int run_corpus(const PipelineConfig& cfg, const std::string& corpus_dir);

}  // namespace hqe
