#include "hqe/checker.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include "hqe/printer.hpp"
#include "hqe/util.hpp"

namespace hqe {

namespace {

// Topological order over FK dependencies so parents are populated first.
std::vector<const TableSchema*> topo_tables(const SchemaCatalog& catalog) {
    std::vector<const TableSchema*> out;
    std::set<std::string> done;
    while (out.size() < catalog.tables.size()) {
        bool progressed = false;
        for (const auto& t : catalog.tables) {
            if (done.count(t.name)) continue;
            bool ready = true;
            for (const auto& fk : t.foreign_keys)
                if (fk.ref_table != t.name && !done.count(fk.ref_table)) ready = false;
            if (!ready) continue;
            out.push_back(&t);
            done.insert(t.name);
            progressed = true;
        }
        if (!progressed) throw SchemaError("cyclic foreign-key topology");
    }
    return out;
}

struct ColumnSampler {
    std::mt19937_64& rng;
    const GenProfile& profile;

    Value sample(const std::string& table, const ColumnDef& col,
                 const std::vector<Value>& column_history) {
        // repeat an earlier value sometimes so equality predicates and
        // self-joins can be satisfied
        if (!column_history.empty() &&
            std::uniform_real_distribution<double>(0, 1)(rng) < profile.same_value_bias)
            return column_history[rng() % column_history.size()];
        const AttrDomain& dom = col.domain;
        auto key = table + "." + col.name;
        auto anchors = profile.column_anchors.find(key);
        if (anchors != profile.column_anchors.end() && !anchors->second.empty() &&
            std::uniform_real_distribution<double>(0, 1)(rng) < profile.anchor_bias)
            return anchors->second[rng() % anchors->second.size()];
        if (dom.kind == DomainKind::TextFree) {
            std::string s;
            for (int w = 0; w < profile.text_words; ++w) {
                if (w) s += " ";
                s += profile.text_vocab[rng() % profile.text_vocab.size()];
            }
            return s;
        }
        if (dom.kind == DomainKind::TextCategorical)
            return dom.enum_values[rng() % dom.enum_values.size()];
        long long lo = 0, hi = dom.grid_size() - 1;
        auto band = profile.column_bands.find(key);
        if (band != profile.column_bands.end()) {
            lo = dom.index_of(band->second.first);
            hi = dom.index_of(band->second.second);
        } else {
            long long mid = hi / 2;
            long long span = std::min(profile.band_span, hi);
            lo = std::max(0LL, mid - span / 2);
            hi = std::min(dom.grid_size() - 1, mid + span / 2);
        }
        return dom.value_at(lo + static_cast<long long>(rng() % static_cast<uint64_t>(hi - lo + 1)));
    }
};

}  // namespace

DatabaseState gen_random_db(const SchemaCatalog& catalog, uint64_t seed, const GenProfile& profile) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    DatabaseState db(catalog);
    ColumnSampler sampler{rng, profile};

    std::map<std::string, std::vector<Value>> pk_pool;  // "table.column" -> generated keys

    for (const TableSchema* t : topo_tables(catalog)) {
        int rows = profile.default_rows;
        auto it = profile.rows_per_table.find(t->name);
        if (it != profile.rows_per_table.end()) rows = it->second;

        std::set<std::string> pk_cols(t->primary_key.begin(), t->primary_key.end());
        std::map<std::string, std::pair<std::string, std::string>> fk_of;  // col -> (table, col)
        for (const auto& fk : t->foreign_keys)
            for (size_t i = 0; i < fk.columns.size(); ++i)
                fk_of[fk.columns[i]] = {fk.ref_table, fk.ref_columns[i]};

        std::set<std::string> seen_pk_tuples;
        std::map<std::string, std::vector<Value>> history;
        int attempts = 0;
        for (int r = 0; r < rows && attempts < rows * 20;) {
            ++attempts;
            Row row;
            row.reserve(t->columns.size());
            std::string pk_tuple;
            long long pk_counter_base = static_cast<long long>(r) + 1;
            for (const auto& col : t->columns) {
                Value v;
                auto fk = fk_of.find(col.name);
                if (fk != fk_of.end()) {
                    const auto& pool = pk_pool[fk->second.first + "." + fk->second.second];
                    if (pool.empty())
                        throw SchemaError("foreign key target has no rows: " + fk->second.first);
                    v = pool[rng() % pool.size()];
                } else if (pk_cols.count(col.name) && col.domain.kind == DomainKind::Integer &&
                           col.domain.grid_size() * 3 / 4 > static_cast<long long>(rows) * 7 + 5) {
                    // ascending keys with random gaps keep them unique;
                    // tight domains fall through to rejection sampling
                    long long base = std::get<long long>(col.domain.i_min);
                    long long lo_off = col.domain.grid_size() / 4;
                    v = base + lo_off + pk_counter_base * 7 + static_cast<long long>(rng() % 5);
                } else {
                    v = sampler.sample(t->name, col, history[col.name]);
                }
                if (pk_cols.count(col.name)) pk_tuple += canonical_text(v) + "\x1f";
                row.push_back(std::move(v));
            }
            if (!pk_cols.empty() && !seen_pk_tuples.insert(pk_tuple).second) continue;  // retry
            for (size_t c = 0; c < t->columns.size(); ++c)
                history[t->columns[c].name].push_back(row[c]);
            db.insert_row(t->name, row);
            for (const auto& col : t->columns)
                if (pk_cols.count(col.name))
                    pk_pool[t->name + "." + col.name].push_back(
                        row[static_cast<size_t>(t->column_index(col.name))]);
            ++r;
        }
    }
    db.assert_null_free();
    return db;
}

void tune_profile_to_instance(GenProfile& profile, const DatabaseState& instance) {
    const SchemaCatalog& catalog = instance.catalog();
    std::set<std::string> words;
    for (const auto& t : catalog.tables) {
        for (size_t ci = 0; ci < t.columns.size(); ++ci) {
            const ColumnDef& col = t.columns[ci];
            std::string key = t.name + "." + col.name;
            if (col.domain.kind == DomainKind::TextFree) {
                for (const auto& sr : instance.rows(t.name)) {
                    const auto* s = std::get_if<std::string>(&sr.values[ci]);
                    if (!s) continue;
                    size_t start = 0;
                    while (start < s->size() && words.size() < 60) {
                        size_t sp = s->find(' ', start);
                        std::string w = s->substr(start, sp == std::string::npos ? sp : sp - start);
                        if (w.size() >= 3) words.insert(w);
                        if (sp == std::string::npos) break;
                        start = sp + 1;
                    }
                }
                continue;
            }
            if (!col.domain.ordered() || col.domain.kind == DomainKind::TextCategorical) continue;
            if (profile.column_bands.count(key)) continue;
            bool any = false;
            long long lo = 0, hi = 0;
            for (const auto& sr : instance.rows(t.name)) {
                long long ord = col.domain.index_of(sr.values[ci]);
                if (!any) { lo = hi = ord; any = true; }
                lo = std::min(lo, ord);
                hi = std::max(hi, ord);
            }
            if (!any) continue;
            long long margin = std::max((hi - lo) / 4, 2LL);
            lo = std::max(0LL, lo - margin);
            hi = std::min(col.domain.grid_size() - 1, hi + margin);
            profile.column_bands[key] = {col.domain.value_at(lo), col.domain.value_at(hi)};
        }
    }
    if (!words.empty()) {
        profile.text_vocab.assign(words.begin(), words.end());
        std::sort(profile.text_vocab.begin(), profile.text_vocab.end());
    }
}

namespace {

void harvest_literal(const std::string& column, const Value& v, const SchemaCatalog& catalog,
                     GenProfile& profile) {
    for (const auto& t : catalog.tables) {
        int ci = t.column_index(column);
        if (ci < 0) continue;
        const AttrDomain& dom = t.columns[static_cast<size_t>(ci)].domain;
        auto& pool = profile.column_anchors[t.name + "." + column];
        auto push = [&](const Value& x) {
            if (dom.contains(x)) pool.push_back(x);
        };
        push(v);
        if (dom.ordered() && dom.kind != DomainKind::TextCategorical && dom.contains(v)) {
            long long ord = dom.index_of(v);
            if (ord > 0) push(dom.value_at(ord - 1));
            if (ord + 1 < dom.grid_size()) push(dom.value_at(ord + 1));
        }
    }
}

void harvest_pred(const Pred& p, const SchemaCatalog& catalog, GenProfile& profile);

void harvest_block(const QueryBlock& b, const SchemaCatalog& catalog, GenProfile& profile) {
    if (b.where) harvest_pred(*b.where, catalog, profile);
    for (const auto& f : b.from) {
        if (f.join_cond) harvest_pred(*f.join_cond, catalog, profile);
        if (f.derived)
            for (const auto& ib : f.derived->branches) harvest_block(ib, catalog, profile);
    }
}

void harvest_pred(const Pred& p, const SchemaCatalog& catalog, GenProfile& profile) {
    for (const auto& c : p.children) harvest_pred(c, catalog, profile);
    if (p.kind == Pred::Cmp) {
        if (p.lhs.kind == Expr::Column && p.rhs.kind == Expr::Literal)
            harvest_literal(p.lhs.column.column, p.rhs.literal, catalog, profile);
        if (p.rhs.kind == Expr::Column && p.lhs.kind == Expr::Literal)
            harvest_literal(p.rhs.column.column, p.lhs.literal, catalog, profile);
    }
    if (p.kind == Pred::InList)
        for (const auto& v : p.in_values) harvest_literal(p.col.column, v, catalog, profile);
    if (p.subquery)
        for (const auto& b : p.subquery->branches) harvest_block(b, catalog, profile);
}

}  // namespace

void anchor_profile_to_query(GenProfile& profile, const Query& q, const SchemaCatalog& catalog) {
    for (const auto& b : q.branches) harvest_block(b, catalog, profile);
}

CheckVerdict result_equivalent(Oracle& oracle, const Query& extracted, const SchemaCatalog& catalog,
                               const GenProfile& profile, int trials, uint64_t seed) {
    CheckVerdict verdict;
    GenProfile anchored = profile;
    anchor_profile_to_query(anchored, extracted, catalog);
    bool ordered = query_has_order_by(extracted);
    for (int k = 0; k < trials; ++k) {
        uint64_t trial_seed = seed + static_cast<uint64_t>(k) * 1000003ULL;
        DatabaseState db = gen_random_db(catalog, trial_seed, anchored);
        ++verdict.trials_run;
        InvokeOutcome hidden = oracle.invoke(db);
        if (!hidden.ok()) {
            verdict.pass = false;
            verdict.error = "oracle failed on trial " + std::to_string(k) + ": " +
                            hidden.error->message;
            verdict.counterexample_seed = trial_seed;
            return verdict;
        }
        ResultSet mine;
        try {
            mine = execute(extracted, db);
        } catch (const std::exception& e) {
            verdict.pass = false;
            verdict.error = std::string("extracted query failed: ") + e.what();
            verdict.counterexample_seed = trial_seed;
            return verdict;
        }
        bool equal = ordered ? ordered_equal(mine, *hidden.result)
                             : multiset_equal(mine, *hidden.result);
        if (!equal) {
            verdict.pass = false;
            verdict.counterexample_seed = trial_seed;
            verdict.diff = bag_diff(*hidden.result, mine);
            if (verdict.diff.empty()) verdict.diff.push_back("(row order differs)");
            return verdict;
        }
    }
    return verdict;
}

void dump_counterexample(const std::string& dir, Oracle& oracle, const Query& extracted,
                         const SchemaCatalog& catalog, const GenProfile& profile,
                         uint64_t counterexample_seed) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    GenProfile anchored = profile;
    anchor_profile_to_query(anchored, extracted, catalog);
    DatabaseState db = gen_random_db(catalog, counterexample_seed, anchored);
    db.dump_csv_dir((fs::path(dir) / "instance").string());
    InvokeOutcome hidden = oracle.invoke(db);
    if (hidden.ok()) write_file((fs::path(dir) / "hidden_result.csv").string(), hidden.result->to_csv());
    try {
        ResultSet mine = execute(extracted, db);
        write_file((fs::path(dir) / "extracted_result.csv").string(), mine.to_csv());
        if (hidden.ok()) {
            std::string diff_text;
            for (const auto& line : bag_diff(*hidden.result, mine)) diff_text += line + "\n";
            write_file((fs::path(dir) / "diff.txt").string(), diff_text);
        }
    } catch (const std::exception& e) {
        write_file((fs::path(dir) / "extracted_result.csv").string(),
                   std::string("error: ") + e.what() + "\n");
    }
    write_file((fs::path(dir) / "seed.txt").string(), std::to_string(counterexample_seed) + "\n");
}

}  // namespace hqe
