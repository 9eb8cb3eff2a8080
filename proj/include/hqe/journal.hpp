#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hqe/value.hpp"

namespace hqe {

// Append-only session log: every database mutation, every oracle
// invocation (digests only), every prompt round.  Serialized as JSON
// Lines; `replay` reconstructs result digests from it.
class Journal {
  public:
    void add(nlohmann::json rec) { records_.push_back(std::move(rec)); }
    const std::vector<nlohmann::json>& records() const { return records_; }

    long long count_type(const std::string& type) const {
        long long n = 0;
        for (const auto& r : records_)
            if (r.value("t", "") == type) ++n;
        return n;
    }

    std::string to_jsonl() const {
        std::string out;
        for (const auto& r : records_) out += r.dump() + "\n";
        return out;
    }

    static Journal from_jsonl(const std::string& text);

  private:
    std::vector<nlohmann::json> records_;
};

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace hqe
