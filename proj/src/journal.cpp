#include "hqe/journal.hpp"

#include <sstream>

namespace hqe {

Journal Journal::from_jsonl(const std::string& text) {
    Journal j;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        j.add(nlohmann::json::parse(line));
    }
    return j;
}

nlohmann::json value_to_json(const Value& v) {
    if (is_null(v)) return nlohmann::json{{"k", "null"}};
    if (const auto* i = std::get_if<long long>(&v)) return {{"k", "int"}, {"v", *i}};
    if (const auto* d = std::get_if<Decimal>(&v))
        return {{"k", "dec"}, {"u", d->unscaled}, {"s", d->scale}};
    if (const auto* dt = std::get_if<Date>(&v)) return {{"k", "date"}, {"v", dt->to_string()}};
    return {{"k", "text"}, {"v", std::get<std::string>(v)}};
}

Value value_from_json(const nlohmann::json& j) {
    std::string k = j.at("k").get<std::string>();
    if (k == "null") return std::monostate{};
    if (k == "int") return j.at("v").get<long long>();
    if (k == "dec") return Decimal{j.at("u").get<long long>(), j.at("s").get<int>()};
    if (k == "date") {
        auto d = Date::parse(j.at("v").get<std::string>());
        if (!d) throw std::runtime_error("bad date in journal: " + j.dump());
        return *d;
    }
    return j.at("v").get<std::string>();
}

}  // namespace hqe
