#include "helios/prompt_cache.hpp"

#include <stdexcept>

#include <json.hpp>

#include "helios/workflow_io.hpp"

namespace helios {

PromptCache::PromptCache(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::runtime_error("prompt cache capacity must be positive");
}

const TokenSeq* PromptCache::lookup(Signature s) {
    auto it = index_.find(s);
    if (it == index_.end()) return nullptr;
    entries_.splice(entries_.end(), entries_, it->second);  // move to most-recent
    return &it->second->second;
}

void PromptCache::insert(Signature s, TokenSeq value) {
    auto it = index_.find(s);
    if (it != index_.end()) {
        it->second->second = std::move(value);
        entries_.splice(entries_.end(), entries_, it->second);
        return;
    }
    entries_.emplace_back(s, std::move(value));
    index_[s] = std::prev(entries_.end());
    while (entries_.size() > capacity_) {
        index_.erase(entries_.front().first);
        entries_.pop_front();
    }
}

std::vector<Signature> PromptCache::keys_lru_first() const {
    std::vector<Signature> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.first);
    return out;
}

std::string PromptCache::serialize() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const Entry& e : entries_)
        entries.push_back(nlohmann::json{{"sig", sig_hex(e.first)}, {"tokens", e.second}});
    nlohmann::json j{{"capacity", capacity_}, {"entries", std::move(entries)}};
    return j.dump(2) + "\n";
}

PromptCache PromptCache::deserialize(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("prompt cache json: ") + e.what());
    }
    PromptCache c(j.at("capacity").get<std::size_t>());
    for (const nlohmann::json& je : j.at("entries"))
        c.insert(sig_from_hex(je.at("sig").get<std::string>()), je.at("tokens").get<TokenSeq>());
    return c;
}

void PromptCache::save(const std::string& path) const { write_file(path, serialize()); }

PromptCache PromptCache::load(const std::string& path) {
    return deserialize(read_file(path));
}

}  // namespace helios
