#pragma once

#include <list>
#include <string>
#include <unordered_map>
#include <vector>

#include "helios/signature.hpp"

namespace helios {

// LRU map from operator signature to the token sequence that operator produced.
// Survives across submissions via serialize()/deserialize(); the file keeps
// entries in recency order so a round trip is exact.
class PromptCache {
  public:
    explicit PromptCache(std::size_t capacity = 4096);

    bool contains(Signature s) const { return index_.count(s) != 0; }
    // nullptr on miss; a hit refreshes recency.
    const TokenSeq* lookup(Signature s);
    // Insert or overwrite; either way the entry becomes most recent. Evicts the
    // least recently used entry when over capacity.
    void insert(Signature s, TokenSeq value);

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::vector<Signature> keys_lru_first() const;

    std::string serialize() const;
    static PromptCache deserialize(const std::string& json_text);
    void save(const std::string& path) const;
    static PromptCache load(const std::string& path);

  private:
    using Entry = std::pair<Signature, TokenSeq>;
    std::size_t capacity_;
    std::list<Entry> entries_;  // front = least recent, back = most recent
    std::unordered_map<Signature, std::list<Entry>::iterator> index_;
};

}  // namespace helios
