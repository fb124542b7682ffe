#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "helios/cost_model.hpp"
#include "helios/evaluator.hpp"
#include "helios/trt.hpp"
#include "helios/workflow.hpp"

namespace helios {

// Paged kv store of one worker: a radix tree over fixed-size token blocks.
// Nodes can be pinned (never evicted) or held by in-flight calls (evictions
// skip them until released). Eviction is LRU over childless, unpinned, unheld
// blocks; when nothing is evictable, inserts store what fits and stop.
class KvCache {
  public:
    KvCache(std::size_t capacity_tokens, std::size_t block_tokens);

    std::size_t capacity() const { return capacity_; }
    std::size_t block() const { return block_; }
    std::size_t used_tokens() const { return used_; }
    std::size_t pinned_tokens() const { return pinned_; }
    std::uint64_t evicted_tokens() const { return evicted_; }

    // Tokens of the longest cached block-aligned prefix of seq. hold != 0
    // protects the matched path until release(hold).
    std::size_t lookup(const TokenSeq& seq, std::uint64_t hold = 0);

    // Store blocks covering seq[0, floor(len/block)*block). Existing blocks are
    // refreshed (and optionally pinned); missing ones are allocated, evicting
    // as needed. Returns the number of newly stored tokens.
    std::size_t insert(const TokenSeq& seq, std::size_t len, bool pinned, std::uint64_t hold = 0);

    void release(std::uint64_t hold);

  private:
    struct Node {
        int parent = -1;
        std::map<TokenSeq, int> kids;  // key: the child's block tokens
        bool pinned = false;
        int holds = 0;
        std::uint64_t last_use = 0;
        bool free = false;
    };

    int walk_or_create(int parent, const TokenSeq& key, bool create, bool& created);
    bool evict_one();
    void touch(int idx) { nodes_[static_cast<std::size_t>(idx)].last_use = ++clock_; }

    std::size_t capacity_ = 0;
    std::size_t block_ = 0;
    std::size_t used_ = 0;
    std::size_t pinned_ = 0;
    std::uint64_t evicted_ = 0;
    std::uint64_t clock_ = 0;
    std::vector<Node> nodes_;  // 0 = root sentinel
    std::vector<int> free_;
    std::map<std::uint64_t, std::vector<int>> holds_;
};

// Block-floored static prompt prefixes worth keeping resident on `worker`:
// shared by at least two of its scheduled calls, at least `threshold` tokens
// after flooring, chosen longest-first within `budget_tokens` of unique blocks.
std::vector<TokenSeq> static_pin_prefixes(const TemplatedRadixTree& call_tree,
                                          const Schedule& sigma, int worker, std::size_t block,
                                          std::size_t threshold, std::size_t budget_tokens);

struct SimWorkerConfig {
    std::size_t capacity = 4096;     // kv tokens
    std::size_t block = 16;          // kv block size in tokens
    std::size_t prefill_budget = 0;  // prefill tokens per iteration; 0 = capacity/8
};

struct SimConfig {
    std::vector<SimWorkerConfig> workers;
    bool proactive_pin = true;
    std::size_t pin_threshold = 200;     // min pinned prefix length in tokens
    double pin_capacity_frac = 0.5;      // pinning may claim at most this share
    std::uint64_t seed = 0;
    bool stochastic = false;
    bool collect_trace = false;
    std::uint64_t max_iterations = 0;    // 0 = 10M guard
};

struct SimIterRow {
    std::uint64_t iter = 0;
    int worker = 0;
    int active = 0;
    std::size_t admitted = 0;
    std::size_t prefill_tokens = 0;
    std::size_t decode_tokens = 0;
};

struct SimCallRow {
    CallId call;
    int worker = 0;
    std::uint64_t admitted_iter = 0;
    std::uint64_t prefill_done_iter = 0;
    std::uint64_t completed_iter = 0;
    std::size_t prompt_tokens = 0;
    std::size_t cached_tokens = 0;
    std::size_t output_tokens = 0;
};

struct SimMetrics {
    std::uint64_t iterations = 0;
    std::size_t prompt_tokens = 0;
    std::size_t cache_served_tokens = 0;
    std::size_t prefill_computed_tokens = 0;
    std::size_t decode_tokens = 0;
    double hit_rate_pct = 0;
    std::vector<std::size_t> pinned_tokens;     // per worker, after pin planning
    std::vector<std::uint64_t> evicted_tokens;  // per worker, end of run
    std::vector<SimCallRow> calls;              // admission order
    std::vector<SimIterRow> trace;              // per (iteration, worker) when enabled
    std::map<NodeId, std::vector<TokenSeq>> outputs;
};

// Iteration-level replay of a schedule on block-granular kv caches. Each
// iteration every worker admits dependency-ready calls in schedule order while
// its prefill backlog is under budget, prefills up to the budget in chunks,
// then decodes one token per running call. Outputs are synthesized on
// completion and fed onward, so downstream prompts see real bytes. All feeding
// is deterministic for a fixed config.
SimMetrics simulate(const CompiledGraph& compiled, const ProfileStats& profile,
                    const TemplatedRadixTree& call_tree, const Schedule& sigma,
                    const SimConfig& cfg);

std::string sim_metrics_json(const SimMetrics& m);
std::string sim_calls_csv(const SimMetrics& m);
std::string sim_trace_csv(const SimMetrics& m);

}  // namespace helios
