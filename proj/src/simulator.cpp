#include "helios/simulator.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace helios {

// --- KvCache ---------------------------------------------------------------

KvCache::KvCache(std::size_t capacity_tokens, std::size_t block_tokens)
    : capacity_(capacity_tokens), block_(block_tokens) {
    if (block_ == 0) throw std::runtime_error("kv block size must be positive");
    if (capacity_ < block_) throw std::runtime_error("kv capacity below one block");
    nodes_.push_back(Node{});  // root sentinel, never evicted
}

int KvCache::walk_or_create(int parent, const TokenSeq& key, bool create, bool& created) {
    created = false;
    Node& p = nodes_[static_cast<std::size_t>(parent)];
    auto it = p.kids.find(key);
    if (it != p.kids.end()) return it->second;
    if (!create) return -1;
    int idx;
    if (!free_.empty()) {
        idx = free_.back();
        free_.pop_back();
        nodes_[static_cast<std::size_t>(idx)] = Node{};
    } else {
        idx = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{});
    }
    nodes_[static_cast<std::size_t>(idx)].parent = parent;
    nodes_[static_cast<std::size_t>(parent)].kids.emplace(key, idx);
    created = true;
    return idx;
}

bool KvCache::evict_one() {
    int victim = -1;
    std::uint64_t best = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.free || n.pinned || n.holds > 0 || !n.kids.empty()) continue;
        if (victim < 0 || n.last_use < best) {
            victim = static_cast<int>(i);
            best = n.last_use;
        }
    }
    if (victim < 0) return false;
    Node& v = nodes_[static_cast<std::size_t>(victim)];
    Node& p = nodes_[static_cast<std::size_t>(v.parent)];
    for (auto it = p.kids.begin(); it != p.kids.end(); ++it) {
        if (it->second == victim) {
            p.kids.erase(it);
            break;
        }
    }
    v.free = true;
    free_.push_back(victim);
    used_ -= block_;
    evicted_ += block_;
    return true;
}

std::size_t KvCache::lookup(const TokenSeq& seq, std::uint64_t hold) {
    std::size_t matched = 0;
    int cur = 0;
    for (std::size_t off = 0; off + block_ <= seq.size(); off += block_) {
        TokenSeq key(seq.begin() + static_cast<std::ptrdiff_t>(off),
                     seq.begin() + static_cast<std::ptrdiff_t>(off + block_));
        bool created = false;
        int next = walk_or_create(cur, key, false, created);
        if (next < 0) break;
        touch(next);
        if (hold != 0) {
            nodes_[static_cast<std::size_t>(next)].holds++;
            holds_[hold].push_back(next);
        }
        matched += block_;
        cur = next;
    }
    return matched;
}

std::size_t KvCache::insert(const TokenSeq& seq, std::size_t len, bool pinned,
                            std::uint64_t hold) {
    len = std::min(len, seq.size());
    std::size_t stored = 0;
    int cur = 0;
    for (std::size_t off = 0; off + block_ <= len; off += block_) {
        TokenSeq key(seq.begin() + static_cast<std::ptrdiff_t>(off),
                     seq.begin() + static_cast<std::ptrdiff_t>(off + block_));
        bool created = false;
        int next = walk_or_create(cur, key, false, created);
        if (next < 0) {
            // Make room before allocating; if nothing is evictable, stop here.
            while (used_ + block_ > capacity_) {
                if (!evict_one()) return stored;
            }
            next = walk_or_create(cur, key, true, created);
            used_ += block_;
            stored += block_;
        }
        Node& n = nodes_[static_cast<std::size_t>(next)];
        if (pinned && !n.pinned) {
            n.pinned = true;
            pinned_ += block_;
        }
        touch(next);
        if (hold != 0) {
            n.holds++;
            holds_[hold].push_back(next);
        }
        cur = next;
    }
    return stored;
}

void KvCache::release(std::uint64_t hold) {
    auto it = holds_.find(hold);
    if (it == holds_.end()) return;
    for (int idx : it->second) nodes_[static_cast<std::size_t>(idx)].holds--;
    holds_.erase(it);
}

// --- pin planning ------------------------------------------------------------

std::vector<TokenSeq> static_pin_prefixes(const TemplatedRadixTree& call_tree,
                                          const Schedule& sigma, int worker, std::size_t block,
                                          std::size_t threshold, std::size_t budget_tokens) {
    if (block == 0) throw std::runtime_error("kv block size must be positive");
    std::map<CallId, int> place;
    for (std::size_t w = 0; w < sigma.size(); ++w)
        for (const CallId& c : sigma[w]) place[c] = static_cast<int>(w);

    // Leaves of this worker under each tree node.
    std::vector<int> cnt(call_tree.node_count(), 0);
    for (int lf : call_tree.leaves()) {
        const TrtLeaf& L = call_tree.node(lf).leaf;
        auto it = place.find(CallId{L.op, L.query});
        if (it == place.end() || it->second != worker) continue;
        for (int v = lf; v >= 0; v = call_tree.node(v).parent) ++cnt[static_cast<std::size_t>(v)];
    }

    std::vector<TokenSeq> cands;
    for (std::size_t i = 1; i < call_tree.node_count(); ++i) {
        if (cnt[i] < 2) continue;
        const TrtNode& n = call_tree.node(static_cast<int>(i));
        TokenSeq prefix;
        bool concrete = true;
        for (int anc : call_tree.path_from_root(n.parent)) {
            const Segment& seg = call_tree.node(anc).seg;
            if (!seg.all_static()) {
                concrete = false;
                break;
            }
            for (const SegmentPart& p : seg.parts)
                prefix.insert(prefix.end(), p.tokens.begin(), p.tokens.end());
        }
        if (!concrete) continue;
        for (const SegmentPart& p : n.seg.parts) {
            if (!p.is_static) break;
            prefix.insert(prefix.end(), p.tokens.begin(), p.tokens.end());
        }
        prefix.resize(prefix.size() - prefix.size() % block);  // whole blocks only
        if (prefix.size() < threshold || prefix.empty()) continue;
        cands.push_back(std::move(prefix));
    }

    std::sort(cands.begin(), cands.end(), [](const TokenSeq& a, const TokenSeq& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    // Longest-first under the budget, counting each distinct block once.
    std::set<TokenSeq> chosen_blocks;
    std::vector<TokenSeq> out;
    std::size_t total = 0;
    for (const TokenSeq& cand : cands) {
        std::size_t marginal = 0;
        for (std::size_t off = 0; off + block <= cand.size(); off += block) {
            TokenSeq key(cand.begin(),
                         cand.begin() + static_cast<std::ptrdiff_t>(off + block));
            if (!chosen_blocks.count(key)) marginal += block;
        }
        if (total + marginal > budget_tokens) continue;
        for (std::size_t off = 0; off + block <= cand.size(); off += block)
            chosen_blocks.insert(TokenSeq(
                cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(off + block)));
        total += marginal;
        out.push_back(cand);
    }
    return out;
}

// --- simulation --------------------------------------------------------------

namespace {

struct LiveCall {
    CallId id;
    int leaf = -1;
    TokenSeq prompt;
    std::size_t out_len = 0;
    std::size_t done = 0;  // prompt tokens already prefilled or served
    std::size_t decoded = 0;
    std::uint64_t hold = 0;
    std::uint64_t prefill_done_iter = 0;  // 0 = still prefilling
    std::size_t row = 0;                  // index into metrics.calls
    bool finished = false;

    std::size_t remaining() const { return prompt.size() - done; }
};

}  // namespace

SimMetrics simulate(const CompiledGraph& compiled, const ProfileStats& profile,
                    const TemplatedRadixTree& call_tree, const Schedule& sigma,
                    const SimConfig& cfg) {
    const std::size_t W = sigma.size();
    if (W == 0) throw std::runtime_error("simulate: no workers");
    if (cfg.workers.size() != W)
        throw std::runtime_error("simulate: worker config count does not match schedule");

    // Every call in the schedule must be a leaf, exactly once, and every leaf
    // must be scheduled.
    std::map<CallId, int> seen;
    std::size_t total = 0;
    for (const auto& wq : sigma) {
        for (const CallId& c : wq) {
            if (call_tree.leaf_index(c.op, c.query) < 0)
                throw std::runtime_error("simulate: scheduled call is not a tree leaf");
            if (seen.count(c)) throw std::runtime_error("simulate: call scheduled twice");
            seen[c] = 1;
            ++total;
        }
    }
    if (total != call_tree.leaves().size())
        throw std::runtime_error("simulate: schedule does not cover all calls");

    Evaluator ev(compiled, profile, EvalOptions{cfg.seed, cfg.stochastic, true});
    EvalOptions synth_opts{cfg.seed, cfg.stochastic, false};

    SimMetrics m;
    std::vector<KvCache> caches;
    std::vector<std::size_t> budgets(W, 0);
    for (std::size_t w = 0; w < W; ++w) {
        const SimWorkerConfig& wc = cfg.workers[w];
        caches.emplace_back(wc.capacity, wc.block);
        budgets[w] = wc.prefill_budget > 0 ? wc.prefill_budget
                                           : std::max<std::size_t>(wc.capacity / 8, wc.block);
        if (cfg.proactive_pin) {
            const std::size_t budget =
                static_cast<std::size_t>(cfg.pin_capacity_frac * static_cast<double>(wc.capacity));
            for (const TokenSeq& p : static_pin_prefixes(call_tree, sigma, static_cast<int>(w),
                                                         wc.block, cfg.pin_threshold, budget))
                caches[w].insert(p, p.size(), true);
        }
        m.pinned_tokens.push_back(caches[w].pinned_tokens());
    }

    std::vector<char> leaf_done(call_tree.node_count(), 0);
    auto ready = [&](int leaf) {
        for (int p : call_tree.node(leaf).preds)
            if (!leaf_done[static_cast<std::size_t>(p)]) return false;
        return true;
    };

    std::vector<std::vector<char>> admitted(W);
    for (std::size_t w = 0; w < W; ++w) admitted[w].assign(sigma[w].size(), 0);
    std::vector<std::vector<LiveCall>> live(W);
    std::vector<std::size_t> backlog(W, 0);

    const std::uint64_t guard = cfg.max_iterations > 0 ? cfg.max_iterations : 10'000'000ull;
    std::uint64_t holdc = 0;
    std::size_t completed = 0;
    std::uint64_t iter = 0;

    while (completed < total) {
        ++iter;
        if (iter > guard) throw std::runtime_error("simulate: iteration guard tripped");
        for (std::size_t w = 0; w < W; ++w) {
            KvCache& cache = caches[w];
            SimIterRow row;
            row.iter = iter;
            row.worker = static_cast<int>(w);

            // Admission: schedule order, skip dependency-blocked calls, stop
            // once the prefill backlog reaches the per-iteration budget.
            for (std::size_t qi = 0; qi < sigma[w].size(); ++qi) {
                if (admitted[w][qi]) continue;
                if (backlog[w] >= budgets[w]) break;
                const CallId call = sigma[w][qi];
                const int leaf = call_tree.leaf_index(call.op, call.query);
                if (!ready(leaf)) continue;
                admitted[w][qi] = 1;

                LiveCall lc;
                lc.id = call;
                lc.leaf = leaf;
                lc.prompt = ev.prompt(call.op, static_cast<std::size_t>(call.query));
                const Operator& op = compiled.graph.op(call.op);
                lc.out_len = synth_llm_len(lc.prompt, ev.profile_len_out(call.op),
                                           op.deterministic, synth_opts);
                lc.hold = ++holdc;
                lc.done = cache.lookup(lc.prompt, lc.hold);
                if (lc.remaining() == 0) lc.prefill_done_iter = iter;
                backlog[w] += lc.remaining();

                SimCallRow cr;
                cr.call = call;
                cr.worker = static_cast<int>(w);
                cr.admitted_iter = iter;
                cr.prompt_tokens = lc.prompt.size();
                cr.cached_tokens = lc.done;
                lc.row = m.calls.size();
                m.prompt_tokens += lc.prompt.size();
                m.cache_served_tokens += lc.done;
                m.calls.push_back(cr);
                live[w].push_back(std::move(lc));
                ++row.admitted;
            }
            row.active = static_cast<int>(live[w].size());

            // Chunked prefill against the iteration budget, admission order.
            std::size_t left = budgets[w];
            for (LiveCall& lc : live[w]) {
                if (left == 0) break;
                if (lc.remaining() == 0) continue;
                const std::size_t chunk = std::min(left, lc.remaining());
                lc.done += chunk;
                left -= chunk;
                backlog[w] -= chunk;
                m.prefill_computed_tokens += chunk;
                row.prefill_tokens += chunk;
                cache.insert(lc.prompt, lc.done, false, lc.hold);
                if (lc.remaining() == 0) lc.prefill_done_iter = iter;
            }

            // Decode one token per running call; prefill must have finished in
            // an earlier iteration.
            for (LiveCall& lc : live[w]) {
                if (lc.finished || lc.remaining() > 0) continue;
                if (lc.out_len > 0) {
                    if (lc.prefill_done_iter >= iter) continue;
                    ++lc.decoded;
                    ++row.decode_tokens;
                    ++m.decode_tokens;
                    if (lc.decoded < lc.out_len) continue;
                }
                // Complete: synthesize the output, publish it, keep its kv.
                TokenSeq out = synth_llm_output(lc.prompt, ev.profile_len_out(lc.id.op),
                                                compiled.graph.op(lc.id.op).deterministic,
                                                synth_opts);
                if (out.size() != lc.out_len)
                    throw std::logic_error("simulate: output length drifted from plan");
                ev.put_llm_output(lc.id.op, static_cast<std::size_t>(lc.id.query), out);
                TokenSeq full = lc.prompt;
                full.insert(full.end(), out.begin(), out.end());
                cache.insert(full, full.size(), false, 0);
                cache.release(lc.hold);
                leaf_done[static_cast<std::size_t>(lc.leaf)] = 1;
                SimCallRow& cr = m.calls[lc.row];
                cr.prefill_done_iter = lc.prefill_done_iter;
                cr.completed_iter = iter;
                cr.output_tokens = out.size();
                lc.finished = true;
                ++completed;
            }
            live[w].erase(std::remove_if(live[w].begin(), live[w].end(),
                                         [](const LiveCall& lc) { return lc.finished; }),
                          live[w].end());
            if (cfg.collect_trace) m.trace.push_back(row);
        }
    }

    m.iterations = iter;
    for (std::size_t w = 0; w < W; ++w) m.evicted_tokens.push_back(caches[w].evicted_tokens());
    m.hit_rate_pct = m.prompt_tokens > 0 ? 100.0 * static_cast<double>(m.cache_served_tokens) /
                                               static_cast<double>(m.prompt_tokens)
                                         : 0.0;
    m.outputs = ev.output_values();
    return m;
}

// --- reports -----------------------------------------------------------------

std::string sim_metrics_json(const SimMetrics& m) {
    nlohmann::json j;
    j["iterations"] = m.iterations;
    j["prompt_tokens"] = m.prompt_tokens;
    j["cache_served_tokens"] = m.cache_served_tokens;
    j["prefill_computed_tokens"] = m.prefill_computed_tokens;
    j["decode_tokens"] = m.decode_tokens;
    j["hit_rate_pct"] = m.hit_rate_pct;
    j["pinned_tokens"] = m.pinned_tokens;
    j["evicted_tokens"] = m.evicted_tokens;
    j["calls"] = m.calls.size();
    return j.dump(2);
}

std::string sim_calls_csv(const SimMetrics& m) {
    std::ostringstream os;
    os << "op,query,worker,admitted_iter,prefill_done_iter,completed_iter,prompt_tokens,"
          "cached_tokens,output_tokens\n";
    for (const SimCallRow& r : m.calls)
        os << r.call.op << ',' << r.call.query << ',' << r.worker << ',' << r.admitted_iter << ','
           << r.prefill_done_iter << ',' << r.completed_iter << ',' << r.prompt_tokens << ','
           << r.cached_tokens << ',' << r.output_tokens << '\n';
    return os.str();
}

std::string sim_trace_csv(const SimMetrics& m) {
    std::ostringstream os;
    os << "iter,worker,active,admitted,prefill_tokens,decode_tokens\n";
    for (const SimIterRow& r : m.trace)
        os << r.iter << ',' << r.worker << ',' << r.active << ',' << r.admitted << ','
           << r.prefill_tokens << ',' << r.decode_tokens << '\n';
    return os.str();
}

}  // namespace helios
