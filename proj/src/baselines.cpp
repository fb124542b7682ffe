#include "helios/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace helios {

const char* scheduler_kind_name(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::kCacheAware: return "cache_aware";
        case SchedulerKind::kQueryWise: return "query_wise";
        case SchedulerKind::kOpWise: return "op_wise";
        case SchedulerKind::kRandom: return "random";
        case SchedulerKind::kLspf: return "lspf";
    }
    return "?";
}

SchedulerKind scheduler_kind_from_name(const std::string& name) {
    if (name == "cache_aware") return SchedulerKind::kCacheAware;
    if (name == "query_wise") return SchedulerKind::kQueryWise;
    if (name == "op_wise") return SchedulerKind::kOpWise;
    if (name == "random") return SchedulerKind::kRandom;
    if (name == "lspf") return SchedulerKind::kLspf;
    throw std::runtime_error("unknown scheduler '" + name + "'");
}

namespace {

// greedy dispatch skeleton shared by random and lspf: repeatedly pick a
// dependency-ready call and a worker
template <typename PickFn>
Schedule dispatch(const TemplatedRadixTree& tree, int workers, PickFn pick) {
    Schedule s(static_cast<std::size_t>(workers));
    std::set<int> placed;
    std::vector<int> last(static_cast<std::size_t>(workers), -1);
    std::size_t total = tree.leaves().size();
    while (placed.size() < total) {
        std::vector<int> ready;
        for (int lf : tree.leaves()) {
            if (placed.count(lf)) continue;
            bool ok = true;
            for (int p : tree.node(lf).preds)
                if (!placed.count(p)) ok = false;
            if (ok) ready.push_back(lf);
        }
        if (ready.empty())
            throw std::runtime_error("baseline dispatch stalled (dependency cycle)");
        auto [lf, w] = pick(ready, last);
        placed.insert(lf);
        const TrtLeaf& l = tree.node(lf).leaf;
        s[static_cast<std::size_t>(w)].push_back(CallId{l.op, l.query});
        last[static_cast<std::size_t>(w)] = lf;
    }
    return s;
}

}  // namespace

Schedule baseline_schedule(SchedulerKind kind, const CompiledGraph& c, const ProfileStats& profile,
                           const TemplatedRadixTree& call_tree, int workers, std::uint64_t seed) {
    (void)profile;
    if (workers < 1) throw std::runtime_error("need at least one worker");
    std::vector<NodeId> ops = llm_ops_topo(c.graph);
    Schedule s(static_cast<std::size_t>(workers));

    switch (kind) {
        case SchedulerKind::kQueryWise: {
            for (std::size_t b = 0; b < c.batch; ++b) {
                auto w = static_cast<int>(b % static_cast<std::size_t>(workers));
                for (NodeId op : ops)
                    s[static_cast<std::size_t>(w)].push_back(CallId{op, static_cast<int>(b)});
            }
            return s;
        }
        case SchedulerKind::kOpWise: {
            for (std::size_t i = 0; i < ops.size(); ++i) {
                auto w = static_cast<std::size_t>(i % static_cast<std::size_t>(workers));
                for (std::size_t b = 0; b < c.batch; ++b)
                    s[w].push_back(CallId{ops[i], static_cast<int>(b)});
            }
            return s;
        }
        case SchedulerKind::kRandom: {
            std::mt19937_64 rng(seed);
            int next_worker = 0;
            return dispatch(call_tree, workers, [&](const std::vector<int>& ready,
                                                    const std::vector<int>&) {
                auto i = static_cast<std::size_t>(rng() % ready.size());
                int w = next_worker;
                next_worker = (next_worker + 1) % workers;
                return std::make_pair(ready[i], w);
            });
        }
        case SchedulerKind::kLspf: {
            return dispatch(call_tree, workers, [&](const std::vector<int>& ready,
                                                    const std::vector<int>& last) {
                int best_lf = -1, best_w = 0;
                double best_shared = -1;
                for (int lf : ready) {
                    for (std::size_t w = 0; w < last.size(); ++w) {
                        double shared =
                            last[w] < 0 ? 0.0
                                        : call_tree.root_path_weight(lf) -
                                              call_tree.weight_below(
                                                  call_tree.lca(last[w], lf), lf);
                        bool better = shared > best_shared + 1e-12;
                        if (!better && std::abs(shared - best_shared) <= 1e-12 && best_lf >= 0) {
                            // tie: smaller op, then query, then worker id
                            const TrtLeaf& a = call_tree.node(lf).leaf;
                            const TrtLeaf& b = call_tree.node(best_lf).leaf;
                            better = CallId{a.op, a.query} < CallId{b.op, b.query} ||
                                     (a.op == b.op && a.query == b.query &&
                                      static_cast<int>(w) < best_w);
                        }
                        if (better) {
                            best_lf = lf;
                            best_w = static_cast<int>(w);
                            best_shared = shared;
                        }
                    }
                }
                return std::make_pair(best_lf, best_w);
            });
        }
        case SchedulerKind::kCacheAware:
            throw std::runtime_error("cache_aware is produced by the planner, not a baseline");
    }
    throw std::runtime_error("bad scheduler kind");
}

}  // namespace helios
