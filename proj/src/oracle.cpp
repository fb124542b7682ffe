#include "helios/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace helios {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

struct Move {
    int leaf = 0;
    int worker = 0;
};

// flattened worker-major call encoding used for deterministic tie-breaking
std::vector<CallId> encode(const Schedule& s) {
    std::vector<CallId> flat;
    for (const WorkerSequence& ws : s) {
        for (const CallId& c : ws) flat.push_back(c);
        flat.push_back(CallId{kNoNode, -1});  // worker boundary
    }
    return flat;
}

bool encoding_less(const std::vector<CallId>& a, const std::vector<CallId>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Searcher {
    const TemplatedRadixTree& tree;
    const CostParams& params;
    std::uint64_t node_budget;

    std::vector<int> leaves;
    std::map<int, std::size_t> leaf_slot;
    std::vector<double> u_min, d_min, tail;

    // shared incumbent value (pruning only); each worker thread keeps its own
    // best schedule and the caller merges deterministically
    double inc_value;
    std::atomic<std::uint64_t> nodes{0};

    struct State {
        std::vector<bool> placed;
        std::vector<double> complete, delay;  // per leaf slot
        Schedule seq;
        std::vector<double> frontier;
        std::vector<int> prev;
        std::size_t nplaced = 0;
        double makespan = 0;
        double remaining_umin = 0;
    };

    struct Best {
        double value = std::numeric_limits<double>::infinity();
        Schedule schedule;
        std::vector<CallId> enc;
    };

    Searcher(const TemplatedRadixTree& t, const CostParams& p, std::uint64_t budget)
        : tree(t), params(p), node_budget(budget), inc_value(std::numeric_limits<double>::infinity()) {
        leaves = tree.leaves();
        for (std::size_t i = 0; i < leaves.size(); ++i) leaf_slot[leaves[i]] = i;
        u_min.resize(leaves.size());
        d_min.resize(leaves.size());
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            const TrtLeaf& l = tree.node(leaves[i]).leaf;
            double um = std::numeric_limits<double>::infinity();
            double dm = std::numeric_limits<double>::infinity();
            for (const WorkerParams& w : params.workers) {
                um = std::min(um, total_usage(w.resolved_alpha(), l.len_out, 0.0));
                dm = std::min(dm, precedence_delay(w.resolved_alpha(), w.capacity, l.len_out));
            }
            u_min[i] = um;
            d_min[i] = dm;
        }
        // longest remaining chain below each call (valid lower bound everywhere,
        // since descendants of an unplaced call are necessarily unplaced)
        tail.assign(leaves.size(), 0.0);
        std::vector<int> order(leaves.begin(), leaves.end());
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return tree.node(a).depth < tree.node(b).depth;  // any order; fixpoint below
        });
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                double t = u_min[i];
                for (int s : tree.node(leaves[i]).succs) {
                    double cand = u_min[i] + d_min[i] + tail[leaf_slot.at(s)];
                    t = std::max(t, cand);
                }
                if (t > tail[i]) {
                    tail[i] = t;
                    changed = true;
                }
            }
        }
    }

    State initial_state() const {
        State st;
        st.placed.assign(leaves.size(), false);
        st.complete.assign(leaves.size(), 0);
        st.delay.assign(leaves.size(), 0);
        st.seq.resize(params.workers.size());
        st.frontier.assign(params.workers.size(), 0.0);
        st.prev.assign(params.workers.size(), -1);
        for (double u : u_min) st.remaining_umin += u;
        return st;
    }

    double ready_floor(const State& st, std::size_t slot) const {
        double r = 0;
        for (int p : tree.node(leaves[slot]).preds) {
            std::size_t ps = leaf_slot.at(p);
            if (st.placed[ps]) r = std::max(r, st.complete[ps] + st.delay[ps]);
        }
        return r;
    }

    double lower_bound(const State& st) const {
        double lb = st.makespan;
        double min_front = *std::min_element(st.frontier.begin(), st.frontier.end());
        lb = std::max(lb, min_front + st.remaining_umin / static_cast<double>(params.workers.size()));
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (st.placed[i]) continue;
            lb = std::max(lb, ready_floor(st, i) + tail[i]);
        }
        return lb;
    }

    std::vector<Move> moves(const State& st) const {
        std::vector<std::size_t> cand;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (st.placed[i]) continue;
            bool ok = true;
            for (int p : tree.node(leaves[i]).preds)
                if (!st.placed[leaf_slot.at(p)]) ok = false;
            if (ok) cand.push_back(i);
        }
        std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            const TrtLeaf& la = tree.node(leaves[a]).leaf;
            const TrtLeaf& lb = tree.node(leaves[b]).leaf;
            return CallId{la.op, la.query} < CallId{lb.op, lb.query};
        });
        std::vector<Move> out;
        for (std::size_t i : cand) {
            for (std::size_t w = 0; w < params.workers.size(); ++w) {
                if (st.seq[w].empty()) {
                    // identical empty workers are interchangeable; keep the first
                    bool identical_prior = false;
                    for (std::size_t v = 0; v < w; ++v)
                        if (st.seq[v].empty() &&
                            params.workers[v].capacity == params.workers[w].capacity &&
                            params.workers[v].resolved_alpha() == params.workers[w].resolved_alpha())
                            identical_prior = true;
                    if (identical_prior) continue;
                }
                out.push_back(Move{leaves[i], static_cast<int>(w)});
            }
        }
        return out;
    }

    void apply(State& st, const Move& m) const {
        std::size_t slot = leaf_slot.at(m.leaf);
        auto w = static_cast<std::size_t>(m.worker);
        const TrtLeaf& l = tree.node(m.leaf).leaf;
        const WorkerParams& wp = params.workers[w];
        double alpha = wp.resolved_alpha();
        double u_p = tree.prefill_weight(st.prev[w], m.leaf);
        double usage = total_usage(alpha, l.len_out, u_p);
        double begin = std::max(st.frontier[w], ready_floor(st, slot));
        double c = begin + usage;
        st.placed[slot] = true;
        st.complete[slot] = c;
        st.delay[slot] = precedence_delay(alpha, wp.capacity, l.len_out);
        st.seq[w].push_back(CallId{l.op, l.query});
        st.frontier[w] = c;
        st.prev[w] = m.leaf;
        st.nplaced++;
        st.makespan = std::max(st.makespan, c);
        st.remaining_umin -= u_min[slot];
    }

    void dfs(State& st, Best& best) {
        if (nodes.fetch_add(1, std::memory_order_relaxed) >= node_budget)
            fail("oracle node budget exceeded");
        if (st.nplaced == leaves.size()) {
            std::vector<CallId> enc = encode(st.seq);
            bool better = st.makespan < best.value - 1e-12 ||
                          (std::abs(st.makespan - best.value) <= 1e-12 &&
                           (best.enc.empty() || encoding_less(enc, best.enc)));
            if (better) {
                best.value = st.makespan;
                best.schedule = st.seq;
                best.enc = std::move(enc);
#ifdef _OPENMP
#pragma omp critical(helios_oracle_inc)
#endif
                {
                    if (best.value < inc_value) inc_value = best.value;
                }
            }
            return;
        }
        double inc;
#ifdef _OPENMP
#pragma omp critical(helios_oracle_inc)
#endif
        { inc = inc_value; }
        double lb = lower_bound(st);
        if (lb > inc * (1 + 1e-12) + 1e-12) return;  // strictly worse only: ties survive

        for (const Move& m : moves(st)) {
            State next = st;
            apply(next, m);
            dfs(next, best);
        }
    }
};

}  // namespace

double optimality_gap_pct(double t, double t_star) {
    if (!(t_star > 0)) fail("optimal makespan must be positive");
    double gap = (t - t_star) / t_star * 100.0;
    if (gap < 0) {
        if (gap < -1e-6) fail("schedule beats the proven optimum; evaluators disagree");
        gap = 0;
    }
    return gap;
}

OracleResult optimal_schedule(const TemplatedRadixTree& tree, const CostParams& params,
                              const OracleOptions& opts) {
    if (params.workers.empty()) fail("need at least one worker");
    Searcher s(tree, params, opts.node_budget);

    Searcher::Best seed_best;
    for (const Schedule& inc : opts.incumbents) {
        ScheduleEval ev = evaluate_schedule(tree, inc, params);
        std::vector<CallId> enc = encode(inc);
        if (ev.makespan < seed_best.value - 1e-12 ||
            (std::abs(ev.makespan - seed_best.value) <= 1e-12 &&
             (seed_best.enc.empty() || encoding_less(enc, seed_best.enc)))) {
            seed_best.value = ev.makespan;
            seed_best.schedule = inc;
            seed_best.enc = std::move(enc);
        }
    }
    s.inc_value = seed_best.value;

    OracleResult out;
    if (tree.leaves().empty()) {
        out.schedule.resize(params.workers.size());
        return out;
    }

    Searcher::State root = s.initial_state();

    int threads = opts.threads;
#ifdef _OPENMP
    if (threads <= 0) threads = omp_get_max_threads();
#else
    threads = 1;
#endif

    Searcher::Best merged = seed_best;
    if (threads <= 1) {
        s.dfs(root, merged);
    } else {
        // expand a deterministic frontier, then search branches in parallel;
        // the shared incumbent value only prunes strictly worse subtrees, so
        // the merged result matches the serial path exactly
        std::vector<Searcher::State> frontier{root};
        while (static_cast<int>(frontier.size()) < 4 * threads) {
            std::vector<Searcher::State> next;
            bool grew = false;
            for (const Searcher::State& st : frontier) {
                if (st.nplaced == s.leaves.size()) {
                    next.push_back(st);
                    continue;
                }
                for (const Move& m : s.moves(st)) {
                    next.push_back(st);
                    s.apply(next.back(), m);
                    grew = true;
                }
            }
            frontier = std::move(next);
            if (!grew) break;
        }
        std::vector<Searcher::Best> bests(frontier.size(), seed_best);
        std::atomic<bool> over_budget{false};
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            if (over_budget.load(std::memory_order_relaxed)) continue;
            try {
                s.dfs(frontier[i], bests[i]);
            } catch (const std::exception&) {
                over_budget.store(true);  // exceptions must not cross the omp region
            }
        }
        if (over_budget.load()) fail("oracle node budget exceeded");
        for (const Searcher::Best& b : bests) {
            if (b.value < merged.value - 1e-12 ||
                (std::abs(b.value - merged.value) <= 1e-12 &&
                 (merged.enc.empty() || encoding_less(b.enc, merged.enc))))
                merged = b;
        }
    }

    if (!std::isfinite(merged.value)) fail("oracle found no feasible schedule");
    out.makespan = merged.value;
    out.schedule = merged.schedule;
    if (out.schedule.size() < params.workers.size()) out.schedule.resize(params.workers.size());
    out.nodes_explored = s.nodes.load();
    return out;
}

}  // namespace helios
