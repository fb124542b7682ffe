#include "helios/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace helios {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

// --- partitioning -----------------------------------------------------------

struct Cluster {
    int tree_node = 0;
    std::vector<int> leaves;
    double load = 0;
    NodeId min_op = 0;
};

// Cluster cost assumes its calls run back to back on one worker, so template
// weight shared inside the subtree is prefilled once, not once per leaf.
Cluster make_cluster(const TemplatedRadixTree& tree, int node) {
    Cluster cl;
    cl.tree_node = node;
    std::vector<int> stack{node};
    cl.min_op = std::numeric_limits<NodeId>::max();
    double unique_weight = 0, len_sum = 0, decode_sum = 0;
    while (!stack.empty()) {
        int n = stack.back();
        stack.pop_back();
        const TrtNode& t = tree.node(n);
        unique_weight += t.seg.weight();
        if (t.is_leaf) {
            cl.leaves.push_back(n);
            len_sum += t.leaf.len_out;
            decode_sum += decode_usage(t.leaf.len_out);
            cl.min_op = std::min(cl.min_op, t.leaf.op);
        }
        for (int ch : t.children) stack.push_back(ch);
    }
    const double mean_len =
        cl.leaves.empty() ? 0.0 : len_sum / static_cast<double>(cl.leaves.size());
    cl.load = mean_len * unique_weight + decode_sum;
    return cl;
}

}  // namespace

Partition partition_workflow(const CompiledGraph& c, const ProfileStats& profile, int workers) {
    if (workers < 1) fail("need at least one worker");
    Partition part;
    std::vector<NodeId> ops = llm_ops_topo(c.graph);
    if (workers == 1 || ops.size() <= 1) {
        for (NodeId op : ops) part.worker_of[op] = 0;
        return part;
    }

    std::map<NodeId, int> all_zero;
    for (NodeId op : ops) all_zero[op] = 0;
    TemplatedRadixTree tree = build_operator_tree(c, profile, all_zero);

    std::vector<Cluster> clusters;
    for (int ch : tree.node(tree.root()).children)
        clusters.push_back(make_cluster(tree, ch));

    std::vector<double> load(static_cast<std::size_t>(workers), 0.0);
    std::map<int, int> cluster_worker;  // cluster tree_node -> worker
    while (true) {
        std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
            if (a.load != b.load) return a.load > b.load;
            return a.min_op < b.min_op;
        });
        std::fill(load.begin(), load.end(), 0.0);
        cluster_worker.clear();
        for (const Cluster& cl : clusters) {
            std::size_t w = 0;
            for (std::size_t i = 1; i < load.size(); ++i)
                if (load[i] < load[w] - kEps) w = i;
            cluster_worker[cl.tree_node] = static_cast<int>(w);
            load[w] += cl.load;
        }
        double mx = *std::max_element(load.begin(), load.end());
        double mn = *std::min_element(load.begin(), load.end());
        if (mx <= 1.5 * mn + kEps) break;

        // split the heaviest splittable cluster along the tree
        std::ptrdiff_t pick = -1;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            if (clusters[i].leaves.size() < 2) continue;
            if (tree.node(clusters[i].tree_node).is_leaf) continue;
            if (pick < 0 || clusters[i].load > clusters[static_cast<std::size_t>(pick)].load)
                pick = static_cast<std::ptrdiff_t>(i);
        }
        if (pick < 0) break;
        Cluster split = clusters[static_cast<std::size_t>(pick)];
        clusters.erase(clusters.begin() + pick);
        for (int ch : tree.node(split.tree_node).children)
            clusters.push_back(make_cluster(tree, ch));
    }

    for (const Cluster& cl : clusters)
        for (int lf : cl.leaves)
            part.worker_of[tree.node(lf).leaf.op] = cluster_worker.at(cl.tree_node);
    return part;
}

// --- cache-aware operator scheduling ----------------------------------------

namespace {

struct GroupKey {
    int worker = 0;
    long long key = 0;  // tree node id, or -(op+2) for singleton groups
    friend bool operator<(const GroupKey& a, const GroupKey& b) {
        if (a.worker != b.worker) return a.worker < b.worker;
        return a.key < b.key;
    }
    friend bool operator==(const GroupKey& a, const GroupKey& b) {
        return a.worker == b.worker && a.key == b.key;
    }
};

struct GroupState {
    std::size_t total = 0;
    std::vector<int> emitted;  // leaf ids in emission order
    std::size_t flushed = 0;
};

struct LogEntry {
    int leaf = 0;
    GroupKey group;
    bool flushed = false;
};

struct Planner {
    const TemplatedRadixTree& tree;
    const CostParams& params;
    std::size_t batch;
    SchedulerStats& stats;

    // derived statics
    std::map<NodeId, std::set<NodeId>> reach;  // op -> transitively dependent ops
    std::map<int, std::vector<int>> paths;     // leaf -> root path node ids
    std::map<NodeId, bool> varies;             // per-query varying value?
    std::map<int, GroupKey> group_of;          // leaf -> group

    // mutable scheduling state
    std::vector<bool> emitted;
    std::vector<double> complete, delay;          // per emitted leaf
    std::vector<int> unemitted_under;             // per tree node
    std::vector<double> frontier;                 // per worker
    std::vector<int> prev_leaf;                   // per worker
    std::map<GroupKey, GroupState> groups;
    std::vector<std::vector<LogEntry>> log;       // per worker, emission order
    std::vector<std::vector<InnerSequence>> out;  // released inner sequences
    bool force_active = false;
    std::size_t emitted_count = 0;

    Planner(const TemplatedRadixTree& t, const CostParams& p, std::size_t b, SchedulerStats& s)
        : tree(t), params(p), batch(b), stats(s) {}

    double es(int leaf) const {
        double v = 0;
        for (int p : tree.node(leaf).preds) {
            if (!emitted[static_cast<std::size_t>(p)]) return kInf;
            v = std::max(v, complete[static_cast<std::size_t>(p)] + delay[static_cast<std::size_t>(p)]);
        }
        return v;
    }

    bool forceable(int leaf) const {
        for (int p : tree.node(leaf).preds)
            if (!emitted[static_cast<std::size_t>(p)]) return false;
        return true;
    }

    // per-query varying placeholder weight along the leaf's root path
    double vary_weight(int leaf) const {
        double w = 0;
        for (int n : paths.at(leaf))
            for (const SegmentPart& p : tree.node(n).seg.parts)
                if (!p.is_static && varies.at(p.source)) w += p.est_len;
        return w;
    }

    void emit(int leaf) {
        const TrtLeaf& l = tree.node(leaf).leaf;
        auto w = static_cast<std::size_t>(l.worker);
        const WorkerParams& wp = params.workers[w];
        double alpha = wp.resolved_alpha();
        double u_p = tree.prefill_weight(prev_leaf[w], leaf);
        double u_d = decode_usage(l.len_out);
        double usage = total_usage(alpha, l.len_out, u_p);
        if (batch > 1)
            usage += static_cast<double>(batch - 1) * total_usage(alpha, l.len_out, vary_weight(leaf));
        double begin = std::max(frontier[w], es(leaf));
        double c = begin + usage;

        emitted[static_cast<std::size_t>(leaf)] = true;
        complete[static_cast<std::size_t>(leaf)] = c;
        delay[static_cast<std::size_t>(leaf)] = precedence_delay(alpha, wp.capacity, l.len_out);
        frontier[w] = c;
        prev_leaf[w] = leaf;
        for (int n : paths.at(leaf)) unemitted_under[static_cast<std::size_t>(n)]--;
        ++emitted_count;
        ++stats.emitted;
        if (force_active) {
            force_active = false;
            ++stats.forced_emits;
        }

        GroupKey gk = group_of.at(leaf);
        GroupState& g = groups.at(gk);
        g.emitted.push_back(leaf);
        log[w].push_back(LogEntry{leaf, gk, false});
        if (g.emitted.size() == g.total) release(gk);
    }

    // release the unflushed suffix of group gk as an inner sequence, flushing
    // first (in emission order) every same-worker op it transitively depends on
    void release(const GroupKey& gk) {
        GroupState& g = groups.at(gk);
        std::vector<int> pending(g.emitted.begin() + static_cast<std::ptrdiff_t>(g.flushed),
                                 g.emitted.end());
        if (pending.empty()) return;
        std::set<NodeId> targets;
        for (int lf : pending) targets.insert(tree.node(lf).leaf.op);

        auto wi = static_cast<std::size_t>(gk.worker);
        std::vector<bool> needed(log[wi].size(), false);
        for (std::size_t i = 0; i < log[wi].size(); ++i) {
            const LogEntry& e = log[wi][i];
            if (e.flushed || e.group == gk) continue;
            auto rit = reach.find(tree.node(e.leaf).leaf.op);
            if (rit == reach.end()) continue;
            for (NodeId t : targets) {
                ++stats.update_steps;
                if (rit->second.count(t)) {
                    needed[i] = true;
                    break;
                }
            }
        }
        // a group's flushed members must stay a prefix of its emission order, so
        // pull every earlier unflushed member of a needed entry's group along
        std::map<GroupKey, std::size_t> last_needed;
        for (std::size_t i = 0; i < log[wi].size(); ++i)
            if (needed[i]) last_needed[log[wi][i].group] = i;
        std::vector<std::size_t> to_flush;
        for (std::size_t i = 0; i < log[wi].size(); ++i) {
            const LogEntry& e = log[wi][i];
            if (e.flushed || e.group == gk) continue;
            auto it = last_needed.find(e.group);
            if (it != last_needed.end() && i <= it->second) to_flush.push_back(i);
        }
        // consecutive same-group runs become their own inner sequences
        std::size_t k = 0;
        while (k < to_flush.size()) {
            std::size_t kk = k;
            GroupKey run = log[wi][to_flush[k]].group;
            InnerSequence seq;
            while (kk < to_flush.size() && log[wi][to_flush[kk]].group == run) {
                LogEntry& e = log[wi][to_flush[kk]];
                e.flushed = true;
                groups.at(e.group).flushed++;
                seq.ops.push_back(tree.node(e.leaf).leaf.op);
                ++kk;
            }
            out[wi].push_back(std::move(seq));
            k = kk;
        }

        InnerSequence seq;
        for (int lf : pending) seq.ops.push_back(tree.node(lf).leaf.op);
        for (LogEntry& e : log[wi])
            if (!e.flushed && e.group == gk) e.flushed = true;
        g.flushed = g.emitted.size();
        out[wi].push_back(std::move(seq));
    }

    void flush_remaining() {
        for (std::size_t wi = 0; wi < log.size(); ++wi) {
            std::size_t k = 0;
            while (k < log[wi].size()) {
                if (log[wi][k].flushed) {
                    ++k;
                    continue;
                }
                GroupKey run = log[wi][k].group;
                InnerSequence seq;
                while (k < log[wi].size() && !log[wi][k].flushed && log[wi][k].group == run) {
                    log[wi][k].flushed = true;
                    groups.at(run).flushed++;
                    seq.ops.push_back(tree.node(log[wi][k].leaf).leaf.op);
                    ++k;
                }
                out[wi].push_back(std::move(seq));
            }
        }
    }

    // order the live children of `u` for this visit
    std::vector<int> select_children(int u) {
        std::vector<int> live;
        for (int ch : tree.node(u).children)
            if (unemitted_under[static_cast<std::size_t>(ch)] > 0) live.push_back(ch);
        std::size_t k = live.size();
        if (k <= 1) return live;

        // per-child stats over unemitted leaves
        std::vector<double> min_es(k, kInf);
        std::vector<NodeId> min_op(k, std::numeric_limits<NodeId>::max());
        std::map<int, std::size_t> which;
        for (std::size_t i = 0; i < k; ++i) which[live[i]] = i;
        auto child_of = [&](int leaf) -> int {
            const std::vector<int>& path = paths.at(leaf);
            std::size_t d = static_cast<std::size_t>(tree.node(u).depth) + 1;
            return d < path.size() ? path[d] : -1;
        };

        std::vector<std::vector<int>> child_leaves(k);
        for (int lf : tree.leaves()) {
            if (emitted[static_cast<std::size_t>(lf)]) continue;
            auto it = which.find(child_of(lf));
            if (it == which.end()) continue;
            std::size_t i = it->second;
            child_leaves[i].push_back(lf);
            min_op[i] = std::min(min_op[i], tree.node(lf).leaf.op);
            if (forceable(lf)) min_es[i] = std::min(min_es[i], es(lf));
        }

        if (force_active) {
            // descend toward the globally cheapest forceable leaf
            std::vector<int> order = live;
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                std::size_t ia = which[a], ib = which[b];
                if (min_es[ia] != min_es[ib]) return min_es[ia] < min_es[ib];
                return min_op[ia] < min_op[ib];
            });
            stats.select_steps += k * k;
            return order;
        }

        // dependency edges between distinct children (unemitted endpoints only)
        std::vector<std::vector<bool>> adj(k, std::vector<bool>(k, false));
        for (std::size_t i = 0; i < k; ++i) {
            for (int lf : child_leaves[i]) {
                for (int s : tree.node(lf).succs) {
                    ++stats.update_steps;
                    if (emitted[static_cast<std::size_t>(s)]) continue;
                    auto it = which.find(child_of(s));
                    if (it != which.end() && it->second != i) adj[i][it->second] = true;
                }
            }
        }
        // transitive closure -> strongly connected components
        std::vector<std::vector<bool>> reach_cl = adj;
        for (std::size_t m = 0; m < k; ++m)
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    ++stats.select_steps;
                    if (reach_cl[i][m] && reach_cl[m][j]) reach_cl[i][j] = true;
                }
        std::vector<std::size_t> comp(k, k);
        std::size_t ncomp = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (comp[i] != k) continue;
            comp[i] = ncomp;
            for (std::size_t j = i + 1; j < k; ++j)
                if (reach_cl[i][j] && reach_cl[j][i]) comp[j] = ncomp;
            ++ncomp;
        }
        // condensation edges + longest chain ending at each component
        std::vector<std::set<std::size_t>> cpred(ncomp);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (adj[i][j] && comp[i] != comp[j]) cpred[comp[j]].insert(comp[i]);
        std::vector<int> depth_of(ncomp, 0);
        {
            bool changed = true;
            while (changed) {  // ncomp is small; fixpoint is fine
                changed = false;
                for (std::size_t cc = 0; cc < ncomp; ++cc)
                    for (std::size_t p : cpred[cc])
                        if (depth_of[p] + 1 > depth_of[cc]) {
                            depth_of[cc] = depth_of[p] + 1;
                            changed = true;
                        }
            }
        }
        std::vector<double> comp_es(ncomp, kInf);
        std::vector<NodeId> comp_op(ncomp, std::numeric_limits<NodeId>::max());
        for (std::size_t i = 0; i < k; ++i) {
            comp_es[comp[i]] = std::min(comp_es[comp[i]], min_es[i]);
            comp_op[comp[i]] = std::min(comp_op[comp[i]], min_op[i]);
        }

        // Kahn over the condensation; among ready components prefer the longest
        // dependency chain, then the smallest earliest-start, then smallest op
        std::vector<std::size_t> remaining(ncomp, 0);
        for (std::size_t cc = 0; cc < ncomp; ++cc) remaining[cc] = cpred[cc].size();
        std::vector<std::size_t> comp_order;
        std::vector<bool> done(ncomp, false);
        for (std::size_t round = 0; round < ncomp; ++round) {
            std::size_t best = ncomp;
            for (std::size_t cc = 0; cc < ncomp; ++cc) {
                ++stats.select_steps;
                if (done[cc] || remaining[cc] > 0) continue;
                if (best == ncomp) {
                    best = cc;
                    continue;
                }
                if (depth_of[cc] != depth_of[best]) {
                    if (depth_of[cc] > depth_of[best]) best = cc;
                } else if (comp_es[cc] != comp_es[best]) {
                    if (comp_es[cc] < comp_es[best]) best = cc;
                } else if (comp_op[cc] < comp_op[best]) {
                    best = cc;
                }
            }
            if (best == ncomp) fail("child ordering failed (cyclic condensation)");
            done[best] = true;
            comp_order.push_back(best);
            for (std::size_t cc = 0; cc < ncomp; ++cc)
                if (!done[cc] && cpred[cc].count(best)) remaining[cc]--;
        }

        std::vector<int> order;
        for (std::size_t cc : comp_order) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < k; ++i)
                if (comp[i] == cc) members.push_back(i);
            std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
                if (min_es[a] != min_es[b]) return min_es[a] < min_es[b];
                return min_op[a] < min_op[b];
            });
            for (std::size_t i : members) order.push_back(live[i]);
        }
        return order;
    }

    bool recurse(int u) {
        const TrtNode& n = tree.node(u);
        if (n.is_leaf) {
            if (emitted[static_cast<std::size_t>(u)]) return false;
            if (!forceable(u)) return false;
            double start = es(u);
            auto w = static_cast<std::size_t>(n.leaf.worker);
            if (!force_active && start > frontier[w] + kEps) return false;
            emit(u);
            return true;
        }
        bool any = false;
        for (int ch : select_children(u)) {
            if (unemitted_under[static_cast<std::size_t>(ch)] == 0) continue;
            if (recurse(ch)) any = true;
        }
        return any;
    }
};

}  // namespace

SoftSchedule plan_operators(const CompiledGraph& c, const ProfileStats& profile,
                            const CostParams& params, const Partition& part,
                            SchedulerStats* stats_out) {
    auto t0 = std::chrono::steady_clock::now();
    SchedulerStats stats;
    TemplatedRadixTree tree = build_operator_tree(c, profile, part.worker_of);
    for (const auto& [op, w] : part.worker_of)
        if (w < 0 || w >= static_cast<int>(params.workers.size()))
            fail("operator " + std::to_string(op) + " assigned to missing worker " +
                 std::to_string(w));

    Planner pl(tree, params, c.batch, stats);

    // transitive dependency closure over llm ops
    std::map<NodeId, std::vector<NodeId>> deps = llm_dependencies(c.graph);
    std::vector<NodeId> ops = llm_ops_topo(c.graph);
    std::map<NodeId, std::set<NodeId>> succs;
    for (const auto& [op, ds] : deps)
        for (NodeId d : ds) succs[d].insert(op);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        std::set<NodeId>& r = pl.reach[*it];
        for (NodeId s : succs[*it]) {
            r.insert(s);
            r.insert(pl.reach[s].begin(), pl.reach[s].end());
        }
    }

    // per-query variability of node values
    for (NodeId id : topo_sort(c.graph)) {
        const Operator& n = c.graph.op(id);
        bool v = false;
        if (c.bound.count(id)) {
            const auto& vals = c.bound.at(id);
            for (std::size_t b = 1; b < vals.size(); ++b)
                if (vals[b] != vals[0]) v = true;
        } else {
            for (NodeId in : c.graph.inputs_of(id)) v = v || pl.varies.at(in);
        }
        pl.varies[id] = v;
    }

    pl.emitted.assign(tree.node_count(), false);
    pl.complete.assign(tree.node_count(), 0);
    pl.delay.assign(tree.node_count(), 0);
    pl.unemitted_under.assign(tree.node_count(), 0);
    for (int lf : tree.leaves()) {
        pl.paths[lf] = tree.path_from_root(lf);
        for (int n : pl.paths[lf]) pl.unemitted_under[static_cast<std::size_t>(n)]++;
    }
    pl.frontier.assign(params.workers.size(), 0.0);
    pl.prev_leaf.assign(params.workers.size(), -1);
    pl.log.resize(params.workers.size());
    pl.out.resize(params.workers.size());

    // static-prefix groups: deepest ancestor whose whole root path is static
    for (int lf : tree.leaves()) {
        const std::vector<int>& path = pl.paths[lf];
        int deepest = tree.root();
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {  // skip root and leaf
            if (!tree.node(path[i]).seg.all_static()) break;
            deepest = path[i];
        }
        GroupKey gk;
        gk.worker = tree.node(lf).leaf.worker;
        gk.key = deepest == tree.root() ? -(tree.node(lf).leaf.op + 2)
                                        : static_cast<long long>(deepest);
        pl.group_of[lf] = gk;
        pl.groups[gk].total++;
    }

    std::size_t total = tree.leaves().size();
    while (pl.emitted_count < total) {
        ++stats.passes;
        pl.force_active = false;
        if (pl.recurse(tree.root())) continue;
        pl.force_active = true;
        ++stats.passes;
        if (!pl.recurse(tree.root()))
            fail("scheduling stalled: dependency cycle among llm operators");
    }
    pl.flush_remaining();

    SoftSchedule soft;
    soft.workers = std::move(pl.out);
    stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (stats_out) *stats_out = stats;
    return soft;
}

Schedule expand_soft_schedule(const SoftSchedule& soft, std::size_t batch) {
    Schedule s(soft.workers.size());
    for (std::size_t w = 0; w < soft.workers.size(); ++w)
        for (const InnerSequence& seq : soft.workers[w])
            for (NodeId op : seq.ops)
                for (std::size_t b = 0; b < batch; ++b)
                    s[w].push_back(CallId{op, static_cast<int>(b)});
    return s;
}

std::string soft_schedule_json(const SoftSchedule& soft) {
    nlohmann::json workers = nlohmann::json::array();
    for (const auto& seqs : soft.workers) {
        nlohmann::json jw = nlohmann::json::array();
        for (const InnerSequence& seq : seqs) jw.push_back(seq.ops);
        workers.push_back(std::move(jw));
    }
    return nlohmann::json{{"workers", std::move(workers)}}.dump(2) + "\n";
}

SoftSchedule soft_schedule_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    SoftSchedule soft;
    for (const nlohmann::json& jw : j.at("workers")) {
        std::vector<InnerSequence> seqs;
        for (const nlohmann::json& js : jw) {
            InnerSequence seq;
            seq.ops = js.get<std::vector<NodeId>>();
            seqs.push_back(std::move(seq));
        }
        soft.workers.push_back(std::move(seqs));
    }
    return soft;
}

}  // namespace helios
