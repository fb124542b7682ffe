#include "helios/cost_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace helios {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string call_str(const CallId& c) {
    return "(" + std::to_string(c.op) + "," + std::to_string(c.query) + ")";
}

}  // namespace

double decode_usage(double len_out) { return 0.5 * len_out * (len_out + 1.0); }

double total_usage(double alpha, double len_out, double u_p) {
    return alpha * (len_out * u_p + decode_usage(len_out));
}

double precedence_delay(double alpha, double capacity, double len_out) {
    return alpha * capacity * len_out;
}

ScheduleEval evaluate_schedule(const TemplatedRadixTree& tree, const Schedule& sigma,
                               const CostParams& params) {
    if (sigma.size() != params.workers.size())
        fail("schedule has " + std::to_string(sigma.size()) + " workers, params have " +
             std::to_string(params.workers.size()));

    // map each leaf to its slot in sigma and check coverage
    std::map<int, std::pair<int, int>> place;  // leaf -> (worker, index)
    std::size_t total = 0;
    for (std::size_t w = 0; w < sigma.size(); ++w) {
        for (std::size_t k = 0; k < sigma[w].size(); ++k) {
            const CallId& c = sigma[w][k];
            int lf = tree.leaf_index(c.op, c.query);
            if (lf < 0) fail("schedule names unknown call " + call_str(c));
            if (!place.emplace(lf, std::make_pair(static_cast<int>(w), static_cast<int>(k))).second)
                fail("call " + call_str(c) + " scheduled twice");
            ++total;
        }
    }
    if (total != tree.leaves().size())
        fail("schedule covers " + std::to_string(total) + " of " +
             std::to_string(tree.leaves().size()) + " calls");

    std::map<int, double> complete_at, delay_of;
    std::vector<std::size_t> next(sigma.size(), 0);
    std::vector<double> frontier(sigma.size(), 0.0);
    std::vector<int> prev_leaf(sigma.size(), -1);

    ScheduleEval ev;
    ev.calls.resize(total);
    std::size_t placed = 0, row = 0;
    std::vector<std::size_t> row_of_worker_start(sigma.size());
    for (std::size_t w = 0; w < sigma.size(); ++w) {
        row_of_worker_start[w] = row;
        row += sigma[w].size();
    }

    bool progress = true;
    while (placed < total && progress) {
        progress = false;
        for (std::size_t w = 0; w < sigma.size(); ++w) {
            while (next[w] < sigma[w].size()) {
                const CallId& c = sigma[w][next[w]];
                int lf = tree.leaf_index(c.op, c.query);
                const TrtNode& leaf = tree.node(lf);

                double ready = 0.0;
                bool blocked = false;
                for (int p : leaf.preds) {
                    auto it = complete_at.find(p);
                    if (it == complete_at.end()) {
                        blocked = true;
                        break;
                    }
                    ready = std::max(ready, it->second + delay_of.at(p));
                }
                if (blocked) break;

                const WorkerParams& wp = params.workers[w];
                double alpha = wp.resolved_alpha();
                double u_p = tree.prefill_weight(prev_leaf[w], lf);
                double u_d = decode_usage(leaf.leaf.len_out);
                double usage = total_usage(alpha, leaf.leaf.len_out, u_p);
                double begin = std::max(frontier[w], ready);
                double complete = begin + usage;
                double delay = precedence_delay(alpha, wp.capacity, leaf.leaf.len_out);

                complete_at[lf] = complete;
                delay_of[lf] = delay;
                frontier[w] = complete;
                prev_leaf[w] = lf;

                CallCost& cc = ev.calls[row_of_worker_start[w] + next[w]];
                cc.call = c;
                cc.worker = static_cast<int>(w);
                cc.seq_index = static_cast<int>(next[w]);
                cc.u_p = u_p;
                cc.u_d = u_d;
                cc.usage = usage;
                cc.delay = delay;
                cc.begin = begin;
                cc.complete = complete;

                ev.makespan = std::max(ev.makespan, complete);
                ++next[w];
                ++placed;
                progress = true;
            }
        }
    }

    if (placed < total) {
        // name one witness of the deadlock: a head call with an unfinished dependency
        for (std::size_t w = 0; w < sigma.size(); ++w) {
            if (next[w] >= sigma[w].size()) continue;
            const CallId& c = sigma[w][next[w]];
            int lf = tree.leaf_index(c.op, c.query);
            for (int p : tree.node(lf).preds) {
                if (complete_at.count(p)) continue;
                const TrtLeaf& pl = tree.node(p).leaf;
                fail("schedule deadlock: call " + call_str(c) + " waits on " +
                     call_str(CallId{pl.op, pl.query}) + " which is queued behind it");
            }
        }
        fail("schedule deadlock");
    }
    return ev;
}

}  // namespace helios
