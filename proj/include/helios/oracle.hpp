#pragma once

#include <optional>

#include "helios/cost_model.hpp"

namespace helios {

struct OracleOptions {
    // hard cap on explored search nodes; exceeded => error (raise it or shrink
    // the instance)
    std::uint64_t node_budget = 200'000'000;
    // parallel root-splitting when > 1; 1 = serial reference path
    int threads = 1;
    // warm-start upper bounds (schedules over the same tree), optional
    std::vector<Schedule> incumbents;
};

struct OracleResult {
    double makespan = 0;
    Schedule schedule;
    std::uint64_t nodes_explored = 0;
};

// Exact minimum makespan over all feasible placements of every call onto the
// workers, by branch and bound over (call, worker) extensions. Subtrees are cut
// only when strictly worse than the incumbent and ties break lexicographically,
// so the result is deterministic and identical between the serial and parallel
// paths. Instances beyond ~a dozen calls are out of reach by design.
OracleResult optimal_schedule(const TemplatedRadixTree& tree, const CostParams& params,
                              const OracleOptions& opts = {});

// (T - T*) / T* in percent. Throws if t_star is not positive; tiny negative
// rounding residue clamps to zero.
double optimality_gap_pct(double t, double t_star);

}  // namespace helios
