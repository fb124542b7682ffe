#pragma once

#include <vector>

#include "helios/trt.hpp"
#include "helios/workflow.hpp"

namespace helios {

struct WorkerParams {
    double capacity = 0.0;  // kv token capacity M
    double alpha = 0.0;     // latency per token-step; 0 means 1/capacity
    double resolved_alpha() const { return alpha > 0 ? alpha : 1.0 / capacity; }
};

struct CostParams {
    std::vector<WorkerParams> workers;
};

// token-steps to decode len_out tokens with linearly growing attention reads
double decode_usage(double len_out);
// total latency of one call: alpha * (len_out * u_p + u_d)
double total_usage(double alpha, double len_out, double u_p);
// time a dependent call must wait after this call completes before it can start
double precedence_delay(double alpha, double capacity, double len_out);

// sigma: one call sequence per worker
using WorkerSequence = std::vector<CallId>;
using Schedule = std::vector<WorkerSequence>;

struct CallCost {
    CallId call;
    int worker = 0;
    int seq_index = 0;   // position within the worker's sequence
    double u_p = 0;      // prefill usage (tree path weight)
    double u_d = 0;      // decode usage
    double usage = 0;    // total latency occupied on the worker
    double delay = 0;    // precedence delay exported to dependents
    double begin = 0;
    double complete = 0;
};

struct ScheduleEval {
    std::vector<CallCost> calls;  // worker-major, sequence order
    double makespan = 0;
};

// Replay sigma against the analytic model. Each call starts no earlier than its
// worker predecessor's completion and no earlier than complete+delay of every
// dependency. Throws (naming an edge) if the schedule deadlocks, i.e. some
// same-worker order contradicts the dependency edges. Every leaf of `tree` must
// appear exactly once.
ScheduleEval evaluate_schedule(const TemplatedRadixTree& tree, const Schedule& sigma,
                               const CostParams& params);

}  // namespace helios
