#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "helios/baselines.hpp"
#include "helios/optimizer.hpp"
#include "helios/scheduler.hpp"
#include "helios/simulator.hpp"

namespace helios {

// Everything one end-to-end run needs, with every stage individually
// switchable so ablations and tests share the same path as the cli.
struct RunSpec {
    int workers = 1;
    std::vector<std::size_t> capacities = {4096};  // kv tokens; broadcast if one
    SchedulerKind scheduler = SchedulerKind::kCacheAware;
    std::uint64_t seed = 0;
    bool stochastic = false;

    bool prune = true;
    bool merge_duplicates = true;
    bool cache_substitute = true;

    bool proactive_pin = true;
    std::size_t pin_threshold = 200;
    double pin_capacity_frac = 0.5;
    std::size_t block = 16;
    std::size_t prefill_budget = 0;  // 0 = capacity/8
    double alpha = 0;                // latency per token-step; 0 = 1/capacity

    bool run_sim = true;
    bool collect_trace = false;
    std::uint64_t max_iterations = 0;
};

struct RunResult {
    CompiledGraph compiled;  // after rewriting
    OptimizeReport rewrite;
    Partition partition;
    SoftSchedule soft;  // cache-aware runs only
    Schedule schedule;
    ScheduleEval cost;
    SchedulerStats stats;
    SimMetrics sim;  // populated when run_sim
};

// bind -> rewrite -> partition -> schedule -> cost replay -> simulate.
// When `cache` is set, substitution reads it and the run's cacheable values
// are harvested back in afterwards.
RunResult run_workflow(const WorkflowGraph& g, const InputBatch& inputs,
                       const ProfileStats& profile, const RunSpec& spec,
                       PromptCache* cache = nullptr);

std::string run_report_json(const RunResult& r, const RunSpec& spec);

// Feature knockouts on a repeat-submission workload: each config submits the
// same workflow twice against a fresh prompt cache and reports the second
// run's simulated cost (the steady state a recurring workflow sees). The cost
// unit is token steps: prefill tokens actually computed plus decode tokens.
struct AblationRow {
    std::string config;
    std::uint64_t first_token_steps = 0;
    std::uint64_t token_steps = 0;  // second submission
    std::uint64_t first_iterations = 0;
    std::uint64_t iterations = 0;
    double delta_pct = 0;  // token steps vs the full configuration, second run
};

std::vector<AblationRow> run_ablation(const WorkflowGraph& g, const InputBatch& inputs,
                                      const ProfileStats& profile, const RunSpec& base);

std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace helios
