#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "helios/baselines.hpp"
#include "helios/cost_model.hpp"
#include "helios/oracle.hpp"
#include "helios/workload_gen.hpp"

namespace helios {

// One benchmark point: a synthetic workload small enough that the optimal
// makespan can be certified by branch and bound.
struct GapInstance {
    std::string name;
    SynthSpec spec;
    int workers = 1;
    double capacity = 8192;
};

struct GapRow {
    std::string instance;
    std::string method;
    double makespan = 0;
    double optimum = 0;
    double gap_pct = 0;
};

struct GapAggregate {
    std::string method;
    double avg = 0;
    double stddev = 0;
    double min = 0;
    double max = 0;
};

struct GapReport {
    std::vector<GapRow> rows;            // instance-major, method order fixed
    std::vector<GapAggregate> aggregates;
    std::uint64_t oracle_nodes = 0;
};

// Produce the schedule a given policy assigns to a compiled workflow.
Schedule schedule_for(SchedulerKind kind, const CompiledGraph& cg, const ProfileStats& profile,
                      const CostParams& params, std::uint64_t seed);

// The stock instance set: seven topologies, four seeds each.
std::vector<GapInstance> default_gap_instances();

// Evaluate every scheduling policy on every instance against the certified
// optimum. threads > 1 distributes instances across OpenMP threads; results
// are identical to the serial run.
GapReport run_gap_suite(const std::vector<GapInstance>& instances, int threads);

std::string gap_rows_csv(const GapReport& report);
std::string gap_report_json(const GapReport& report);

}  // namespace helios
