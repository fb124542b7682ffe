#pragma once

#include <cstdint>
#include <string>

#include "helios/cost_model.hpp"
#include "helios/trt.hpp"

namespace helios {

struct Partition {
    std::map<NodeId, int> worker_of;
};

// Balance llm operators across workers: operators sharing a template subtree
// stay together (clusters = radix subtrees), clusters go longest-processing-
// time-first onto the least loaded worker, and oversized clusters split along
// the tree until the heaviest worker is within 1.5x of the lightest.
Partition partition_workflow(const CompiledGraph& c, const ProfileStats& profile, int workers);

struct InnerSequence {
    std::vector<NodeId> ops;  // run back to back; queries expand per op
};

struct SoftSchedule {
    std::vector<std::vector<InnerSequence>> workers;
};

struct SchedulerStats {
    std::uint64_t select_steps = 0;  // child-ordering work (incl. closure loops)
    std::uint64_t update_steps = 0;  // dependency edges re-examined
    std::uint64_t passes = 0;
    std::uint64_t forced_emits = 0;
    std::uint64_t emitted = 0;
    double wall_seconds = 0;
};

// Cache-aware operator scheduling over the operator-level template tree.
// Normal passes only emit operators that can start without idling their
// worker; when a pass stalls, one forced pass emits the blocked operator with
// the smallest earliest-start time. Completed static-prefix groups release as
// inner sequences; a release flushes any same-worker operators it depends on
// first, so flattened per-worker orders always respect the dependency edges.
SoftSchedule plan_operators(const CompiledGraph& c, const ProfileStats& profile,
                            const CostParams& params, const Partition& part,
                            SchedulerStats* stats = nullptr);

// Flatten to per-call sequences: operators in soft-schedule order, each
// expanded over the batch (query-major within the operator).
Schedule expand_soft_schedule(const SoftSchedule& soft, std::size_t batch);

std::string soft_schedule_json(const SoftSchedule& soft);
SoftSchedule soft_schedule_from_json(const std::string& json_text);

}  // namespace helios
