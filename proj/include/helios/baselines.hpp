#pragma once

#include <string>

#include "helios/cost_model.hpp"
#include "helios/trt.hpp"

namespace helios {

enum class SchedulerKind { kCacheAware, kQueryWise, kOpWise, kRandom, kLspf };

const char* scheduler_kind_name(SchedulerKind k);
SchedulerKind scheduler_kind_from_name(const std::string& name);

// Reference orderings over the same call set. query_wise walks each query's
// operators before the next query; op_wise finishes an operator's batch before
// the next operator; random picks uniformly among dependency-ready calls; lspf
// greedily picks the ready call sharing the longest template prefix with the
// last call placed. Workers: query_wise spreads queries, op_wise spreads
// operators, random draws, lspf picks the best (then least loaded) worker.
Schedule baseline_schedule(SchedulerKind kind, const CompiledGraph& c, const ProfileStats& profile,
                           const TemplatedRadixTree& call_tree, int workers, std::uint64_t seed);

}  // namespace helios
