#pragma once

#include <cstdint>
#include <string>

#include "helios/workflow.hpp"

namespace helios {

// Synthetic multi-agent workloads with the usual prompt anatomy: a per-agent
// static system preamble, a context document shared by every query of the
// batch, a per-query question, and model outputs wired between agents.
struct SynthSpec {
    std::string pattern = "mapred";  // mapred|debate|reflect|iterative|parallel|trading_mini
    int agents = 3;                  // experts / debaters / critics / chunks / branches
    int rounds = 2;                  // debate only
    std::size_t batch = 2;
    int system_tokens = 120;
    int context_tokens = 60;
    int question_tokens = 12;
    double len_out = 8;              // mean output length
    bool len_jitter = true;          // draw per-op lengths around the mean
    std::uint64_t seed = 0;
};

struct SynthWorkload {
    WorkflowGraph graph;
    InputBatch inputs;
    ProfileStats profile;
};

SynthWorkload generate_workload(const SynthSpec& spec);

// Random well-formed workflows for property tests: random dags of all operator
// kinds, duplicated subgraphs, dead branches, mixed deterministic flags.
struct RandomSpec {
    int llm_ops = 3;
    std::size_t batch = 2;
    bool allow_nondeterminism = true;
    std::uint64_t seed = 0;
};

SynthWorkload generate_random_workflow(const RandomSpec& spec);

}  // namespace helios
