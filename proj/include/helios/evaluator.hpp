#pragma once

#include <map>
#include <vector>

#include "helios/workflow.hpp"

namespace helios {

struct EvalOptions {
    std::uint64_t seed = 0;
    // When set, llm output lengths draw uniformly from [0, 2*len_out] instead of
    // being exactly round(len_out). Draws are pure functions of (prompt, seed).
    bool stochastic = false;
    // When set, value() refuses to synthesize llm outputs on its own; someone
    // (the simulator) must put_llm_output() first. Guards causality in replay.
    bool strict_llm = false;
};

// Number of generated tokens for a call. Depends only on (prompt, len_out, seed).
std::size_t synth_output_len(const TokenSeq& prompt, double len_out, const EvalOptions& opts);
// The generated tokens themselves. Equal (prompt, len_out, seed) => equal bytes;
// the producing operator's identity deliberately does not enter the digest.
TokenSeq synth_output(const TokenSeq& prompt, double len_out, const EvalOptions& opts);

// Deterministic ops ignore the run seed entirely (same prompt => same bytes in
// every run, which is what makes cross-run caching of them sound); only
// nondeterministic ops see it.
std::size_t synth_llm_len(const TokenSeq& prompt, double len_out, bool deterministic,
                          const EvalOptions& opts);
TokenSeq synth_llm_output(const TokenSeq& prompt, double len_out, bool deterministic,
                          const EvalOptions& opts);

Token role_marker(MsgRole r);

// Memoizing reference evaluator over one bound workflow. Produces exactly the
// bytes the simulator produces, so end-to-end runs can be checked against it.
class Evaluator {
  public:
    Evaluator(const CompiledGraph& compiled, const ProfileStats& profile, EvalOptions opts);

    const TokenSeq& value(NodeId id, std::size_t query);
    // Prompt of an llm call: messages ordered system/assistant/user (stable within
    // a role), each message prefixed by its role marker token.
    TokenSeq prompt(NodeId llm, std::size_t query);

    void put_llm_output(NodeId llm, std::size_t query, TokenSeq out);
    bool has_llm_output(NodeId llm, std::size_t query) const;

    double profile_len_out(NodeId llm) const;

    // Per-query values of every declared workflow output, in outputs order.
    std::map<NodeId, std::vector<TokenSeq>> output_values();

    const CompiledGraph& compiled() const { return *compiled_; }
    const EvalOptions& options() const { return opts_; }

  private:
    const CompiledGraph* compiled_;
    const ProfileStats* profile_;
    EvalOptions opts_;
    std::map<std::pair<NodeId, std::size_t>, TokenSeq> memo_;
};

// Convenience: evaluate all outputs of a bound workflow in one shot.
std::map<NodeId, std::vector<TokenSeq>> eval_outputs(const CompiledGraph& compiled,
                                                     const ProfileStats& profile,
                                                     const EvalOptions& opts);

}  // namespace helios
