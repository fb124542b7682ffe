#pragma once

#include <map>
#include <string>
#include <vector>

#include "helios/workflow.hpp"

namespace helios {

// Structural content signature of (node, query). Two deterministic nodes with
// equal signatures produce byte-identical values, independent of node ids, so
// signatures drive both duplicate merging and cross-run cache substitution.
using Signature = std::uint64_t;

std::string sig_hex(Signature s);
Signature sig_from_hex(const std::string& hex);

struct SignatureSet {
    // per node: one signature per query
    std::map<NodeId, std::vector<Signature>> sig;
    // tainted: value depends on a nondeterministic llm somewhere upstream (or is
    // one). Tainted nodes may still merge with nodes sharing the same upstream
    // instances, but must never be served from a cross-run cache.
    std::map<NodeId, bool> tainted;

    Signature node_sig(NodeId id) const;  // all-query fold
};

SignatureSet compute_signatures(const CompiledGraph& compiled, const ProfileStats& profile);

}  // namespace helios
