#pragma once

#include <map>
#include <string>
#include <vector>

#include "helios/workflow.hpp"

namespace helios {

// One piece of a prompt template: either a run of concrete tokens or a
// placeholder standing in for another node's (not yet known) value. At call
// level placeholders are specialized per query; at operator level query == -1.
struct SegmentPart {
    bool is_static = true;
    TokenSeq tokens;          // static runs
    NodeId source = kNoNode;  // placeholder: producing node
    int query = -1;           // placeholder specialization (-1 at operator level)
    double est_len = 0.0;     // placeholder expected token count

    double weight() const { return is_static ? static_cast<double>(tokens.size()) : est_len; }

    static SegmentPart statics(TokenSeq t) {
        SegmentPart p;
        p.tokens = std::move(t);
        return p;
    }
    static SegmentPart placeholder(NodeId src, int query, double est) {
        SegmentPart p;
        p.is_static = false;
        p.source = src;
        p.query = query;
        p.est_len = est;
        return p;
    }
    // placeholders match by identity; static parts match by token content
    bool same_placeholder(const SegmentPart& o) const {
        return !is_static && !o.is_static && source == o.source && query == o.query;
    }
};

struct Segment {
    std::vector<SegmentPart> parts;
    double weight() const;
    std::size_t static_token_count() const;
    // merge adjacent statics, drop empty statics
    void normalize();
    bool all_static() const;
};

struct TrtLeaf {
    NodeId op = kNoNode;
    int query = -1;  // -1 at operator level
    int worker = 0;
    double len_out = 0.0;
    bool deterministic = true;
};

struct TrtNode {
    int id = 0;
    int parent = -1;
    int depth = 0;
    Segment seg;
    std::vector<int> children;
    bool is_leaf = false;
    TrtLeaf leaf;
    std::vector<int> preds;  // dependency edges between leaves (pool indices)
    std::vector<int> succs;
};

// Radix tree over prompt templates. Inner nodes carry shared template segments;
// each llm call (or operator) hangs off the tree as a zero-weight leaf whose
// root path spells out its full prompt template.
class TemplatedRadixTree {
  public:
    TemplatedRadixTree();

    int insert(Segment path, TrtLeaf payload);
    void add_dependency(NodeId from_op, int from_query, NodeId to_op, int to_query);

    int root() const { return 0; }
    const TrtNode& node(int i) const { return pool_[static_cast<std::size_t>(i)]; }
    std::size_t node_count() const { return pool_.size(); }
    const std::vector<int>& leaves() const { return leaves_; }
    int leaf_index(NodeId op, int query) const;  // -1 if absent

    double node_weight(int i) const { return pool_[static_cast<std::size_t>(i)].seg.weight(); }
    // Sum of segment weights walking up from `n` (inclusive) to `ancestor`
    // (exclusive). ancestor must lie on n's root path.
    double weight_below(int ancestor, int n) const;
    double root_path_weight(int n) const { return weight_below(root(), n); }
    int lca(int a, int b) const;
    // Prefill usage of scheduling `leaf` right after `prev_leaf` on one worker:
    // full root path when prev_leaf < 0, else the path below the lca.
    double prefill_weight(int prev_leaf, int leaf) const;

    // Root path of a leaf as template parts (concatenated segments).
    std::vector<SegmentPart> root_path_parts(int leaf) const;
    // ancestor chain root..n inclusive
    std::vector<int> path_from_root(int n) const;

    std::string dump() const;
    void check_invariants() const;  // throws on violation

  private:
    int new_node();
    std::vector<TrtNode> pool_;
    std::vector<int> leaves_;
    std::map<std::pair<NodeId, int>, int> leaf_index_;
};

// --- template construction over a bound workflow -------------------------

// Expected token length of a node's value. Operator level (query == -1)
// averages bound inputs across the batch; call level uses the query's actual
// bound lengths. llm nodes use the profiled output length either way.
double estimated_len(const CompiledGraph& c, const ProfileStats& profile, NodeId id, int query);

// Prompt template of one llm operator: statics inlined through format/output
// chains, everything else a placeholder. query == -1 keeps placeholders
// generic; query >= 0 specializes them (and their lengths) per query.
Segment prefix_template(const CompiledGraph& c, const ProfileStats& profile, NodeId llm, int query);

std::vector<NodeId> llm_ops_topo(const WorkflowGraph& g);
// Nearest upstream llm operators, traced through non-llm nodes only.
std::map<NodeId, std::vector<NodeId>> llm_dependencies(const WorkflowGraph& g);

// Operator-level tree: one leaf per llm op.
TemplatedRadixTree build_operator_tree(const CompiledGraph& c, const ProfileStats& profile,
                                       const std::map<NodeId, int>& worker_of);
// Call-level tree: one leaf per (llm op, query).
TemplatedRadixTree build_call_tree(const CompiledGraph& c, const ProfileStats& profile,
                                   const std::map<NodeId, int>& worker_of);

}  // namespace helios
