#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "helios/tokens.hpp"

namespace helios {

using NodeId = std::int64_t;
inline constexpr NodeId kNoNode = -1;

enum class OpKind { kData, kInput, kOutput, kFormat, kLambda, kLlm, kCacheFetch };

const char* op_kind_name(OpKind k);
OpKind op_kind_from_name(const std::string& name);

enum class MsgRole { kSystem, kAssistant, kUser };

const char* msg_role_name(MsgRole r);
MsgRole msg_role_from_name(const std::string& name);

// A message part is either literal text or a reference to another node's value.
struct MessagePart {
    bool is_ref = false;
    std::string text;
    NodeId ref = kNoNode;
};

struct Message {
    MsgRole role = MsgRole::kUser;
    std::vector<MessagePart> parts;
};

// Batch value entry: literal text, or an opaque payload of `token_count` fresh tokens.
struct ValueSpec {
    bool synthetic = false;
    std::string text;
    std::size_t token_count = 0;
};

struct Operator {
    NodeId id = kNoNode;
    OpKind kind = OpKind::kData;

    std::vector<ValueSpec> values;  // data: literal batch (size 1 broadcasts to B)
    std::string input_name;         // input
    std::string template_text;      // format: literal text with {0},{1},... slots
    std::string fn;                 // lambda: registry name ("identity", "concat", "truncate:N")
    std::vector<Message> messages;  // llm
    bool deterministic = true;      // llm

    // cache_fetch: per-query signature keys and the resolved values they map to
    std::vector<std::uint64_t> keys;
    std::vector<TokenSeq> fetched;
};

struct Edge {
    NodeId from = kNoNode;
    NodeId to = kNoNode;
    int slot = 0;
};

struct WorkflowGraph {
    std::map<NodeId, Operator> nodes;  // ordered: iteration order is id order everywhere
    std::vector<Edge> edges;
    std::vector<NodeId> outputs;

    bool has(NodeId id) const { return nodes.count(id) != 0; }
    const Operator& op(NodeId id) const;
    Operator& op(NodeId id);

    // slot-ordered producer list feeding `id` (slots are dense, checked by validate)
    std::vector<NodeId> inputs_of(NodeId id) const;
    std::vector<NodeId> consumers_of(NodeId id) const;
};

// Throws std::runtime_error naming the offending node/edge.
void validate(const WorkflowGraph& g);

// Deterministic Kahn order (min node id first among ready). Throws on cycles.
std::vector<NodeId> topo_sort(const WorkflowGraph& g);

struct LlmProfile {
    double len_out = 0.0;
};
using ProfileStats = std::map<NodeId, LlmProfile>;

// A workflow bound to a concrete batch of queries.
struct CompiledGraph {
    WorkflowGraph graph;
    std::size_t batch = 1;
    // Concrete per-query tokens for nodes whose value needs no evaluation:
    // input (bound), data (literal or minted), cache_fetch (stored).
    std::map<NodeId, std::vector<TokenSeq>> bound;

    const TokenSeq& bound_value(NodeId id, std::size_t query) const;
};

using InputBatch = std::map<std::string, std::vector<ValueSpec>>;

// Resolve input bindings and data literals into per-query token sequences.
// All input lists must share one batch size; data batches must have size 1 or B.
CompiledGraph bind(const WorkflowGraph& g, const InputBatch& inputs);

// Identity of one LLM call: operator x query index.
struct CallId {
    NodeId op = kNoNode;
    int query = 0;

    friend bool operator==(const CallId& a, const CallId& b) {
        return a.op == b.op && a.query == b.query;
    }
    friend bool operator<(const CallId& a, const CallId& b) {
        if (a.op != b.op) return a.op < b.op;
        return a.query < b.query;
    }
};

// Lambda registry.
TokenSeq apply_lambda(const std::string& fn, const std::vector<TokenSeq>& ins);
double lambda_estimate(const std::string& fn, const std::vector<double>& in_lens);
bool lambda_known(const std::string& fn);

}  // namespace helios
