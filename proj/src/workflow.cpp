#include "helios/workflow.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace helios {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// Collect the distinct {k} slot indices used by a format template.
// Throws on malformed braces or non-numeric slot names.
std::set<int> template_slots(const std::string& tmpl, NodeId id) {
    std::set<int> slots;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        std::size_t close = tmpl.find('}', i);
        if (close == std::string::npos) fail("format node " + std::to_string(id) + ": unbalanced '{'");
        std::string inner = tmpl.substr(i + 1, close - i - 1);
        if (inner.empty() || inner.find_first_not_of("0123456789") != std::string::npos)
            fail("format node " + std::to_string(id) + ": bad slot '{" + inner + "}'");
        slots.insert(std::stoi(inner));
        i = close;
    }
    return slots;
}

}  // namespace

const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::kData: return "data";
        case OpKind::kInput: return "input";
        case OpKind::kOutput: return "output";
        case OpKind::kFormat: return "format";
        case OpKind::kLambda: return "lambda";
        case OpKind::kLlm: return "llm";
        case OpKind::kCacheFetch: return "cache_fetch";
    }
    return "?";
}

OpKind op_kind_from_name(const std::string& name) {
    if (name == "data") return OpKind::kData;
    if (name == "input") return OpKind::kInput;
    if (name == "output") return OpKind::kOutput;
    if (name == "format") return OpKind::kFormat;
    if (name == "lambda") return OpKind::kLambda;
    if (name == "llm") return OpKind::kLlm;
    if (name == "cache_fetch") return OpKind::kCacheFetch;
    fail("unknown operator kind '" + name + "'");
}

const char* msg_role_name(MsgRole r) {
    switch (r) {
        case MsgRole::kSystem: return "system";
        case MsgRole::kAssistant: return "assistant";
        case MsgRole::kUser: return "user";
    }
    return "?";
}

MsgRole msg_role_from_name(const std::string& name) {
    if (name == "system") return MsgRole::kSystem;
    if (name == "assistant") return MsgRole::kAssistant;
    if (name == "user") return MsgRole::kUser;
    fail("unknown message role '" + name + "'");
}

const Operator& WorkflowGraph::op(NodeId id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) fail("no node " + std::to_string(id));
    return it->second;
}

Operator& WorkflowGraph::op(NodeId id) {
    auto it = nodes.find(id);
    if (it == nodes.end()) fail("no node " + std::to_string(id));
    return it->second;
}

std::vector<NodeId> WorkflowGraph::inputs_of(NodeId id) const {
    int max_slot = -1;
    for (const Edge& e : edges)
        if (e.to == id) max_slot = std::max(max_slot, e.slot);
    std::vector<NodeId> in(static_cast<std::size_t>(max_slot + 1), kNoNode);
    for (const Edge& e : edges)
        if (e.to == id) in[static_cast<std::size_t>(e.slot)] = e.from;
    return in;
}

std::vector<NodeId> WorkflowGraph::consumers_of(NodeId id) const {
    std::set<NodeId> out;
    for (const Edge& e : edges)
        if (e.from == id) out.insert(e.to);
    return {out.begin(), out.end()};
}

void validate(const WorkflowGraph& g) {
    for (const auto& [id, node] : g.nodes) {
        if (id < 0) fail("negative node id " + std::to_string(id));
        if (node.id != id) fail("node " + std::to_string(id) + ": id field mismatch");
    }
    std::map<NodeId, std::set<int>> slots_seen;
    for (const Edge& e : g.edges) {
        if (!g.has(e.from)) fail("edge from missing node " + std::to_string(e.from));
        if (!g.has(e.to)) fail("edge to missing node " + std::to_string(e.to));
        if (e.slot < 0) fail("edge into " + std::to_string(e.to) + ": negative slot");
        if (!slots_seen[e.to].insert(e.slot).second)
            fail("node " + std::to_string(e.to) + ": duplicate input slot " + std::to_string(e.slot));
    }
    for (const auto& [id, slots] : slots_seen) {
        if (*slots.rbegin() != static_cast<int>(slots.size()) - 1)
            fail("node " + std::to_string(id) + ": input slots not dense");
    }

    for (const auto& [id, node] : g.nodes) {
        std::vector<NodeId> ins = g.inputs_of(id);
        std::string where = std::string(op_kind_name(node.kind)) + " node " + std::to_string(id);
        switch (node.kind) {
            case OpKind::kData:
                if (!ins.empty()) fail(where + ": takes no inputs");
                if (node.values.empty()) fail(where + ": empty value batch");
                break;
            case OpKind::kInput:
                if (!ins.empty()) fail(where + ": takes no inputs");
                if (node.input_name.empty()) fail(where + ": missing name");
                break;
            case OpKind::kCacheFetch:
                if (!ins.empty()) fail(where + ": takes no inputs");
                if (node.fetched.empty() || node.keys.size() != node.fetched.size())
                    fail(where + ": keys/values mismatch");
                break;
            case OpKind::kOutput:
                if (ins.size() != 1) fail(where + ": needs exactly one input");
                break;
            case OpKind::kFormat: {
                std::set<int> used = template_slots(node.template_text, id);
                for (int s : used)
                    if (s >= static_cast<int>(ins.size()))
                        fail(where + ": template slot {" + std::to_string(s) + "} has no edge");
                break;
            }
            case OpKind::kLambda:
                if (!lambda_known(node.fn)) fail(where + ": unknown fn '" + node.fn + "'");
                if (ins.empty()) fail(where + ": needs at least one input");
                break;
            case OpKind::kLlm: {
                if (node.messages.empty()) fail(where + ": no messages");
                // ref parts, in message order, must line up with the slot-ordered in-edges
                std::vector<NodeId> refs;
                for (const Message& m : node.messages)
                    for (const MessagePart& p : m.parts)
                        if (p.is_ref) refs.push_back(p.ref);
                if (refs != ins) fail(where + ": message refs do not match input edges");
                break;
            }
        }
    }
    for (NodeId out : g.outputs) {
        if (!g.has(out)) fail("outputs list names missing node " + std::to_string(out));
        if (g.op(out).kind != OpKind::kOutput)
            fail("outputs list entry " + std::to_string(out) + " is not an output node");
    }
    topo_sort(g);  // throws on cycles
}

std::vector<NodeId> topo_sort(const WorkflowGraph& g) {
    std::map<NodeId, int> indeg;
    std::map<NodeId, std::set<NodeId>> succ;
    for (const auto& [id, node] : g.nodes) indeg[id] = 0;
    for (const Edge& e : g.edges)
        if (succ[e.from].insert(e.to).second) ++indeg[e.to];

    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<NodeId>> ready;
    for (const auto& [id, d] : indeg)
        if (d == 0) ready.push(id);

    std::vector<NodeId> order;
    while (!ready.empty()) {
        NodeId id = ready.top();
        ready.pop();
        order.push_back(id);
        for (NodeId s : succ[id])
            if (--indeg[s] == 0) ready.push(s);
    }
    if (order.size() != g.nodes.size()) fail("workflow graph has a cycle");
    return order;
}

const TokenSeq& CompiledGraph::bound_value(NodeId id, std::size_t query) const {
    auto it = bound.find(id);
    if (it == bound.end()) fail("node " + std::to_string(id) + " has no bound value");
    if (query >= it->second.size()) fail("query index out of range for node " + std::to_string(id));
    return it->second[query];
}

CompiledGraph bind(const WorkflowGraph& g, const InputBatch& inputs) {
    validate(g);
    CompiledGraph c;
    c.graph = g;

    std::size_t batch = 0;
    for (const auto& [name, vals] : inputs) {
        if (vals.empty()) fail("input '" + name + "': empty batch");
        if (batch == 0) batch = vals.size();
        if (vals.size() != batch) fail("input '" + name + "': batch size mismatch");
    }
    if (batch == 0) batch = 1;  // workflows without input nodes run a single query
    c.batch = batch;

    // One deterministic mint counter per bind: node id order, then batch order.
    std::uint64_t mint = 0;
    auto resolve = [&](const ValueSpec& v) {
        return v.synthetic ? synthetic_tokens(v.token_count, mint) : tokenize(v.text);
    };

    for (const auto& [id, node] : g.nodes) {
        switch (node.kind) {
            case OpKind::kInput: {
                auto it = inputs.find(node.input_name);
                if (it == inputs.end()) fail("no binding for input '" + node.input_name + "'");
                std::vector<TokenSeq> vals;
                vals.reserve(batch);
                for (const ValueSpec& v : it->second) vals.push_back(resolve(v));
                c.bound[id] = std::move(vals);
                break;
            }
            case OpKind::kData: {
                if (node.values.size() != 1 && node.values.size() != batch)
                    fail("data node " + std::to_string(id) + ": batch size " +
                         std::to_string(node.values.size()) + " incompatible with " +
                         std::to_string(batch));
                std::vector<TokenSeq> vals;
                vals.reserve(batch);
                for (std::size_t b = 0; b < batch; ++b)
                    vals.push_back(resolve(node.values[node.values.size() == 1 ? 0 : b]));
                c.bound[id] = std::move(vals);
                break;
            }
            case OpKind::kCacheFetch: {
                if (node.fetched.size() != batch)
                    fail("cache_fetch node " + std::to_string(id) + ": batch size mismatch");
                c.bound[id] = node.fetched;
                break;
            }
            default:
                break;
        }
    }
    return c;
}

TokenSeq apply_lambda(const std::string& fn, const std::vector<TokenSeq>& ins) {
    if (ins.empty()) fail("lambda '" + fn + "': no inputs");
    if (fn == "identity") return ins[0];
    if (fn == "concat") {
        TokenSeq out;
        for (const TokenSeq& s : ins) out.insert(out.end(), s.begin(), s.end());
        return out;
    }
    if (fn.rfind("truncate:", 0) == 0) {
        std::size_t n = std::stoul(fn.substr(9));
        TokenSeq out = ins[0];
        if (out.size() > n) out.resize(n);
        return out;
    }
    fail("unknown lambda fn '" + fn + "'");
}

double lambda_estimate(const std::string& fn, const std::vector<double>& in_lens) {
    if (in_lens.empty()) fail("lambda '" + fn + "': no inputs");
    if (fn == "identity") return in_lens[0];
    if (fn == "concat") {
        double s = 0;
        for (double v : in_lens) s += v;
        return s;
    }
    if (fn.rfind("truncate:", 0) == 0)
        return std::min(in_lens[0], static_cast<double>(std::stoul(fn.substr(9))));
    fail("unknown lambda fn '" + fn + "'");
}

bool lambda_known(const std::string& fn) {
    if (fn == "identity" || fn == "concat") return true;
    if (fn.rfind("truncate:", 0) == 0) {
        std::string n = fn.substr(9);
        return !n.empty() && n.find_first_not_of("0123456789") == std::string::npos;
    }
    return false;
}

}  // namespace helios
