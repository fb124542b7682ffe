#include "helios/signature.hpp"

#include <cstdio>
#include <stdexcept>

namespace helios {

namespace {

std::uint64_t kind_tag(OpKind k) { return 0x100 + static_cast<std::uint64_t>(k); }

}  // namespace

std::string sig_hex(Signature s) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(s));
    return buf;
}

Signature sig_from_hex(const std::string& hex) {
    return std::stoull(hex, nullptr, 16);
}

Signature SignatureSet::node_sig(NodeId id) const {
    auto it = sig.find(id);
    if (it == sig.end()) throw std::runtime_error("no signature for node " + std::to_string(id));
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (Signature s : it->second) h = hash_combine(h, s);
    return h;
}

SignatureSet compute_signatures(const CompiledGraph& compiled, const ProfileStats& profile) {
    const WorkflowGraph& g = compiled.graph;
    SignatureSet out;

    for (NodeId id : topo_sort(g)) {
        const Operator& n = g.op(id);
        std::vector<NodeId> ins = g.inputs_of(id);

        bool taint = false;
        for (NodeId in : ins) taint = taint || out.tainted.at(in);
        if (n.kind == OpKind::kLlm && !n.deterministic) taint = true;
        out.tainted[id] = taint;

        std::vector<Signature>& sigs = out.sig[id];
        sigs.reserve(compiled.batch);
        for (std::size_t b = 0; b < compiled.batch; ++b) {
            std::uint64_t h = hash_combine(0xcbf29ce484222325ull, kind_tag(n.kind));
            switch (n.kind) {
                case OpKind::kInput:
                case OpKind::kData:
                    // content only: two sources bound to the same bytes are the same value
                    h = hash_combine(h, hash_tokens(compiled.bound_value(id, b)));
                    break;
                case OpKind::kCacheFetch:
                    // idempotent: keep the key of the node this fetch replaced, so
                    // consumer signatures do not change across substitution
                    h = n.keys[b];
                    break;
                case OpKind::kOutput:
                    h = hash_combine(h, out.sig.at(ins[0])[b]);
                    break;
                case OpKind::kFormat:
                    h = hash_str(n.template_text, h);
                    for (NodeId in : ins) h = hash_combine(h, out.sig.at(in)[b]);
                    break;
                case OpKind::kLambda:
                    h = hash_str(n.fn, h);
                    for (NodeId in : ins) h = hash_combine(h, out.sig.at(in)[b]);
                    break;
                case OpKind::kLlm: {
                    if (!n.deterministic) {
                        // identity signature: never equal to any other node's
                        h = hash_combine(h, 0xdeadull);
                        h = hash_combine(h, static_cast<std::uint64_t>(id));
                        h = hash_combine(h, b);
                        break;
                    }
                    auto it = profile.find(id);
                    if (it == profile.end())
                        throw std::runtime_error("no profile entry for llm node " + std::to_string(id));
                    h = hash_combine(h, static_cast<std::uint64_t>(it->second.len_out * 1024.0));
                    std::size_t ref_slot = 0;
                    for (const Message& m : n.messages) {
                        h = hash_combine(h, static_cast<std::uint64_t>(m.role));
                        for (const MessagePart& p : m.parts) {
                            if (p.is_ref) {
                                // upstream identity is carried by the child signature;
                                // node ids stay out so structural twins collide
                                h = hash_combine(h, 0x7265f);
                                h = hash_combine(h, out.sig.at(ins[ref_slot])[b]);
                                ++ref_slot;
                            } else {
                                h = hash_str(p.text, h);
                            }
                        }
                    }
                    break;
                }
            }
            sigs.push_back(h);
        }
    }
    return out;
}

}  // namespace helios
