#include "helios/optimizer.hpp"

#include <algorithm>
#include <set>

namespace helios {

namespace {

void erase_node(CompiledGraph& c, NodeId id) {
    c.graph.nodes.erase(id);
    c.bound.erase(id);
    auto& edges = c.graph.edges;
    edges.erase(std::remove_if(edges.begin(), edges.end(),
                               [&](const Edge& e) { return e.from == id || e.to == id; }),
                edges.end());
}

void rewire_producer(CompiledGraph& c, NodeId from, NodeId to) {
    for (Edge& e : c.graph.edges)
        if (e.from == from) e.from = to;
    // llm message parts name producers by id and must stay consistent with edges
    for (auto& [id, n] : c.graph.nodes)
        for (Message& m : n.messages)
            for (MessagePart& p : m.parts)
                if (p.is_ref && p.ref == from) p.ref = to;
}

bool substitutable_kind(OpKind k) {
    return k == OpKind::kFormat || k == OpKind::kLambda || k == OpKind::kLlm;
}

}  // namespace

std::size_t prune_unreachable(CompiledGraph& c) {
    std::set<NodeId> live(c.graph.outputs.begin(), c.graph.outputs.end());
    std::vector<NodeId> stack(live.begin(), live.end());
    while (!stack.empty()) {
        NodeId id = stack.back();
        stack.pop_back();
        for (const Edge& e : c.graph.edges)
            if (e.to == id && live.insert(e.from).second) stack.push_back(e.from);
    }
    std::vector<NodeId> dead;
    for (const auto& [id, n] : c.graph.nodes)
        if (!live.count(id)) dead.push_back(id);
    for (NodeId id : dead) erase_node(c, id);
    return dead.size();
}

std::size_t fold_duplicates(CompiledGraph& c, const ProfileStats& profile) {
    SignatureSet sigs = compute_signatures(c, profile);
    std::map<Signature, std::vector<NodeId>> groups;
    for (const auto& [id, n] : c.graph.nodes) {
        if (n.kind == OpKind::kOutput) continue;
        groups[sigs.node_sig(id)].push_back(id);
    }
    std::size_t merged = 0;
    for (auto& [s, ids] : groups) {
        if (ids.size() < 2) continue;
        NodeId survivor = ids.front();  // ids ascend (map iteration order)
        for (std::size_t i = 1; i < ids.size(); ++i) {
            rewire_producer(c, ids[i], survivor);
            erase_node(c, ids[i]);
            ++merged;
        }
    }
    return merged;
}

std::size_t substitute_cached(CompiledGraph& c, const ProfileStats& profile, PromptCache& cache) {
    SignatureSet sigs = compute_signatures(c, profile);
    std::size_t substituted = 0;
    for (auto& [id, n] : c.graph.nodes) {
        if (!substitutable_kind(n.kind) || sigs.tainted.at(id)) continue;
        const std::vector<Signature>& keys = sigs.sig.at(id);
        bool all_hit = std::all_of(keys.begin(), keys.end(),
                                   [&](Signature s) { return cache.contains(s); });
        if (!all_hit) continue;
        std::vector<TokenSeq> values;
        values.reserve(keys.size());
        for (Signature s : keys) values.push_back(*cache.lookup(s));

        n.kind = OpKind::kCacheFetch;
        n.keys = keys;
        n.fetched = values;
        n.messages.clear();
        n.template_text.clear();
        n.fn.clear();
        n.values.clear();
        c.bound[id] = std::move(values);
        auto& edges = c.graph.edges;
        edges.erase(std::remove_if(edges.begin(), edges.end(),
                                   [&](const Edge& e) { return e.to == id; }),
                    edges.end());
        ++substituted;
    }
    return substituted;
}

OptimizeReport optimize(CompiledGraph& c, const ProfileStats& profile, PromptCache* cache,
                        const OptimizeOptions& opts) {
    OptimizeReport r;
    if (opts.prune) r.pruned += prune_unreachable(c);
    if (opts.merge_duplicates) r.merged = fold_duplicates(c, profile);
    if (opts.cache_substitute && cache) r.substituted = substitute_cached(c, profile, *cache);
    if (opts.prune) r.pruned += prune_unreachable(c);
    validate(c.graph);
    return r;
}

std::size_t harvest_into_cache(const CompiledGraph& c, const ProfileStats& profile, Evaluator& ev,
                               PromptCache& cache) {
    SignatureSet sigs = compute_signatures(c, profile);
    std::size_t inserted = 0;
    for (const auto& [id, n] : c.graph.nodes) {
        if (!substitutable_kind(n.kind) || sigs.tainted.at(id)) continue;
        for (std::size_t b = 0; b < c.batch; ++b) {
            cache.insert(sigs.sig.at(id)[b], ev.value(id, b));
            ++inserted;
        }
    }
    return inserted;
}

}  // namespace helios
