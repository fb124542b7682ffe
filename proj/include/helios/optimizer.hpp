#pragma once

#include "helios/evaluator.hpp"
#include "helios/prompt_cache.hpp"
#include "helios/signature.hpp"
#include "helios/workflow.hpp"

namespace helios {

struct OptimizeOptions {
    bool prune = true;
    bool merge_duplicates = true;
    bool cache_substitute = true;
};

struct OptimizeReport {
    std::size_t pruned = 0;       // nodes removed as unreachable from outputs
    std::size_t merged = 0;       // duplicate nodes folded into a survivor
    std::size_t substituted = 0;  // nodes replaced by cache fetches
};

// Remove every node that cannot reach a declared output. Returns removed count.
std::size_t prune_unreachable(CompiledGraph& c);

// Fold nodes with identical all-query signatures into the smallest-id survivor,
// rewiring consumers. Output nodes never merge (they are distinct deliverables).
std::size_t fold_duplicates(CompiledGraph& c, const ProfileStats& profile);

// Replace untainted compute nodes whose per-query signatures all hit the cache
// with cache_fetch nodes holding the stored values. Node ids are preserved, so
// consumers keep their edges. Lookups refresh cache recency.
std::size_t substitute_cached(CompiledGraph& c, const ProfileStats& profile, PromptCache& cache);

// Rewrite pipeline: prune, fold duplicates, substitute, prune again.
// `cache` may be null (substitution skipped).
OptimizeReport optimize(CompiledGraph& c, const ProfileStats& profile, PromptCache* cache,
                        const OptimizeOptions& opts);

// After a run, store the values of cacheable compute nodes keyed by signature.
// Returns the number of entries inserted. `ev` must hold (or be able to derive)
// every needed value.
std::size_t harvest_into_cache(const CompiledGraph& c, const ProfileStats& profile, Evaluator& ev,
                               PromptCache& cache);

}  // namespace helios
