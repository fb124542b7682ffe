#include "helios/run_pipeline.hpp"

#include <stdexcept>

#include "json.hpp"

namespace helios {

namespace {

CostParams cost_params(const RunSpec& spec) {
    if (spec.workers < 1) throw std::runtime_error("workers must be positive");
    if (spec.capacities.empty()) throw std::runtime_error("no worker capacities given");
    if (spec.capacities.size() != 1 &&
        spec.capacities.size() != static_cast<std::size_t>(spec.workers))
        throw std::runtime_error("capacity list must have one entry or one per worker");
    CostParams params;
    for (int w = 0; w < spec.workers; ++w) {
        const std::size_t cap = spec.capacities.size() == 1
                                    ? spec.capacities[0]
                                    : spec.capacities[static_cast<std::size_t>(w)];
        params.workers.push_back(WorkerParams{static_cast<double>(cap), spec.alpha});
    }
    return params;
}

SimConfig sim_config(const RunSpec& spec) {
    SimConfig cfg;
    for (int w = 0; w < spec.workers; ++w) {
        const std::size_t cap = spec.capacities.size() == 1
                                    ? spec.capacities[0]
                                    : spec.capacities[static_cast<std::size_t>(w)];
        cfg.workers.push_back(SimWorkerConfig{cap, spec.block, spec.prefill_budget});
    }
    cfg.proactive_pin = spec.proactive_pin;
    cfg.pin_threshold = spec.pin_threshold;
    cfg.pin_capacity_frac = spec.pin_capacity_frac;
    cfg.seed = spec.seed;
    cfg.stochastic = spec.stochastic;
    cfg.collect_trace = spec.collect_trace;
    cfg.max_iterations = spec.max_iterations;
    return cfg;
}

}  // namespace

RunResult run_workflow(const WorkflowGraph& g, const InputBatch& inputs,
                       const ProfileStats& profile, const RunSpec& spec, PromptCache* cache) {
    RunResult r;
    r.compiled = helios::bind(g, inputs);

    OptimizeOptions oopts;
    oopts.prune = spec.prune;
    oopts.merge_duplicates = spec.merge_duplicates;
    oopts.cache_substitute = spec.cache_substitute;
    r.rewrite = optimize(r.compiled, profile, cache, oopts);

    const CostParams params = cost_params(spec);
    r.partition = partition_workflow(r.compiled, profile, spec.workers);
    if (spec.scheduler == SchedulerKind::kCacheAware) {
        r.soft = plan_operators(r.compiled, profile, params, r.partition, &r.stats);
        r.schedule = expand_soft_schedule(r.soft, r.compiled.batch);
    }
    TemplatedRadixTree call_tree = build_call_tree(r.compiled, profile, r.partition.worker_of);
    if (spec.scheduler != SchedulerKind::kCacheAware) {
        r.schedule =
            baseline_schedule(spec.scheduler, r.compiled, profile, call_tree, spec.workers,
                              spec.seed);
    }
    r.cost = evaluate_schedule(call_tree, r.schedule, params);

    if (spec.run_sim) r.sim = simulate(r.compiled, profile, call_tree, r.schedule, sim_config(spec));

    if (cache) {
        // Store this run's cacheable values for the next submission. The
        // evaluator synthesizes the same bytes the simulator produced.
        Evaluator ev(r.compiled, profile, EvalOptions{spec.seed, spec.stochastic, false});
        harvest_into_cache(r.compiled, profile, ev, *cache);
    }
    return r;
}

std::string run_report_json(const RunResult& r, const RunSpec& spec) {
    nlohmann::json j;
    j["scheduler"] = scheduler_kind_name(spec.scheduler);
    j["workers"] = spec.workers;
    j["batch"] = r.compiled.batch;
    j["rewrite"] = {{"pruned", r.rewrite.pruned},
                    {"merged", r.rewrite.merged},
                    {"substituted", r.rewrite.substituted}};
    j["makespan"] = r.cost.makespan;
    j["calls"] = r.cost.calls.size();
    nlohmann::json sched = nlohmann::json::array();
    for (const auto& wq : r.schedule) {
        nlohmann::json seq = nlohmann::json::array();
        for (const CallId& c : wq) seq.push_back({{"op", c.op}, {"query", c.query}});
        sched.push_back(std::move(seq));
    }
    j["schedule"] = std::move(sched);
    // wall_seconds deliberately not serialized: reports must be byte-stable
    // across repeated runs with the same flags and seed.
    j["scheduler_stats"] = {{"passes", r.stats.passes},
                            {"forced_emits", r.stats.forced_emits},
                            {"emitted", r.stats.emitted}};
    if (r.sim.iterations > 0) j["sim"] = nlohmann::json::parse(sim_metrics_json(r.sim));
    return j.dump(2);
}

std::vector<AblationRow> run_ablation(const WorkflowGraph& g, const InputBatch& inputs,
                                      const ProfileStats& profile, const RunSpec& base) {
    struct Config {
        const char* name;
        void (*tweak)(RunSpec&);
    };
    const Config configs[] = {
        {"full", [](RunSpec&) {}},
        {"no_proactive_kv", [](RunSpec& s) { s.proactive_pin = false; }},
        {"no_prune_merge",
         [](RunSpec& s) {
             s.prune = false;
             s.merge_duplicates = false;
         }},
        {"no_prompt_cache", [](RunSpec& s) { s.cache_substitute = false; }},
        {"no_cache_aware_sched", [](RunSpec& s) { s.scheduler = SchedulerKind::kRandom; }},
    };

    const auto steps = [](const RunResult& r) {
        return static_cast<std::uint64_t>(r.sim.prefill_computed_tokens + r.sim.decode_tokens);
    };

    std::vector<AblationRow> rows;
    double full_second = 0;
    for (const Config& c : configs) {
        RunSpec spec = base;
        c.tweak(spec);
        // Fresh cross-run cache per config; two identical submissions. Without
        // the prompt cache the second run cannot reuse anything, so it gets no
        // cache object at all.
        PromptCache cache(65536);
        PromptCache* cp = spec.cache_substitute ? &cache : nullptr;
        RunResult first = run_workflow(g, inputs, profile, spec, cp);
        RunResult second = run_workflow(g, inputs, profile, spec, cp);
        AblationRow row;
        row.config = c.name;
        row.first_token_steps = steps(first);
        row.token_steps = steps(second);
        row.first_iterations = first.sim.iterations;
        row.iterations = second.sim.iterations;
        if (std::string(c.name) == "full") full_second = static_cast<double>(row.token_steps);
        rows.push_back(row);
    }
    for (AblationRow& row : rows) {
        if (full_second > 0)
            row.delta_pct =
                100.0 * (static_cast<double>(row.token_steps) - full_second) / full_second;
    }
    return rows;
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const AblationRow& r : rows) {
        j.push_back({{"config", r.config},
                     {"first_token_steps", r.first_token_steps},
                     {"token_steps", r.token_steps},
                     {"first_iterations", r.first_iterations},
                     {"iterations", r.iterations},
                     {"delta_pct", r.delta_pct}});
    }
    return j.dump(2);
}

}  // namespace helios
