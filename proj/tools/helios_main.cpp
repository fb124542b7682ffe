#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "helios/gap_suite.hpp"
#include "helios/run_pipeline.hpp"
#include "helios/workflow_io.hpp"

namespace {

using namespace helios;

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_file(path, content);
}

std::string outputs_json(const SimMetrics& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [node, per_query] : m.outputs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const TokenSeq& v : per_query) arr.push_back(v);
        j[std::to_string(node)] = std::move(arr);
    }
    return j.dump(2);
}

struct RunArgs {
    std::string workflow, inputs, profile;
    RunSpec spec;
    std::string scheduler = "cache_aware";
    std::vector<std::size_t> capacities;
    bool no_prune = false, no_merge = false, no_prompt_cache = false, no_pin = false;
    bool no_sim = false;
    std::string cache_file;
    std::string out, format = "json";
    std::string calls_out, trace_out, outputs_out, schedule_out;
};

void add_run(CLI::App& app, RunArgs& a) {
    CLI::App* run = app.add_subcommand("run", "rewrite, schedule and simulate one workflow");
    run->add_option("--workflow", a.workflow, "workflow json")->required();
    run->add_option("--inputs", a.inputs, "inputs json")->required();
    run->add_option("--profile", a.profile, "output-length profile json")->required();
    run->add_option("--workers", a.spec.workers, "worker count");
    run->add_option("--capacity", a.capacities, "kv token capacity, one or per worker")
        ->delimiter(',');
    run->add_option("--scheduler", a.scheduler,
                    "cache_aware|lspf|random|op_wise|query_wise");
    run->add_option("--seed", a.spec.seed, "run seed")->envname("HELIOS_SEED");
    run->add_flag("--stochastic", a.spec.stochastic, "draw output lengths instead of means");
    run->add_flag("--no-prune", a.no_prune, "keep dead nodes");
    run->add_flag("--no-cse", a.no_merge, "keep duplicate nodes");
    run->add_flag("--no-prompt-cache", a.no_prompt_cache, "disable cross-run value reuse");
    run->add_flag("--no-proactive-kv", a.no_pin, "disable static prefix pinning");
    run->add_option("--block", a.spec.block, "kv block tokens");
    run->add_option("--prefill-budget", a.spec.prefill_budget,
                    "prefill tokens per iteration (0 = capacity/8)");
    run->add_option("--pin-threshold", a.spec.pin_threshold, "min pinned prefix tokens");
    run->add_option("--alpha", a.spec.alpha, "latency per token-step (0 = 1/capacity)");
    run->add_option("--cache-file", a.cache_file, "prompt cache to read and update");
    run->add_flag("--no-sim", a.no_sim, "skip the iteration-level simulation");
    run->add_flag("--trace", a.spec.collect_trace, "collect per-iteration rows");
    run->add_option("--out", a.out, "report path ('-' = stdout)");
    run->add_option("--format", a.format, "json|csv report format")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--calls-out", a.calls_out, "per-call csv path");
    run->add_option("--trace-out", a.trace_out, "per-iteration csv path");
    run->add_option("--outputs-out", a.outputs_out, "workflow output values json path");
    run->add_option("--schedule-out", a.schedule_out, "soft schedule json path");
}

int do_run(RunArgs& a) {
    WorkflowGraph g = load_workflow(a.workflow);
    InputBatch inputs = load_inputs(a.inputs);
    ProfileStats profile = load_profile(a.profile);

    a.spec.scheduler = scheduler_kind_from_name(a.scheduler);
    if (!a.capacities.empty()) a.spec.capacities = a.capacities;
    a.spec.prune = !a.no_prune;
    a.spec.merge_duplicates = !a.no_merge;
    a.spec.cache_substitute = !a.no_prompt_cache;
    a.spec.proactive_pin = !a.no_pin;
    a.spec.run_sim = !a.no_sim;
    if (!a.trace_out.empty()) a.spec.collect_trace = true;

    PromptCache cache(65536);
    PromptCache* cp = nullptr;
    if (!a.cache_file.empty() && a.spec.cache_substitute) {
        std::ifstream probe(a.cache_file);
        if (probe.good()) cache = PromptCache::load(a.cache_file);
        cp = &cache;
    }

    RunResult r = run_workflow(g, inputs, profile, a.spec, cp);

    if (cp) cache.save(a.cache_file);
    if (a.format == "csv")
        emit(a.out, sim_calls_csv(r.sim));
    else
        emit(a.out, run_report_json(r, a.spec) + "\n");
    if (!a.calls_out.empty()) emit(a.calls_out, sim_calls_csv(r.sim));
    if (!a.trace_out.empty()) emit(a.trace_out, sim_trace_csv(r.sim));
    if (!a.outputs_out.empty()) emit(a.outputs_out, outputs_json(r.sim) + "\n");
    if (!a.schedule_out.empty()) emit(a.schedule_out, soft_schedule_json(r.soft) + "\n");
    return 0;
}

struct GapArgs {
    int threads = 1;
    std::string out, format = "json";
};

struct GenArgs {
    SynthSpec spec;
    std::string out_workflow, out_inputs, out_profile;
};

struct AblateArgs {
    SynthSpec spec;
    RunSpec run;
    std::string out;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch llm workflow rewriter, scheduler and simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    add_run(app, run_args);

    GapArgs gap_args;
    CLI::App* gap = app.add_subcommand(
        "gap", "score every scheduling policy against certified optima");
    gap->add_option("--threads", gap_args.threads, "instances in parallel");
    gap->add_option("--out", gap_args.out, "report path ('-' = stdout)");
    gap->add_option("--format", gap_args.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    GenArgs gen_args;
    gen_args.spec.pattern = "trading_mini";
    CLI::App* gen = app.add_subcommand("gen", "emit a synthetic workflow to files");
    gen->add_option("--pattern", gen_args.spec.pattern,
                    "mapred|debate|reflect|iterative|parallel|trading_mini");
    gen->add_option("--agents", gen_args.spec.agents, "agent count");
    gen->add_option("--rounds", gen_args.spec.rounds, "debate rounds");
    gen->add_option("--batch", gen_args.spec.batch, "queries per submission");
    gen->add_option("--seed", gen_args.spec.seed, "generator seed")->envname("HELIOS_SEED");
    gen->add_option("--system-tokens", gen_args.spec.system_tokens, "system prompt words");
    gen->add_option("--context-tokens", gen_args.spec.context_tokens, "context words");
    gen->add_option("--question-tokens", gen_args.spec.question_tokens, "question words");
    gen->add_option("--len-out", gen_args.spec.len_out, "mean output tokens");
    gen->add_option("--out-workflow", gen_args.out_workflow, "workflow json path")->required();
    gen->add_option("--out-inputs", gen_args.out_inputs, "inputs json path")->required();
    gen->add_option("--out-profile", gen_args.out_profile, "profile json path")->required();

    AblateArgs ab_args;
    ab_args.spec.pattern = "trading_mini";
    ab_args.spec.batch = 4;
    CLI::App* ab = app.add_subcommand(
        "ablate", "feature knockouts on a repeat-submission workload");
    ab->add_option("--pattern", ab_args.spec.pattern, "workload pattern");
    ab->add_option("--agents", ab_args.spec.agents, "agent count");
    ab->add_option("--batch", ab_args.spec.batch, "queries per submission");
    ab->add_option("--seed", ab_args.run.seed, "run seed")->envname("HELIOS_SEED");
    ab->add_option("--workers", ab_args.run.workers, "worker count");
    ab->add_option("--capacity", ab_args.run.capacities, "kv token capacity")->delimiter(',');
    ab->add_option("--block", ab_args.run.block, "kv block tokens");
    ab->add_option("--prefill-budget", ab_args.run.prefill_budget,
                   "prefill tokens per iteration (0 = capacity/8)");
    ab->add_option("--out", ab_args.out, "report path ('-' = stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return do_run(run_args);
        if (app.got_subcommand("gap")) {
            GapReport report = run_gap_suite(default_gap_instances(), gap_args.threads);
            emit(gap_args.out, gap_args.format == "csv" ? gap_rows_csv(report)
                                                        : gap_report_json(report) + "\n");
            return 0;
        }
        if (app.got_subcommand("gen")) {
            SynthWorkload w = generate_workload(gen_args.spec);
            save_workflow(w.graph, gen_args.out_workflow);
            save_inputs(w.inputs, gen_args.out_inputs);
            save_profile(w.profile, gen_args.out_profile);
            return 0;
        }
        if (app.got_subcommand("ablate")) {
            ab_args.spec.seed = ab_args.run.seed;
            SynthWorkload w = generate_workload(ab_args.spec);
            std::vector<AblationRow> rows =
                run_ablation(w.graph, w.inputs, w.profile, ab_args.run);
            emit(ab_args.out, ablation_json(rows) + "\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
