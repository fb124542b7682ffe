#include "helios/gap_suite.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "helios/scheduler.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"

namespace helios {

namespace {

const SchedulerKind kMethods[] = {SchedulerKind::kCacheAware, SchedulerKind::kLspf,
                                  SchedulerKind::kRandom, SchedulerKind::kOpWise,
                                  SchedulerKind::kQueryWise};

struct InstanceOutcome {
    std::vector<GapRow> rows;
    std::uint64_t oracle_nodes = 0;
};

InstanceOutcome run_instance(const GapInstance& inst) {
    SynthWorkload w = generate_workload(inst.spec);
    CompiledGraph cg = helios::bind(w.graph, w.inputs);
    CostParams params;
    params.workers.assign(static_cast<std::size_t>(inst.workers),
                          WorkerParams{inst.capacity, 0.0});

    Partition part = partition_workflow(cg, w.profile, inst.workers);
    TemplatedRadixTree call_tree = build_call_tree(cg, w.profile, part.worker_of);

    InstanceOutcome out;
    std::vector<Schedule> schedules;
    std::vector<double> makespans;
    for (SchedulerKind kind : kMethods) {
        Schedule s;
        if (kind == SchedulerKind::kCacheAware) {
            SoftSchedule soft = plan_operators(cg, w.profile, params, part);
            s = expand_soft_schedule(soft, cg.batch);
        } else {
            s = baseline_schedule(kind, cg, w.profile, call_tree, inst.workers, inst.spec.seed);
        }
        makespans.push_back(evaluate_schedule(call_tree, s, params).makespan);
        schedules.push_back(std::move(s));
    }

    OracleOptions oopts;
    oopts.incumbents = schedules;
    OracleResult opt = optimal_schedule(call_tree, params, oopts);
    out.oracle_nodes = opt.nodes_explored;

    for (std::size_t m = 0; m < schedules.size(); ++m) {
        GapRow row;
        row.instance = inst.name;
        row.method = scheduler_kind_name(kMethods[m]);
        row.makespan = makespans[m];
        row.optimum = opt.makespan;
        row.gap_pct = optimality_gap_pct(makespans[m], opt.makespan);
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace

Schedule schedule_for(SchedulerKind kind, const CompiledGraph& cg, const ProfileStats& profile,
                      const CostParams& params, std::uint64_t seed) {
    const int workers = static_cast<int>(params.workers.size());
    Partition part = partition_workflow(cg, profile, workers);
    if (kind == SchedulerKind::kCacheAware) {
        SoftSchedule soft = plan_operators(cg, profile, params, part);
        return expand_soft_schedule(soft, cg.batch);
    }
    TemplatedRadixTree call_tree = build_call_tree(cg, profile, part.worker_of);
    return baseline_schedule(kind, cg, profile, call_tree, workers, seed);
}

std::vector<GapInstance> default_gap_instances() {
    struct Config {
        const char* tag;
        const char* pattern;
        int agents;
        int rounds;
        std::size_t batch;
    };
    // Seven topologies, each no more than ten calls so the certificate search
    // stays cheap: agent counts 2..4, batches 2 and 4, one worker.
    const Config configs[] = {
        {"mapred2_b2", "mapred", 2, 1, 2},     {"mapred3_b2", "mapred", 3, 1, 2},
        {"debate2x2_b2", "debate", 2, 2, 2},   {"reflect2_b2", "reflect", 2, 1, 2},
        {"iterative4_b2", "iterative", 4, 1, 2}, {"parallel3_b2", "parallel", 3, 1, 2},
        {"iterative2_b4", "iterative", 2, 1, 4},
    };
    std::vector<GapInstance> out;
    int index = 0;
    for (const Config& c : configs) {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            GapInstance inst;
            inst.name = std::string(c.tag) + "_s" + std::to_string(seed);
            inst.spec.pattern = c.pattern;
            inst.spec.agents = c.agents;
            inst.spec.rounds = c.rounds;
            inst.spec.batch = c.batch;
            // Shape knobs drawn per instance so prompts differ in balance.
            // Long prompts and short uniform outputs keep prefill cost and
            // decode delay comparable, which is where ordering policy matters.
            std::mt19937_64 shape(seed * 1000003ull + static_cast<std::uint64_t>(index));
            if (inst.spec.pattern == "debate") {
                // Round crossings serialize on decode delay; keep the statics
                // lean or every policy degenerates to delay hiding.
                inst.spec.system_tokens = 30 + static_cast<int>(shape() % 41);
                inst.spec.context_tokens = 15 + static_cast<int>(shape() % 26);
                inst.spec.question_tokens = 8 + static_cast<int>(shape() % 13);
                inst.spec.len_out = 2 + static_cast<double>(shape() % 2);
            } else {
                inst.spec.system_tokens = 80 + static_cast<int>(shape() % 121);
                inst.spec.context_tokens = 40 + static_cast<int>(shape() % 61);
                inst.spec.question_tokens = 5 + static_cast<int>(shape() % 16);
                inst.spec.len_out = 2 + static_cast<double>(shape() % 4);
            }
            inst.spec.len_jitter = false;
            inst.spec.seed = seed * 7919ull + static_cast<std::uint64_t>(index);
            inst.workers = 1;
            // Small enough that prefill usage and decode delay are the same
            // order of magnitude; with huge capacity every policy degenerates
            // to pure delay hiding and the policies stop separating.
            inst.capacity = 512;
            out.push_back(std::move(inst));
        }
        ++index;
    }
    return out;
}

GapReport run_gap_suite(const std::vector<GapInstance>& instances, int threads) {
    std::vector<InstanceOutcome> outcomes(instances.size());
    std::vector<std::string> errors(instances.size());

#ifdef _OPENMP
    if (threads > 1) {
        const int n = static_cast<int>(instances.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (int i = 0; i < n; ++i) {
            try {
                outcomes[static_cast<std::size_t>(i)] =
                    run_instance(instances[static_cast<std::size_t>(i)]);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
    } else
#endif
    {
        (void)threads;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            try {
                outcomes[i] = run_instance(instances[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    }
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("instance " + instances[i].name + ": " + errors[i]);

    GapReport report;
    for (auto& oc : outcomes) {
        report.oracle_nodes += oc.oracle_nodes;
        for (auto& row : oc.rows) report.rows.push_back(std::move(row));
    }

    for (SchedulerKind kind : kMethods) {
        const std::string name = scheduler_kind_name(kind);
        std::vector<double> gaps;
        for (const GapRow& row : report.rows)
            if (row.method == name) gaps.push_back(row.gap_pct);
        if (gaps.empty()) continue;
        GapAggregate agg;
        agg.method = name;
        double sum = 0;
        agg.min = gaps.front();
        agg.max = gaps.front();
        for (double g : gaps) {
            sum += g;
            agg.min = std::min(agg.min, g);
            agg.max = std::max(agg.max, g);
        }
        agg.avg = sum / static_cast<double>(gaps.size());
        double var = 0;
        for (double g : gaps) var += (g - agg.avg) * (g - agg.avg);
        agg.stddev = std::sqrt(var / static_cast<double>(gaps.size()));
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

std::string gap_rows_csv(const GapReport& report) {
    std::ostringstream os;
    os << "instance,method,makespan,optimum,gap_pct\n";
    os.precision(10);
    for (const GapRow& r : report.rows)
        os << r.instance << ',' << r.method << ',' << r.makespan << ',' << r.optimum << ','
           << r.gap_pct << '\n';
    return os.str();
}

std::string gap_report_json(const GapReport& report) {
    nlohmann::json j;
    j["oracle_nodes"] = report.oracle_nodes;
    j["aggregates"] = nlohmann::json::object();
    for (const GapAggregate& a : report.aggregates) {
        j["aggregates"][a.method] = {
            {"avg", a.avg}, {"stddev", a.stddev}, {"min", a.min}, {"max", a.max}};
    }
    j["rows"] = nlohmann::json::array();
    for (const GapRow& r : report.rows) {
        j["rows"].push_back({{"instance", r.instance},
                             {"method", r.method},
                             {"makespan", r.makespan},
                             {"optimum", r.optimum},
                             {"gap_pct", r.gap_pct}});
    }
    return j.dump(2);
}

}  // namespace helios
