#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "helios/gap_suite.hpp"
#include "helios/oracle.hpp"
#include "helios/scheduler.hpp"
#include "helios/workload_gen.hpp"
#include "support/brute_force.hpp"
#include "support/builders.hpp"

using namespace helios;
using namespace helios::testing;

namespace {

Segment statics_seg(const std::string& text) {
    Segment s;
    s.parts.push_back(SegmentPart::statics(tokenize(text)));
    s.normalize();
    return s;
}

TrtLeaf call(NodeId op, int query, int worker, double len_out) {
    TrtLeaf l;
    l.op = op;
    l.query = query;
    l.worker = worker;
    l.len_out = len_out;
    return l;
}

struct SmallInstance {
    TemplatedRadixTree tree;
    CostParams params;
};

// Random call trees small enough to brute force: 3-6 calls, 1-3 workers,
// random shared prefixes and a sprinkle of dependency edges.
SmallInstance random_small_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    SmallInstance inst;
    const int calls = 3 + static_cast<int>(rng() % 4);
    const int workers = 1 + static_cast<int>(rng() % 3);
    const int prefixes = 1 + static_cast<int>(rng() % 2);
    std::vector<std::string> heads;
    for (int p = 0; p < prefixes; ++p) {
        std::string h;
        const int len = 3 + static_cast<int>(rng() % 8);
        for (int t = 0; t < len; ++t) h += "h" + std::to_string(p) + "_" + std::to_string(t) + " ";
        heads.push_back(h);
    }
    for (int i = 0; i < calls; ++i) {
        std::string text = heads[rng() % heads.size()];
        const int tail = 1 + static_cast<int>(rng() % 4);
        for (int t = 0; t < tail; ++t) text += "c" + std::to_string(i) + "_" + std::to_string(t) + " ";
        inst.tree.insert(statics_seg(text),
                         call(i + 1, 0, 0, 1 + static_cast<double>(rng() % 4)));
    }
    // forward edges only => acyclic
    for (int i = 1; i <= calls; ++i)
        for (int j = i + 1; j <= calls; ++j)
            if (rng() % 4 == 0) inst.tree.add_dependency(i, 0, j, 0);
    for (int w = 0; w < workers; ++w)
        inst.params.workers.push_back(WorkerParams{32 + static_cast<double>(rng() % 64), 0.0});
    return inst;
}

}  // namespace

TEST_CASE("branch and bound matches exhaustive enumeration on small instances") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        SmallInstance inst = random_small_instance(seed);
        BruteResult brute = brute_force_optimum(inst.tree, inst.params);
        OracleResult oracle = optimal_schedule(inst.tree, inst.params);
        INFO("seed ", seed);
        CHECK(oracle.makespan == doctest::Approx(brute.makespan).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("oracle with incumbents never returns worse than the incumbent") {
    SmallInstance inst = random_small_instance(123);
    // trivial incumbent: everything on worker 0 in id order
    Schedule incumbent(inst.params.workers.size());
    for (int leaf : inst.tree.leaves()) {
        const TrtLeaf& l = inst.tree.node(leaf).leaf;
        incumbent[0].push_back(CallId{l.op, l.query});
    }
    const double t_inc = evaluate_schedule(inst.tree, incumbent, inst.params).makespan;
    OracleOptions opts;
    opts.incumbents.push_back(incumbent);
    OracleResult r = optimal_schedule(inst.tree, inst.params, opts);
    CHECK(r.makespan <= t_inc + 1e-9);
    CHECK(evaluate_schedule(inst.tree, r.schedule, inst.params).makespan ==
          doctest::Approx(r.makespan));
}

TEST_CASE("oracle is deterministic and thread-count independent") {
    SmallInstance inst = random_small_instance(77);
    OracleOptions serial;
    serial.threads = 1;
    OracleOptions parallel;
    parallel.threads = 4;
    OracleResult a = optimal_schedule(inst.tree, inst.params, serial);
    OracleResult b = optimal_schedule(inst.tree, inst.params, parallel);
    CHECK(a.makespan == doctest::Approx(b.makespan).epsilon(1e-12));
    CHECK(a.schedule == b.schedule);
}

TEST_CASE("node budget overflow raises an error") {
    // 12 calls, 3 workers, tiny budget: must trip the cap, not hang
    TemplatedRadixTree t;
    for (int i = 1; i <= 12; ++i)
        t.insert(statics_seg("p q r s tail" + std::to_string(i)), call(i, 0, 0, 2));
    CostParams params{{WorkerParams{64, 0}, WorkerParams{64, 0}, WorkerParams{64, 0}}};
    OracleOptions opts;
    opts.node_budget = 500;
    CHECK_THROWS_AS(optimal_schedule(t, params, opts), std::runtime_error);
}

TEST_CASE("gap formula") {
    CHECK(optimality_gap_pct(110, 100) == doctest::Approx(10.0));
    CHECK(optimality_gap_pct(100, 100) == doctest::Approx(0.0));
    CHECK(optimality_gap_pct(100 - 1e-12, 100) == doctest::Approx(0.0));  // clamp
    CHECK_THROWS_AS(optimality_gap_pct(1, 0), std::runtime_error);
}

TEST_CASE("baselines cover every call exactly once and respect worker count") {
    SynthWorkload w = generate_workload({"mapred", 3, 1, 3, 60, 30, 10, 4, true, 21});
    CompiledGraph c = helios::bind(w.graph, w.inputs);
    Partition p = partition_workflow(c, w.profile, 2);
    TemplatedRadixTree tree = build_call_tree(c, w.profile, p.worker_of);
    CostParams params{{WorkerParams{1024, 0}, WorkerParams{1024, 0}}};
    for (SchedulerKind kind : {SchedulerKind::kQueryWise, SchedulerKind::kOpWise,
                               SchedulerKind::kRandom, SchedulerKind::kLspf}) {
        Schedule sigma = baseline_schedule(kind, c, w.profile, tree, 2, 9);
        REQUIRE(sigma.size() == 2);
        std::set<std::pair<NodeId, int>> seen;
        for (const auto& seq : sigma)
            for (const CallId& id : seq) seen.insert({id.op, id.query});
        CHECK(seen.size() == tree.leaves().size());
        // evaluates without deadlock
        CHECK(evaluate_schedule(tree, sigma, params).makespan > 0);
    }
}

TEST_CASE("baseline names round trip") {
    for (SchedulerKind kind : {SchedulerKind::kCacheAware, SchedulerKind::kQueryWise,
                               SchedulerKind::kOpWise, SchedulerKind::kRandom,
                               SchedulerKind::kLspf})
        CHECK(scheduler_kind_from_name(scheduler_kind_name(kind)) == kind);
    CHECK_THROWS_AS(scheduler_kind_from_name("fancy"), std::runtime_error);
}

TEST_CASE("gap suite rows are consistent and thread-count independent") {
    // two small instances keep the oracle cheap
    std::vector<GapInstance> instances;
    GapInstance a;
    a.name = "mini_mapred";
    a.spec = SynthSpec{"mapred", 2, 1, 2, 40, 20, 6, 3, false, 3};
    a.capacity = 512;
    GapInstance b;
    b.name = "mini_reflect";
    b.spec = SynthSpec{"reflect", 2, 1, 2, 40, 20, 6, 3, false, 4};
    b.capacity = 512;
    instances = {a, b};

    GapReport serial = run_gap_suite(instances, 1);
    GapReport parallel = run_gap_suite(instances, 4);
    CHECK(gap_report_json(serial) == gap_report_json(parallel));

    REQUIRE(serial.rows.size() == instances.size() * 5);
    for (const GapRow& row : serial.rows) {
        CHECK(row.optimum > 0);
        CHECK(row.makespan >= row.optimum - 1e-9);
        CHECK(row.gap_pct == doctest::Approx(optimality_gap_pct(row.makespan, row.optimum)));
    }
    // aggregates reflect the rows
    for (const GapAggregate& agg : serial.aggregates) {
        double sum = 0;
        int n = 0;
        for (const GapRow& row : serial.rows)
            if (row.method == agg.method) {
                sum += row.gap_pct;
                ++n;
            }
        REQUIRE(n == static_cast<int>(instances.size()));
        CHECK(agg.avg == doctest::Approx(sum / n));
    }
    // csv has a header plus one line per row
    const std::string csv = gap_rows_csv(serial);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) ==
          1 + serial.rows.size());
}

TEST_CASE("default instance set matches the advertised size") {
    std::vector<GapInstance> instances = default_gap_instances();
    CHECK(instances.size() == 28);  // seven configurations, four seeds
    std::set<std::string> names;
    for (const GapInstance& inst : instances) {
        names.insert(inst.name);
        CHECK(inst.workers == 1);
        CHECK(inst.spec.batch >= 2);
        CHECK(inst.spec.agents >= 2);
        CHECK(inst.spec.agents <= 4);
    }
    CHECK(names.size() == 28);
}
