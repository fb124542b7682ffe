#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "helios/gap_suite.hpp"
#include "helios/scheduler.hpp"

// Times the two parallel kernels against their serial reference paths and
// checks that both produce identical results.

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int hw_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : hw_threads();
    std::cout << std::fixed << std::setprecision(3);
    std::cout << "threads: " << threads << "\n\n";

    // Kernel 1: the benchmark suite, instances fanned across threads.
    {
        const auto instances = helios::default_gap_instances();
        auto t0 = Clock::now();
        helios::GapReport serial = helios::run_gap_suite(instances, 1);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        helios::GapReport parallel = helios::run_gap_suite(instances, threads);
        const double tp = seconds_since(t0);

        bool same = serial.rows.size() == parallel.rows.size();
        for (std::size_t i = 0; same && i < serial.rows.size(); ++i)
            same = serial.rows[i].makespan == parallel.rows[i].makespan &&
                   serial.rows[i].optimum == parallel.rows[i].optimum;
        std::cout << "gap suite   serial " << ts << "s   parallel " << tp << "s   speedup "
                  << (tp > 0 ? ts / tp : 0.0) << "x   results "
                  << (same ? "identical" : "DIFFER") << "\n";
        if (!same) return 1;
    }

    // Kernel 2: one exact search, root frontier fanned across threads.
    {
        helios::SynthSpec spec;
        spec.pattern = "debate";
        spec.agents = 2;
        spec.rounds = 2;
        spec.batch = 2;
        spec.seed = 11;
        helios::SynthWorkload w = helios::generate_workload(spec);
        helios::CompiledGraph cg = helios::bind(w.graph, w.inputs);
        helios::CostParams params;
        params.workers.assign(2, helios::WorkerParams{8192, 0});
        helios::Partition part = helios::partition_workflow(cg, w.profile, 2);
        helios::TemplatedRadixTree tree = helios::build_call_tree(cg, w.profile, part.worker_of);

        helios::OracleOptions serial_opts;
        serial_opts.threads = 1;
        auto t0 = Clock::now();
        helios::OracleResult serial = helios::optimal_schedule(tree, params, serial_opts);
        const double ts = seconds_since(t0);

        helios::OracleOptions parallel_opts;
        parallel_opts.threads = threads;
        t0 = Clock::now();
        helios::OracleResult parallel = helios::optimal_schedule(tree, params, parallel_opts);
        const double tp = seconds_since(t0);

        const bool same =
            serial.makespan == parallel.makespan && serial.schedule == parallel.schedule;
        std::cout << "exact search serial " << ts << "s   parallel " << tp << "s   speedup "
                  << (tp > 0 ? ts / tp : 0.0) << "x   results "
                  << (same ? "identical" : "DIFFER") << "\n";
        if (!same) return 1;
    }
    return 0;
}
