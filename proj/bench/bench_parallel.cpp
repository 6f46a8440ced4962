// Compares the serial and OpenMP replica drivers on the star-assembly
// workload and asserts the results are bit-identical: the parallel path may
// only change wall time, never a single double.
//
// Usage: bench_parallel [n_replicas] [dt]

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "graphdiff/assembler.hpp"
#include "graphdiff/graph_config.hpp"
#include "graphdiff/parallel.hpp"

using namespace graphdiff;
using clock_type = std::chrono::steady_clock;

namespace {

// Final point and clock sums of one assembled replica: a value sensitive to
// every step of the trajectory and the allocation.
struct Fingerprint {
    int edge = -1;
    double coord = 0.0;
    std::vector<double> clock_totals;

    bool operator==(const Fingerprint&) const = default;
};

double run(const MetricGraph& g, int root, const SimConfig& cfg, std::int64_t n,
           int threads, bool serial, std::vector<Fingerprint>& out) {
    out.assign(size_t(n), {});
    const auto body = [&](std::int64_t r) {
        const GraphPath gp = assemble_recursive(g, root, cfg, std::uint64_t(r));
        Fingerprint fp;
        fp.edge = gp.points.back().edge;
        fp.coord = gp.points.back().coord;
        for (const auto& clock : gp.leaf_clocks) fp.clock_totals.push_back(clock.back());
        out[size_t(r)] = std::move(fp);
    };
    const auto t0 = clock_type::now();
    if (serial)
        for_each_replica_serial(n, body);
    else
        for_each_replica(n, threads, body);
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::int64_t n = argc > 1 ? std::atoll(argv[1]) : 200;
    const double dt = argc > 2 ? std::atof(argv[2]) : 1e-4;

    const MetricGraph g = load_graph(std::string(GRAPHDIFF_CONFIG_DIR) + "/star3.json");
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = 1.0;

    std::vector<Fingerprint> serial_fp, parallel_fp;
    const double t_serial = run(g, 0, cfg, n, 0, true, serial_fp);
    std::printf("serial   : %3lld replicas, dt=%g, %7.3f s (%6.1f replicas/s)\n",
                (long long)n, dt, t_serial, double(n) / t_serial);

    for (int threads : {1, 2, hardware_threads()}) {
        const double t = run(g, 0, cfg, n, threads, false, parallel_fp);
        const bool same = parallel_fp == serial_fp;
        std::printf("openmp %2d: %3lld replicas, dt=%g, %7.3f s (%6.1f replicas/s), "
                    "speedup %.2fx, %s\n",
                    threads, (long long)n, dt, t, double(n) / t, t_serial / t,
                    same ? "bit-identical to serial" : "RESULTS DIFFER");
        if (!same) return 1;
    }
    return 0;
}
