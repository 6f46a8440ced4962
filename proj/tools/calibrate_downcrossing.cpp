// Measures the downcrossing-estimator calibration constant.
//
// On reflected Brownian motion started at the vertex, the occupation-kernel
// estimator converges to the local time, whose mean at t = 1 is exactly
// E|B_1| = sqrt(2/pi).  The downcrossing estimator counts completed moves
// from distance >= delta down to distance <= delta/2; the constant c with
//   c * delta * E[count(1)] = sqrt(2/pi)
// is what kDowncrossCalibration freezes.  This tool prints c for a range of
// delta so the frozen value can be checked for stability.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "graphdiff/edge_dynamics.hpp"
#include "graphdiff/parallel.hpp"

namespace gd = graphdiff;

int main(int argc, char** argv) {
    std::int64_t n_paths = 10'000;
    double dt = 1e-5;
    double eps = 1e-2;
    std::uint64_t seed = 1;
    int threads = 0;

    CLI::App app{"calibrate the downcrossing local-time constant"};
    app.add_option("--paths", n_paths)->capture_default_str();
    app.add_option("--dt", dt)->capture_default_str();
    app.add_option("--eps", eps, "kernel half-width")->capture_default_str();
    app.add_option("--seed", seed)->capture_default_str();
    app.add_option("--threads", threads)->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const std::vector<double> deltas = {0.02, 0.01, 0.005};

    gd::EdgeSpec edge;
    edge.id = 0;
    edge.endpoints = {0};
    edge.length = gd::kInfiniteLength;

    gd::SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.seed = seed;
    cfg.kernel_eps = eps;

    std::vector<double> kernel_final(n_paths);
    // counts[d][i] = raw downcrossing count of path i at deltas[d]
    std::vector<std::vector<double>> counts(deltas.size(),
                                            std::vector<double>(n_paths));

    gd::for_each_replica(n_paths, threads, [&](std::int64_t i) {
        gd::NormalStream rng(cfg.seed,
                             gd::make_stream(gd::kStreamTagEdgeNoise, std::uint64_t(i), 0));
        const gd::EdgePath p = gd::simulate_reflected_edge(edge, 0.0, cfg, rng);
        kernel_final[i] = gd::local_time_kernel(p, 0.0, cfg.kernel_eps).values.back();
        for (size_t d = 0; d < deltas.size(); ++d) {
            const auto led = gd::local_time_downcrossing(p, 0.0, deltas[d]);
            counts[d][i] =
                led.values.back() / (gd::kDowncrossCalibration * deltas[d]);
        }
    });

    auto mean_se = [&](const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        m /= double(xs.size());
        double v = 0.0;
        for (double x : xs) v += (x - m) * (x - m);
        v /= double(xs.size() - 1);
        return std::pair<double, double>{m, std::sqrt(v / double(xs.size()))};
    };

    const double exact = std::sqrt(2.0 / M_PI);
    const auto [km, kse] = mean_se(kernel_final);
    std::printf("paths=%lld dt=%g eps=%g seed=%llu\n", (long long)n_paths, dt, eps,
                (unsigned long long)seed);
    std::printf("kernel estimator mean %.6f +- %.6f   (exact sqrt(2/pi) = %.6f)\n\n",
                km, kse, exact);
    std::printf("%8s %16s %14s %14s\n", "delta", "delta*count", "c_vs_exact",
                "c_vs_kernel");
    for (size_t d = 0; d < deltas.size(); ++d) {
        const auto [cm, cse] = mean_se(counts[d]);
        const double dc = deltas[d] * cm;
        const double dcse = deltas[d] * cse;
        std::printf("%8g %9.5f+-%.5f %14.5f %14.5f\n", deltas[d], dc, dcse, exact / dc,
                    km / dc);
    }
    std::printf("\nfrozen kDowncrossCalibration = %.6f\n", gd::kDowncrossCalibration);
    return 0;
}
