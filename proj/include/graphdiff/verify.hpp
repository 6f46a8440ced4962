#pragma once

// Statistical verification of the construction's provable consequences:
// exit-direction law, generator consistency at a probe point, marginal-law
// comparison against closed-form oracles, and the cross-module invariant
// suite.  Everything is embarrassingly parallel over replicas with
// replica-keyed RNG, so results are independent of the thread count.

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "graphdiff/assembler.hpp"
#include "graphdiff/probe.hpp"

namespace graphdiff {

struct ExitExperimentResult {
    double delta = 0.0;
    std::int64_t n_paths = 0;
    std::vector<int> edge_ids;            // incident edges, ascending id
    std::vector<double> frequencies;      // sum to 1 over finished paths
    std::vector<double> ci_halfwidth;     // 99% binomial half-widths
    std::int64_t unfinished = 0;          // horizon exhausted before exit
};

// Starts n_paths at `root` and records which edge the path occupies when its
// tree distance from the root first reaches delta.  Paths are first run on a
// short horizon sized to the typical exit time and retried on 4x longer
// horizons (same streams, so exited replicas are unchanged) up to
// cfg.horizon; stragglers count as unfinished.
ExitExperimentResult exit_direction_experiment(const MetricGraph& g, int root, double delta,
                                               std::int64_t n_paths, const SimConfig& cfg,
                                               double quantum = kDefaultQuantum,
                                               int threads = 0);

struct GeneratorCheckPoint {
    double h = 0.0;
    double estimate = 0.0;   // (mean f(X(h)) - f(x0)) / h
    double se = 0.0;         // Monte Carlo standard error of the estimate
    double deviation = 0.0;  // estimate - target
};

struct GeneratorCheckResult {
    double target = 0.0;
    std::vector<GeneratorCheckPoint> points;  // one per h in probe.h_grid
};

// Validates the probe (gluing condition etc.) and estimates the generator at
// probe.x0 for each h on the grid from n_paths assembled trajectories.
GeneratorCheckResult generator_check(const MetricGraph& g, const GeneratorProbe& probe,
                                     std::int64_t n_paths, const SimConfig& cfg,
                                     double quantum = kDefaultQuantum, int threads = 0);

struct MarginalLawResult {
    double ks = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::size_t n = 0, m = 0;
    double sign_frequency = 0.0;  // fraction of assembled samples on the + side
};

// Two-sample KS between the signed marginal of the assembled process at time
// t and a caller-provided oracle sample.  The sign is + when the path from
// the root to the point leaves through `positive_edge`, and the value is the
// tree distance from the root.
MarginalLawResult marginal_law_test(const MetricGraph& g, int root, int positive_edge,
                                    double t, std::int64_t n_paths,
                                    std::span<const double> oracle_samples,
                                    const SimConfig& cfg, double quantum = kDefaultQuantum,
                                    int threads = 0, double threshold = 0.02);

// Closed-form oracle samplers (exact in law at a fixed time).
// Standard BM at time t: sqrt(t) * N(0,1).
std::vector<double> sample_bm_marginal(std::int64_t n, double t, std::uint64_t seed);
// Skew BM: |B_t| with the sign of the current excursion flipped to + with
// probability p, which at a fixed time reduces to an independent coin.
std::vector<double> sample_skew_bm_marginal(std::int64_t n, double t, double p,
                                            std::uint64_t seed);

struct EquationResiduals {
    double max_budget_residual = 0.0;  // max_k |sum_i T_i(t_k) - t_k| over checks
    double max_ratio_mismatch = 0.0;   // over interior vertices and edge pairs
    double bound = 0.0;                // quantum + max single-step weighted jump
};

// Plugs a finished path's composed clocks back into the characterizing
// equation system: per-edge ledgers are rebuilt from the same RNG streams
// (bit-identical trajectories), then at each t in t_checks the weighted
// local-time ratios at every interior vertex are compared pairwise.
EquationResiduals equation_residuals(const MetricGraph& g, int root, const GraphPath& gp,
                                     const SimConfig& cfg, double quantum,
                                     std::uint64_t replica,
                                     std::span<const double> t_checks);

// Aggregated machine-readable report over n_paths replicas: budget
// conservation, adjacency continuity, equation residuals vs the
// self-calibrated bound, allocator/solver agreement, and the simultaneous-
// flat fraction.  Shape: {experiment, params, statistics, ci, pass}.
nlohmann::json run_invariant_suite(const MetricGraph& g, int root, const SimConfig& cfg,
                                   std::int64_t n_paths, double quantum = kDefaultQuantum,
                                   int threads = 0);

}  // namespace graphdiff
