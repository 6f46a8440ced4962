#pragma once

// Splices independent edge trajectories and a time change into one
// graph-valued path, and assembles multi-vertex graphs by recursion: each
// branch hanging off the root becomes a sub-process whose local time at the
// root is the composition of the connecting edge's ledger with the branch's
// own clock — composed by index lookup, never re-estimated.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphdiff/bandit_clock.hpp"
#include "graphdiff/edge_dynamics.hpp"
#include "graphdiff/metric_graph.hpp"

namespace graphdiff {

struct GraphPath {
    std::vector<double> times;
    std::vector<GraphPoint> points;
    // Composed per-edge clocks T_i(t_k), one array per edge in g.edges
    // order; they sum to t_k within rounding at every k.
    std::vector<std::vector<double>> leaf_clocks;
};

// Star splice: point at t_k is (active edge, its coordinate at its own clock
// time).  Frozen edges are asserted to sit within the local-time window of
// the shared vertex (kernel_eps plus one diffusive step of slack); a breach
// throws NumericError naming the grid time, since it means the clocks and
// ledgers disagree.  `paths` must cover exactly the edges of g, which must
// all meet at `root`.
GraphPath assemble_star(std::span<const EdgePath> paths, const TimeChange& tc,
                        const MetricGraph& g, int root, double kernel_eps);

// Full construction for any loop-free graph.  Simulates every edge with its
// own RNG stream (keyed by cfg.seed, replica, edge id), recurses over the
// branches at `root` in ascending connecting-edge id, and splices with the
// allocator at each level.  `start` defaults to the root vertex; a start
// elsewhere makes its edge run first until its local time at the near vertex
// first moves.  On a star this reduces exactly to simulate + allocate +
// assemble_star, bit-identically per seed.
GraphPath assemble_recursive(const MetricGraph& g, int root, const SimConfig& cfg,
                             std::uint64_t replica, GraphPoint start = {-1, 0.0},
                             double quantum = kDefaultQuantum);

// The composed per-edge clocks (g.edges order).
inline const std::vector<std::vector<double>>& leaf_clocks(const GraphPath& gp) {
    return gp.leaf_clocks;
}

// Worst-case single-step displacement of edge `e` near `center` (one step of
// drift plus an 8-sigma diffusive move): how far past the local-time window
// a frozen edge can legally rest after its stopping step.
double window_slack(const EdgeSpec& e, double center, double eps, double dt);

// Largest legal distance from a shared vertex at a hop between edges:
// kernel_eps plus the worst window slack over edges at interior vertices.
// The splice guarantees the outgoing edge of every hop is inside this.
double hop_tolerance(const MetricGraph& g, const SimConfig& cfg);

// Diagnostics used by the invariant suite and tests; empty vector = clean.
// Adjacency continuity: consecutive points share an edge, or one of them is
// within `tol` of a vertex common to both edges.
std::vector<std::string> check_adjacency_continuity(const GraphPath& gp,
                                                    const MetricGraph& g, double tol);
// Budget conservation: |sum_i T_i(t_k) - t_k| <= dt at every k.
std::vector<std::string> check_budget(const GraphPath& gp);

}  // namespace graphdiff
