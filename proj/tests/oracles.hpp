#pragma once

// Independent reference implementations used only by tests.  Each one takes
// the dumbest correct route (exhaustive enumeration, brute-force grids,
// closed-form sampling) so it shares no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "graphdiff/metric_graph.hpp"
#include "graphdiff/rng.hpp"

namespace test_oracle {

// Unique vertex-to-vertex path length by depth-first search over edges,
// trying every edge incident to the frontier vertex (works because the graph
// is a tree; infinite edges never connect two vertices).
inline double dfs_vertex_distance(const graphdiff::MetricGraph& g, int from, int to) {
    if (from == to) return 0.0;
    struct Frame {
        int vertex;
        double dist;
    };
    std::vector<Frame> stack{{from, 0.0}};
    std::set<int> seen{from};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        for (const auto& e : g.edges) {
            if (e.half_infinite() || !e.touches(f.vertex)) continue;
            const int other = e.endpoints[0] == f.vertex ? e.endpoints[1] : e.endpoints[0];
            if (seen.count(other)) continue;
            if (other == to) return f.dist + e.length;
            seen.insert(other);
            stack.push_back({other, f.dist + e.length});
        }
    }
    return std::numeric_limits<double>::infinity();
}

// Distance between two graph points: same-edge shortcut or the best way of
// leaving through the edges' endpoints, each case enumerated explicitly.
inline double point_distance(const graphdiff::MetricGraph& g, graphdiff::GraphPoint a,
                             graphdiff::GraphPoint b) {
    const graphdiff::EdgeSpec* ea = g.edge_by_id(a.edge);
    const graphdiff::EdgeSpec* eb = g.edge_by_id(b.edge);
    double best = std::numeric_limits<double>::infinity();
    if (a.edge == b.edge) best = std::abs(a.coord - b.coord);
    for (int va : ea->endpoints)
        for (int vb : eb->endpoints) {
            const double d = std::abs(a.coord - ea->vertex_coord(va)) +
                             dfs_vertex_distance(g, va, vb) +
                             std::abs(b.coord - eb->vertex_coord(vb));
            best = std::min(best, d);
        }
    return best;
}

// Brute-force closest coordinate on `edge` to point p: scan a uniform grid
// plus the endpoints.  Resolution limits agreement with the exact answer to
// about one grid cell.
inline double grid_closest_coord(const graphdiff::MetricGraph& g, int edge,
                                 graphdiff::GraphPoint p, int cells = 2000) {
    const graphdiff::EdgeSpec* e = g.edge_by_id(edge);
    const double hi = e->half_infinite() ? 50.0 : e->length;
    double best_c = 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= cells; ++i) {
        const double c = hi * double(i) / double(cells);
        const double d = point_distance(g, {edge, c}, p);
        if (d < best_d) {
            best_d = d;
            best_c = c;
        }
    }
    return best_c;
}

// Exact-in-law samples at a fixed time, used as Kolmogorov-Smirnov baselines.
inline std::vector<double> normal_samples(std::int64_t n, double mean, double sd,
                                          std::uint64_t seed, std::uint64_t lane) {
    std::vector<double> out(static_cast<size_t>(n));
    graphdiff::NormalStream rng(seed, graphdiff::make_stream(graphdiff::kStreamTagAux, 0, lane));
    for (auto& x : out) x = mean + sd * rng.next();
    return out;
}

// Standard normal CDF for one-sample KS checks.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample KS distance against a cdf.
template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - f));
    }
    return d;
}

// Sample mean / variance / standardized third and fourth moments.
struct Moments {
    double mean, var, skew, kurt;
};
inline Moments moments(const std::vector<double>& xs) {
    const double n = double(xs.size());
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double c2 = 0.0, c3 = 0.0, c4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        c2 += d * d;
        c3 += d * d * d;
        c4 += d * d * d * d;
    }
    c2 /= n;
    c3 /= n;
    c4 /= n;
    return {m, c2, c3 / std::pow(c2, 1.5), c4 / (c2 * c2)};
}

}  // namespace test_oracle
