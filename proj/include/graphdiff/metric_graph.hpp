#pragma once

// Loop-free connected metric graphs with per-edge drift/volatility and
// per-vertex gluing weights.  Immutable after validation; every query here is
// a pure function, so graphs are shared read-only across simulation workers.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace graphdiff {

inline constexpr double kInfiniteLength = std::numeric_limits<double>::infinity();

// Drift/volatility coefficients.  Families instead of arbitrary callables so
// configs stay serializable and regularity checks reduce to grid evaluation.
enum class CoeffFamily { Constant, Linear, Polynomial };

struct CoeffFn {
    CoeffFamily family = CoeffFamily::Constant;
    std::vector<double> coeffs;  // c0 + c1*y + c2*y^2 + ...

    double operator()(double y) const {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + *it;
        return acc;
    }
    static CoeffFn constant(double c) { return {CoeffFamily::Constant, {c}}; }
    static CoeffFn linear(double c0, double c1) { return {CoeffFamily::Linear, {c0, c1}}; }
};

// One edge with its coordinate chart.  endpoints[0] sits at coordinate 0;
// a finite edge has endpoints[1] at coordinate `length`; a half-infinite edge
// has a single endpoint (at 0) and length = +infinity.
struct EdgeSpec {
    int id = -1;
    std::vector<int> endpoints;
    double length = 0.0;
    CoeffFn drift = CoeffFn::constant(0.0);
    CoeffFn volatility = CoeffFn::constant(1.0);

    bool half_infinite() const { return std::isinf(length); }
    bool touches(int vertex) const {
        for (int v : endpoints)
            if (v == vertex) return true;
        return false;
    }
    // Coordinate of `vertex` on this edge; the caller must know it touches.
    double vertex_coord(int vertex) const { return endpoints[0] == vertex ? 0.0 : length; }
};

struct MetricGraph {
    std::vector<int> vertices;
    std::vector<EdgeSpec> edges;
    // (vertex id, edge id) -> gluing weight alpha; positive exactly on
    // incident pairs, rows sum to 1 per vertex.
    std::map<std::pair<int, int>, double> weights;

    const EdgeSpec* edge_by_id(int id) const {
        for (const auto& e : edges)
            if (e.id == id) return &e;
        return nullptr;
    }
    int edge_index(int id) const {
        for (size_t i = 0; i < edges.size(); ++i)
            if (edges[i].id == id) return int(i);
        return -1;
    }
    std::vector<int> edges_at(int vertex) const {
        std::vector<int> out;
        for (const auto& e : edges)
            if (e.touches(vertex)) out.push_back(e.id);
        return out;
    }
    double weight(int vertex, int edge) const {
        auto it = weights.find({vertex, edge});
        return it == weights.end() ? 0.0 : it->second;
    }
    bool has_vertex(int v) const {
        for (int u : vertices)
            if (u == v) return true;
        return false;
    }
};

// A point of the graph: a coordinate on one edge.  Points at a shared vertex
// carried by different edges are graph-equal (tree distance 0).
struct GraphPoint {
    int edge = -1;
    double coord = 0.0;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// Checks every structural invariant: ids, lengths, orientation, connectivity,
// acyclicity (incl. multi-edges), weight support and row sums, coefficient
// regularity (ellipticity / Lipschitz families) by grid evaluation.
ValidationReport validate_graph(const MetricGraph& g);

// Length of the unique path between two points of the tree.
double tree_distance(const MetricGraph& g, GraphPoint a, GraphPoint b);

// Coordinates of the closest point of each edge to p (one entry per edge, in
// g.edges order): the graph's embedding into R^N.
std::vector<double> embed(const MetricGraph& g, GraphPoint p);

// Vertices incident to at least two edges; these carry gluing conditions and
// drive the assembly recursion.
std::vector<int> interior_vertices(const MetricGraph& g);

// Distance bookkeeping for repeated distance-to-root queries: for each edge,
// the coordinate of its closest point to the root and that point's distance.
// d(p, root) = |p.coord - closest_coord[e]| + closest_dist[e].
struct DistanceField {
    std::vector<double> closest_coord;
    std::vector<double> closest_dist;

    double distance(const MetricGraph& g, GraphPoint p) const {
        int idx = g.edge_index(p.edge);
        return std::abs(p.coord - closest_coord[idx]) + closest_dist[idx];
    }
};
DistanceField distance_field(const MetricGraph& g, GraphPoint root);

}  // namespace graphdiff
