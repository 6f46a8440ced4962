#include "graphdiff/metric_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "graphdiff/errors.hpp"

namespace graphdiff {

namespace {

// Smallest volatility accepted as "uniformly strictly positive" on the
// evaluation grid.
constexpr double kSigmaMin = 1e-6;
// Grid used to check coefficient regularity: length/1e4 on finite edges,
// [0, 100] on half-infinite ones.
constexpr int kGridPoints = 10'000;
constexpr double kInfiniteGridSpan = 100.0;
constexpr double kWeightSumTol = 1e-9;

std::string fmt(const char* pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    // Returns false if a and b were already connected (a cycle would form).
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

double coord_span(const EdgeSpec& e) {
    return e.half_infinite() ? kInfiniteGridSpan : e.length;
}

// Vertex-to-vertex distances from `source` over finite edges (tree walk).
// Half-infinite edges cannot lie on a vertex-vertex path: they dead-end.
std::map<int, double> vertex_distances(const MetricGraph& g, int source) {
    std::map<int, double> dist{{source, 0.0}};
    std::vector<int> frontier{source};
    while (!frontier.empty()) {
        int v = frontier.back();
        frontier.pop_back();
        for (const auto& e : g.edges) {
            if (e.half_infinite() || !e.touches(v)) continue;
            int other = e.endpoints[0] == v ? e.endpoints[1] : e.endpoints[0];
            if (dist.count(other)) continue;
            dist[other] = dist[v] + e.length;
            frontier.push_back(other);
        }
    }
    return dist;
}

}  // namespace

ValidationReport validate_graph(const MetricGraph& g) {
    ValidationReport rep;
    auto fail = [&rep](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };

    if (g.vertices.empty()) fail("graph has no vertices");
    if (g.edges.empty()) fail("graph has no edges");

    std::set<int> vset(g.vertices.begin(), g.vertices.end());
    if (vset.size() != g.vertices.size()) fail("duplicate vertex ids");
    std::set<int> eset;
    for (const auto& e : g.edges)
        if (!eset.insert(e.id).second) fail(fmt("duplicate edge id %d", e.id));

    for (const auto& e : g.edges) {
        if (!(e.length > 0)) fail(fmt("edge %d: length must be positive", e.id));
        if (e.half_infinite()) {
            if (e.endpoints.size() != 1)
                fail(fmt("edge %d: half-infinite edge needs exactly one endpoint", e.id));
        } else if (e.endpoints.size() != 2) {
            fail(fmt("edge %d: finite edge needs exactly two endpoints", e.id));
        } else if (e.endpoints[0] == e.endpoints[1]) {
            fail(fmt("edge %d: self-loop", e.id));
        }
        for (int v : e.endpoints)
            if (!vset.count(v)) fail(fmt("edge %d: unknown endpoint vertex %d", e.id, v));

        // Regularity by grid evaluation: volatility uniformly positive,
        // both coefficients finite; unbounded edges restricted to families
        // that stay Lipschitz on [0, inf).
        const double span = coord_span(e);
        double sig_min = kInfiniteLength;
        bool finite_vals = true;
        for (int k = 0; k <= kGridPoints; ++k) {
            const double y = span * double(k) / kGridPoints;
            const double s = e.volatility(y), b = e.drift(y);
            sig_min = std::min(sig_min, s);
            finite_vals = finite_vals && std::isfinite(s) && std::isfinite(b);
        }
        if (!finite_vals) fail(fmt("edge %d: non-finite coefficient value on grid", e.id));
        if (!(sig_min >= kSigmaMin))
            fail(fmt("edge %d: volatility not uniformly positive (grid min %.3g)", e.id, sig_min));
        if (e.half_infinite()) {
            auto unbounded_ok = [](const CoeffFn& f) {
                return f.family != CoeffFamily::Polynomial || f.coeffs.size() <= 2;
            };
            if (!unbounded_ok(e.drift) || !unbounded_ok(e.volatility))
                fail(fmt("edge %d: infinite edge needs constant or linear coefficients", e.id));
        }
    }

    // Connectivity and acyclicity over the vertex skeleton.  Multi-edges
    // count as cycles (two edges between one vertex pair bound a loop).
    if (rep.ok) {
        std::map<int, int> vidx;
        for (size_t i = 0; i < g.vertices.size(); ++i) vidx[g.vertices[i]] = int(i);
        UnionFind uf(int(g.vertices.size()));
        int finite_edges = 0;
        for (const auto& e : g.edges) {
            if (e.half_infinite()) continue;
            ++finite_edges;
            if (!uf.unite(vidx[e.endpoints[0]], vidx[e.endpoints[1]]))
                fail(fmt("cycle detected closing at edge %d", e.id));
        }
        if (finite_edges + 1 != int(g.vertices.size()) && rep.ok)
            fail("graph not connected (vertex count != finite edge count + 1)");
    }

    // Weight support and row sums.
    for (const auto& [key, w] : g.weights) {
        auto [v, eid] = key;
        const EdgeSpec* e = g.edge_by_id(eid);
        if (!vset.count(v)) fail(fmt("weight references unknown vertex %d", v));
        if (!e) {
            fail(fmt("weight references unknown edge %d", eid));
            continue;
        }
        if (!e->touches(v))
            fail(fmt("weight (%d, %d) on non-incident pair", v, eid));
        else if (!(w > 0))
            fail(fmt("weight (%d, %d) not positive", v, eid));
    }
    for (int v : g.vertices) {
        double sum = 0.0;
        for (const auto& e : g.edges) {
            if (!e.touches(v)) continue;
            double w = g.weight(v, e.id);
            if (w == 0.0) fail(fmt("missing weight for vertex %d, edge %d", v, e.id));
            sum += w;
        }
        if (std::abs(sum - 1.0) > kWeightSumTol)
            fail(fmt("vertex %d: weight sum %.12g != 1", v, sum));
    }

    return rep;
}

namespace {

void require_on_graph(const MetricGraph& g, GraphPoint p, const char* who) {
    const EdgeSpec* e = g.edge_by_id(p.edge);
    if (!e) throw ConfigError(fmt("%s: point references unknown edge %d", who, p.edge));
    if (p.coord < 0 || (!e->half_infinite() && p.coord > e->length))
        throw ConfigError(fmt("%s: coordinate %.6g outside edge %d range", who, p.coord, p.edge));
}

}  // namespace

double tree_distance(const MetricGraph& g, GraphPoint a, GraphPoint b) {
    require_on_graph(g, a, "tree_distance");
    require_on_graph(g, b, "tree_distance");
    if (a.edge == b.edge) return std::abs(a.coord - b.coord);
    const EdgeSpec* ea = g.edge_by_id(a.edge);
    const EdgeSpec* eb = g.edge_by_id(b.edge);
    double best = kInfiniteLength;
    for (int u : ea->endpoints) {
        auto dvv = vertex_distances(g, u);
        for (int w : eb->endpoints) {
            auto it = dvv.find(w);
            if (it == dvv.end()) continue;
            best = std::min(best, std::abs(a.coord - ea->vertex_coord(u)) + it->second +
                                      std::abs(b.coord - eb->vertex_coord(w)));
        }
    }
    return best;
}

std::vector<double> embed(const MetricGraph& g, GraphPoint p) {
    require_on_graph(g, p, "embed");
    std::vector<double> y(g.edges.size(), 0.0);
    for (size_t i = 0; i < g.edges.size(); ++i) {
        const EdgeSpec& e = g.edges[i];
        if (e.id == p.edge) {
            y[i] = p.coord;
            continue;
        }
        // Off the hosting edge the closest point of e is the endpoint nearer
        // to p (moving into the edge only adds distance on a tree).
        double best_d = kInfiniteLength, best_c = 0.0;
        for (int v : e.endpoints) {
            double d = tree_distance(g, p, GraphPoint{e.id, e.vertex_coord(v)});
            if (d < best_d) {
                best_d = d;
                best_c = e.vertex_coord(v);
            }
        }
        y[i] = best_c;
    }
    return y;
}

std::vector<int> interior_vertices(const MetricGraph& g) {
    std::vector<int> out;
    for (int v : g.vertices)
        if (g.edges_at(v).size() >= 2) out.push_back(v);
    return out;
}

DistanceField distance_field(const MetricGraph& g, GraphPoint root) {
    require_on_graph(g, root, "distance_field");
    DistanceField f;
    f.closest_coord = embed(g, root);
    f.closest_dist.resize(g.edges.size());
    for (size_t i = 0; i < g.edges.size(); ++i)
        f.closest_dist[i] =
            tree_distance(g, root, GraphPoint{g.edges[i].id, f.closest_coord[i]});
    return f;
}

}  // namespace graphdiff
