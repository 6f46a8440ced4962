#include "graphdiff/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "graphdiff/errors.hpp"
#include "graphdiff/parallel.hpp"

namespace graphdiff {

// Worst-case one-step move near a coordinate: bounds how far past the
// kernel window a frozen edge can rest after its stopping step.
double window_slack(const EdgeSpec& e, double center, double eps, double dt) {
    double smax = 0.0;
    for (int k = -4; k <= 4; ++k) {
        double y = center + eps * double(k) / 4.0;
        y = std::clamp(y, 0.0, e.half_infinite() ? center + eps : e.length);
        smax = std::max(smax, std::abs(e.volatility(y)));
    }
    return 8.0 * smax * std::sqrt(dt) + std::abs(e.drift(center)) * dt + 1e-12;
}

double hop_tolerance(const MetricGraph& g, const SimConfig& cfg) {
    double worst = 0.0;
    for (int v : interior_vertices(g))
        for (int eid : g.edges_at(v)) {
            const EdgeSpec& e = *g.edge_by_id(eid);
            worst = std::max(worst, window_slack(e, e.vertex_coord(v),
                                                 cfg.kernel_eps, cfg.dt));
        }
    return cfg.kernel_eps + worst;
}

namespace {

std::int64_t clock_steps(const std::vector<double>& clock, std::int64_t k, double dt) {
    return std::llround(clock[size_t(k)] / dt);
}

// One arm of a splice: either a bare edge trajectory or an assembled
// sub-process hanging off the root through its bridge edge.
struct SpliceArm {
    int edge_id = -1;                 // incident edge at the root
    double root_coord = 0.0;          // root's coordinate on that edge
    double slack = 0.0;               // exclusivity tolerance for this arm
    const EdgePath* path = nullptr;   // leaf arm
    const GraphPath* sub = nullptr;   // bridge arm (assembled branch)
    const MetricGraph* sub_view = nullptr;
    const DistanceField* sub_dist = nullptr;  // distance-to-root inside the branch
};

GraphPoint arm_point(const SpliceArm& a, std::int64_t m) {
    if (a.path) return GraphPoint{a.path->edge, a.path->coords[size_t(m)]};
    return a.sub->points[size_t(m)];
}

double arm_root_distance(const SpliceArm& a, std::int64_t m) {
    if (a.path) return std::abs(a.path->coords[size_t(m)] - a.root_coord);
    return a.sub_dist->distance(*a.sub_view, a.sub->points[size_t(m)]);
}

// Shared splice: walks the active sequence, emits the running arm's point,
// and asserts every frozen arm is parked inside the root's window.
void splice(const std::vector<SpliceArm>& arms, const TimeChange& tc, double eps,
            GraphPath& out) {
    const std::int64_t n = std::int64_t(tc.active.size());
    const double dt = tc.times[1] - tc.times[0];
    out.times = tc.times;
    out.points.resize(n + 1);
    out.points[0] = arm_point(arms[tc.active.empty() ? 0 : tc.active[0]], 0);
    for (std::int64_t k = 1; k <= n; ++k) {
        const std::uint32_t a = tc.active[k - 1];
        out.points[k] = arm_point(arms[a], clock_steps(tc.clocks[a], k, dt));
        for (std::uint32_t b = 0; b < arms.size(); ++b) {
            if (b == a) continue;
            const double d = arm_root_distance(arms[b], clock_steps(tc.clocks[b], k, dt));
            if (d > eps + arms[b].slack)
                throw NumericError(
                    "splice: frozen edge " + std::to_string(arms[b].edge_id) +
                    " rests " + std::to_string(d) + " from the vertex at t=" +
                    std::to_string(tc.times[size_t(k)]) +
                    " (outside the local-time window; clocks and ledgers disagree)");
        }
    }
}

// Vertices/edges of the branch hanging off `root` through `bridge`,
// restricted to a standalone graph rooted at the bridge's far endpoint.
// The root keeps only the bridge and becomes a leaf (weight row {bridge: 1}).
MetricGraph branch_view(const MetricGraph& g, int root, const EdgeSpec& bridge) {
    MetricGraph sub;
    std::set<int> keep_v{root};
    std::vector<int> frontier;
    for (int v : bridge.endpoints)
        if (v != root) {
            keep_v.insert(v);
            frontier.push_back(v);
        }
    std::set<int> keep_e{bridge.id};
    while (!frontier.empty()) {
        int v = frontier.back();
        frontier.pop_back();
        for (const auto& e : g.edges) {
            if (!e.touches(v) || keep_e.count(e.id) || e.touches(root)) continue;
            keep_e.insert(e.id);
            for (int w : e.endpoints)
                if (!keep_v.count(w)) {
                    keep_v.insert(w);
                    frontier.push_back(w);
                }
        }
    }
    for (int v : g.vertices)
        if (keep_v.count(v)) sub.vertices.push_back(v);
    for (const auto& e : g.edges)
        if (keep_e.count(e.id)) sub.edges.push_back(e);
    for (const auto& [key, w] : g.weights)
        if (keep_v.count(key.first) && keep_e.count(key.second) && key.first != root)
            sub.weights[key] = w;
    sub.weights[{root, bridge.id}] = 1.0;
    return sub;
}

bool point_on_edge_set(const MetricGraph& view, GraphPoint p) {
    return view.edge_by_id(p.edge) != nullptr;
}

struct Assembly {
    GraphPath path;
    int invocations = 0;
};

Assembly assemble_impl(const MetricGraph& g, int root, const SimConfig& cfg,
                       std::uint64_t replica, GraphPoint start, double quantum) {
    Assembly out;
    out.invocations = 1;
    const std::int64_t n = grid_steps(cfg.horizon, cfg.dt);

    if (g.edges.size() == 1) {
        // Single edge: the clock is the identity, no allocation at all.
        const EdgeSpec& e = g.edges[0];
        NormalStream rng(cfg.seed, make_stream(kStreamTagEdgeNoise, replica,
                                               std::uint64_t(e.id)));
        EdgePath p = simulate_reflected_edge(e, start.coord, cfg, rng);
        out.path.times = p.times;
        out.path.points.resize(p.coords.size());
        for (size_t k = 0; k < p.coords.size(); ++k)
            out.path.points[k] = GraphPoint{e.id, p.coords[k]};
        out.path.leaf_clocks.assign(1, p.times);
        return out;
    }

    const auto interiors = interior_vertices(g);
    if (std::find(interiors.begin(), interiors.end(), root) == interiors.end())
        throw ConfigError("assemble: root vertex " + std::to_string(root) +
                          " is not interior");

    // Incident edges in ascending id order become the arms at this level.
    std::vector<int> incident = g.edges_at(root);
    std::sort(incident.begin(), incident.end());

    const std::vector<double> y0 = embed(g, start);
    const bool start_at_root =
        tree_distance(g, start, GraphPoint{incident[0],
                                           g.edge_by_id(incident[0])->vertex_coord(root)}) == 0.0;

    std::vector<SpliceArm> arms(incident.size());
    std::vector<LocalTimeLedger> ledgers(incident.size());
    std::vector<double> weights(incident.size());
    std::vector<EdgePath> leaf_paths(incident.size());
    std::vector<Assembly> subs(incident.size());
    std::vector<MetricGraph> sub_views(incident.size());
    std::vector<DistanceField> sub_dists(incident.size());
    int initial_arm = -1;

    for (size_t a = 0; a < incident.size(); ++a) {
        const EdgeSpec& e = *g.edge_by_id(incident[a]);
        arms[a].edge_id = e.id;
        arms[a].root_coord = e.vertex_coord(root);
        arms[a].slack = window_slack(e, arms[a].root_coord, cfg.kernel_eps, cfg.dt);
        weights[a] = g.weight(root, e.id);

        // Bridge edge: its far endpoint is interior, so a whole branch hangs
        // off it and is assembled first as its own process.
        bool bridge = false;
        for (int v : e.endpoints)
            if (v != root &&
                std::find(interiors.begin(), interiors.end(), v) != interiors.end())
                bridge = true;

        if (!bridge) {
            NormalStream rng(cfg.seed, make_stream(kStreamTagEdgeNoise, replica,
                                                   std::uint64_t(e.id)));
            leaf_paths[a] =
                simulate_reflected_edge(e, y0[size_t(g.edge_index(e.id))], cfg, rng);
            ledgers[a] = local_time_kernel(leaf_paths[a], arms[a].root_coord,
                                           cfg.kernel_eps, root);
            arms[a].path = &leaf_paths[a];
            if (!start_at_root && start.edge == e.id) initial_arm = int(a);
            continue;
        }

        sub_views[a] = branch_view(g, root, e);
        int sub_root = -1;
        for (int v : e.endpoints)
            if (v != root) sub_root = v;
        GraphPoint sub_start{e.id, arms[a].root_coord};
        const bool start_in_branch =
            !start_at_root && point_on_edge_set(sub_views[a], start);
        if (start_in_branch) sub_start = start;
        subs[a] = assemble_impl(sub_views[a], sub_root, cfg, replica, sub_start, quantum);
        out.invocations += subs[a].invocations;

        // The branch's local time at the root: the bridge edge's own ledger
        // at the root, run through the bridge's clock inside the branch —
        // an index composition, exact on the grid.  The branch path only
        // records whichever edge is active, so the bridge's trajectory is
        // regenerated from its stream (keyed by edge id: identical draws) to
        // read off its ledger at the root end.
        const int bpos = sub_views[a].edge_index(e.id);
        const auto& bridge_clock = subs[a].path.leaf_clocks[size_t(bpos)];
        NormalStream rng(cfg.seed, make_stream(kStreamTagEdgeNoise, replica,
                                               std::uint64_t(e.id)));
        EdgePath bridge_path = simulate_reflected_edge(
            e, embed(sub_views[a], sub_start)[size_t(bpos)], cfg, rng);
        LocalTimeLedger bridge_led =
            local_time_kernel(bridge_path, arms[a].root_coord, cfg.kernel_eps, root);
        LocalTimeLedger composed;
        composed.vertex = root;
        composed.edge = e.id;
        composed.times = subs[a].path.times;
        composed.values.resize(composed.times.size());
        for (size_t k = 0; k < composed.times.size(); ++k)
            composed.values[k] =
                bridge_led.values[size_t(clock_steps(bridge_clock, std::int64_t(k), cfg.dt))];
        ledgers[a] = std::move(composed);

        arms[a].sub = &subs[a].path;
        arms[a].sub_view = &sub_views[a];
        sub_dists[a] =
            distance_field(sub_views[a], GraphPoint{e.id, arms[a].root_coord});
        arms[a].sub_dist = &sub_dists[a];
        if (start_in_branch) initial_arm = int(a);
    }

    TimeChange tc = allocate(ledgers, weights, cfg.horizon, quantum, initial_arm);
    splice(arms, tc, cfg.kernel_eps, out.path);

    // Compose clocks down to the individual edges (g.edges order).
    out.path.leaf_clocks.assign(g.edges.size(), {});
    for (size_t a = 0; a < arms.size(); ++a) {
        if (arms[a].path) {
            out.path.leaf_clocks[size_t(g.edge_index(arms[a].edge_id))] = tc.clocks[a];
            continue;
        }
        for (size_t j = 0; j < sub_views[a].edges.size(); ++j) {
            const int gidx = g.edge_index(sub_views[a].edges[j].id);
            auto& dst = out.path.leaf_clocks[size_t(gidx)];
            dst.resize(n + 1);
            const auto& sub_clock = subs[a].path.leaf_clocks[j];
            for (std::int64_t k = 0; k <= n; ++k)
                dst[size_t(k)] =
                    sub_clock[size_t(clock_steps(tc.clocks[a], k, cfg.dt))];
        }
    }
    return out;
}

}  // namespace

GraphPath assemble_star(std::span<const EdgePath> paths, const TimeChange& tc,
                        const MetricGraph& g, int root, double kernel_eps) {
    if (paths.size() != g.edges.size())
        throw ConfigError("assemble_star: need one path per edge");
    std::vector<SpliceArm> arms(paths.size());
    for (size_t a = 0; a < paths.size(); ++a) {
        const EdgeSpec* e = g.edge_by_id(paths[a].edge);
        if (!e || !e->touches(root))
            throw ConfigError("assemble_star: edge " + std::to_string(paths[a].edge) +
                              " does not meet the root");
        arms[a].edge_id = e->id;
        arms[a].root_coord = e->vertex_coord(root);
        const double dt = tc.times[1] - tc.times[0];
        arms[a].slack = window_slack(*e, arms[a].root_coord, kernel_eps, dt);
        arms[a].path = &paths[a];
    }
    GraphPath out;
    splice(arms, tc, kernel_eps, out);
    out.leaf_clocks.assign(g.edges.size(), {});
    for (size_t a = 0; a < paths.size(); ++a)
        out.leaf_clocks[size_t(g.edge_index(paths[a].edge))] = tc.clocks[a];
    return out;
}

GraphPath assemble_recursive(const MetricGraph& g, int root, const SimConfig& cfg,
                             std::uint64_t replica, GraphPoint start, double quantum) {
    if (!g.has_vertex(root))
        throw ConfigError("assemble: unknown root vertex " + std::to_string(root));
    if (start.edge < 0) {
        // Default start: the root vertex, hosted on its lowest-id edge.
        auto inc = g.edges_at(root);
        std::sort(inc.begin(), inc.end());
        if (inc.empty()) throw ConfigError("assemble: root touches no edge");
        start = GraphPoint{inc[0], g.edge_by_id(inc[0])->vertex_coord(root)};
    }
    Assembly res = assemble_impl(g, root, cfg, replica, start, quantum);
    const int expect = std::max<int>(1, int(interior_vertices(g).size()));
    if (res.invocations != expect)
        throw NumericError("assemble: recursion count " + std::to_string(res.invocations) +
                           " != interior vertex count " + std::to_string(expect));
    return res.path;
}

std::vector<std::string> check_adjacency_continuity(const GraphPath& gp,
                                                    const MetricGraph& g, double tol) {
    std::vector<std::string> bad;
    for (size_t k = 0; k + 1 < gp.points.size(); ++k) {
        const GraphPoint a = gp.points[k], b = gp.points[k + 1];
        if (a.edge == b.edge) continue;
        const EdgeSpec* ea = g.edge_by_id(a.edge);
        const EdgeSpec* eb = g.edge_by_id(b.edge);
        bool ok = false;
        for (int v : ea->endpoints) {
            if (!eb->touches(v)) continue;
            const double da = std::abs(a.coord - ea->vertex_coord(v));
            const double db = std::abs(b.coord - eb->vertex_coord(v));
            ok = ok || std::min(da, db) <= tol;
        }
        if (!ok && bad.size() < 16)
            bad.push_back("edge hop " + std::to_string(a.edge) + "->" +
                          std::to_string(b.edge) + " at t=" + std::to_string(gp.times[k + 1]) +
                          " away from any shared vertex");
    }
    return bad;
}

std::vector<std::string> check_budget(const GraphPath& gp) {
    std::vector<std::string> bad;
    if (gp.leaf_clocks.empty()) return {"no clocks recorded"};
    const double dt = gp.times.size() > 1 ? gp.times[1] - gp.times[0] : 0.0;
    for (size_t k = 0; k < gp.times.size(); ++k) {
        double sum = 0.0;
        for (const auto& c : gp.leaf_clocks) sum += c[k];
        if (std::abs(sum - gp.times[k]) > dt && bad.size() < 16)
            bad.push_back("budget residual " + std::to_string(sum - gp.times[k]) +
                          " at t=" + std::to_string(gp.times[k]));
    }
    return bad;
}

}  // namespace graphdiff
