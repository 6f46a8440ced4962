#include "graphdiff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "graphdiff/errors.hpp"
#include "graphdiff/parallel.hpp"
#include "graphdiff/stats.hpp"

namespace graphdiff {

namespace {

// Shortest horizon worth simulating for an exit at distance delta, in units
// of the diffusive time delta^2; retries quadruple it up to cfg.horizon.
double first_stage_horizon(double delta, const SimConfig& cfg) {
    return std::min(cfg.horizon, std::max(64.0 * delta * delta, 512.0 * cfg.dt));
}

}  // namespace

ExitExperimentResult exit_direction_experiment(const MetricGraph& g, int root, double delta,
                                               std::int64_t n_paths, const SimConfig& cfg,
                                               double quantum, int threads) {
    auto incident = g.edges_at(root);
    std::sort(incident.begin(), incident.end());
    if (incident.empty()) throw ConfigError("exit experiment: root touches no edge");
    for (int eid : incident)
        if (delta >= g.edge_by_id(eid)->length)
            throw ConfigError("exit experiment: delta must be smaller than every edge at "
                              "the root");

    const GraphPoint root_pt{incident[0], g.edge_by_id(incident[0])->vertex_coord(root)};
    const DistanceField dist = distance_field(g, root_pt);

    // Exit edge per replica, -1 while unfinished; staged horizons retry only
    // the stragglers, and reusing the same streams keeps every finished
    // replica's answer identical across stages.
    std::vector<int> exit_edge(n_paths, -1);
    double stage = first_stage_horizon(delta, cfg);
    while (true) {
        SimConfig stage_cfg = cfg;
        stage_cfg.horizon = stage;
        for_each_replica(n_paths, threads, [&](std::int64_t r) {
            if (exit_edge[r] >= 0) return;
            GraphPath gp = assemble_recursive(g, root, stage_cfg, std::uint64_t(r),
                                              GraphPoint{-1, 0.0}, quantum);
            for (size_t k = 0; k < gp.points.size(); ++k)
                if (dist.distance(g, gp.points[k]) >= delta) {
                    exit_edge[r] = gp.points[k].edge;
                    break;
                }
        });
        bool all_done = true;
        for (std::int64_t r = 0; r < n_paths; ++r) all_done = all_done && exit_edge[r] >= 0;
        if (all_done || stage >= cfg.horizon) break;
        stage = std::min(cfg.horizon, stage * 4.0);
    }

    ExitExperimentResult res;
    res.delta = delta;
    res.n_paths = n_paths;
    res.edge_ids = incident;
    std::vector<std::int64_t> counts(incident.size(), 0);
    for (std::int64_t r = 0; r < n_paths; ++r) {
        if (exit_edge[r] < 0) {
            ++res.unfinished;
            continue;
        }
        for (size_t i = 0; i < incident.size(); ++i)
            if (incident[i] == exit_edge[r]) ++counts[i];
    }
    const std::int64_t finished = n_paths - res.unfinished;
    for (size_t i = 0; i < incident.size(); ++i) {
        const double f = finished > 0 ? double(counts[i]) / double(finished) : 0.0;
        res.frequencies.push_back(f);
        res.ci_halfwidth.push_back(binomial_ci_halfwidth(f, size_t(std::max<std::int64_t>(
                                                                1, finished))));
    }
    return res;
}

GeneratorCheckResult generator_check(const MetricGraph& g, const GeneratorProbe& probe,
                                     std::int64_t n_paths, const SimConfig& cfg,
                                     double quantum, int threads) {
    validate_probe(g, probe);
    if (probe.h_grid.empty()) throw ConfigError("generator check: empty h grid");

    int root;
    if (probe.vertex >= 0) {
        root = probe.vertex;
    } else {
        const auto interiors = interior_vertices(g);
        root = interiors.empty() ? g.edges[0].endpoints[0] : interiors[0];
    }

    double hmax = 0.0;
    for (double h : probe.h_grid) hmax = std::max(hmax, h);
    SimConfig run_cfg = cfg;
    run_cfg.horizon = hmax;

    const double f0 = probe_value(probe, g, probe.x0);
    const size_t nh = probe.h_grid.size();
    std::vector<std::vector<double>> samples(nh, std::vector<double>(n_paths, 0.0));
    for_each_replica(n_paths, threads, [&](std::int64_t r) {
        GraphPath gp =
            assemble_recursive(g, root, run_cfg, std::uint64_t(r), probe.x0, quantum);
        for (size_t j = 0; j < nh; ++j) {
            const auto k = std::min<std::int64_t>(
                std::int64_t(gp.points.size()) - 1,
                std::llround(probe.h_grid[j] / run_cfg.dt));
            samples[j][size_t(r)] = probe_value(probe, g, gp.points[size_t(k)]);
        }
    });

    GeneratorCheckResult res;
    res.target = probe.target;
    for (size_t j = 0; j < nh; ++j) {
        const MeanSE ms = mean_se(samples[j]);
        GeneratorCheckPoint p;
        p.h = probe.h_grid[j];
        p.estimate = (ms.mean - f0) / p.h;
        p.se = ms.se / p.h;
        p.deviation = p.estimate - res.target;
        res.points.push_back(p);
    }
    return res;
}

namespace {

// Edge ids on the far side of `positive_edge` as seen from the root
// (including the edge itself): the + half of the signed coordinate.
std::set<int> positive_side(const MetricGraph& g, int root, int positive_edge) {
    std::set<int> side{positive_edge};
    const EdgeSpec* pe = g.edge_by_id(positive_edge);
    std::vector<int> frontier;
    for (int v : pe->endpoints)
        if (v != root) frontier.push_back(v);
    std::set<int> seen(frontier.begin(), frontier.end());
    while (!frontier.empty()) {
        int v = frontier.back();
        frontier.pop_back();
        for (const auto& e : g.edges) {
            if (!e.touches(v) || side.count(e.id) || e.touches(root)) continue;
            side.insert(e.id);
            for (int w : e.endpoints)
                if (!seen.count(w)) {
                    seen.insert(w);
                    frontier.push_back(w);
                }
        }
    }
    return side;
}

}  // namespace

MarginalLawResult marginal_law_test(const MetricGraph& g, int root, int positive_edge,
                                    double t, std::int64_t n_paths,
                                    std::span<const double> oracle_samples,
                                    const SimConfig& cfg, double quantum, int threads,
                                    double threshold) {
    if (!g.edge_by_id(positive_edge) || !g.edge_by_id(positive_edge)->touches(root))
        throw ConfigError("marginal test: positive_edge must touch the root");
    const std::set<int> plus = positive_side(g, root, positive_edge);
    auto incident = g.edges_at(root);
    std::sort(incident.begin(), incident.end());
    const GraphPoint root_pt{incident[0], g.edge_by_id(incident[0])->vertex_coord(root)};
    const DistanceField dist = distance_field(g, root_pt);

    SimConfig run_cfg = cfg;
    run_cfg.horizon = t;
    std::vector<double> signed_coord(n_paths, 0.0);
    for_each_replica(n_paths, threads, [&](std::int64_t r) {
        GraphPath gp = assemble_recursive(g, root, run_cfg, std::uint64_t(r),
                                          GraphPoint{-1, 0.0}, quantum);
        const GraphPoint p = gp.points.back();
        const double d = dist.distance(g, p);
        signed_coord[size_t(r)] = plus.count(p.edge) ? d : -d;
    });

    MarginalLawResult res;
    res.n = signed_coord.size();
    res.m = oracle_samples.size();
    res.threshold = threshold;
    std::int64_t pos = 0;
    for (double x : signed_coord) pos += x > 0.0 ? 1 : 0;
    res.sign_frequency = double(pos) / double(std::max<std::int64_t>(1, n_paths));
    res.ks = ks_statistic(signed_coord,
                          std::vector<double>(oracle_samples.begin(), oracle_samples.end()));
    res.pass = res.ks < threshold;
    return res;
}

std::vector<double> sample_bm_marginal(std::int64_t n, double t, std::uint64_t seed) {
    std::vector<double> out(n);
    const double s = std::sqrt(t);
    for (std::int64_t i = 0; i < n; ++i) {
        NormalStream rng(seed, make_stream(kStreamTagOracle, std::uint64_t(i), 0));
        out[size_t(i)] = s * rng.next();
    }
    return out;
}

std::vector<double> sample_skew_bm_marginal(std::int64_t n, double t, double p,
                                            std::uint64_t seed) {
    std::vector<double> out(n);
    const double s = std::sqrt(t);
    for (std::int64_t i = 0; i < n; ++i) {
        NormalStream rng(seed, make_stream(kStreamTagOracle, std::uint64_t(i), 0));
        UniformStream coin(seed, make_stream(kStreamTagSignFlip, std::uint64_t(i), 0));
        const double mag = std::abs(s * rng.next());
        out[size_t(i)] = coin.next() <= p ? mag : -mag;
    }
    return out;
}

EquationResiduals equation_residuals(const MetricGraph& g, int root, const GraphPath& gp,
                                     const SimConfig& cfg, double quantum,
                                     std::uint64_t replica,
                                     std::span<const double> t_checks) {
    // Rebuild every edge trajectory from its stream (identical draws) and
    // take kernel ledgers at each interior endpoint.
    auto incident0 = g.edges_at(root);
    std::sort(incident0.begin(), incident0.end());
    const GraphPoint root_pt{incident0[0], g.edge_by_id(incident0[0])->vertex_coord(root)};
    const std::vector<double> y0 = embed(g, root_pt);

    const auto interiors = interior_vertices(g);
    std::map<std::pair<int, int>, LocalTimeLedger> ledgers;  // (vertex, edge)
    double max_jump = 0.0;
    for (size_t i = 0; i < g.edges.size(); ++i) {
        const EdgeSpec& e = g.edges[i];
        NormalStream rng(cfg.seed,
                         make_stream(kStreamTagEdgeNoise, replica, std::uint64_t(e.id)));
        EdgePath p = simulate_reflected_edge(e, y0[i], cfg, rng);
        for (int v : e.endpoints) {
            if (std::find(interiors.begin(), interiors.end(), v) == interiors.end())
                continue;
            LocalTimeLedger led =
                local_time_kernel(p, e.vertex_coord(v), cfg.kernel_eps, v);
            const double alpha = g.weight(v, e.id);
            for (size_t k = 0; k + 1 < led.values.size(); ++k)
                max_jump = std::max(max_jump, (led.values[k + 1] - led.values[k]) / alpha);
            ledgers[{v, e.id}] = std::move(led);
        }
    }

    EquationResiduals res;
    res.bound = quantum + max_jump;
    for (double t : t_checks) {
        const std::int64_t k = std::llround(t / cfg.dt);
        if (k < 0 || k >= std::int64_t(gp.times.size())) continue;
        double sum = 0.0;
        for (const auto& clock : gp.leaf_clocks) sum += clock[size_t(k)];
        res.max_budget_residual =
            std::max(res.max_budget_residual, std::abs(sum - gp.times[size_t(k)]));

        for (int v : interiors) {
            double lo = kNeverReached, hi = -kNeverReached;
            for (int eid : g.edges_at(v)) {
                const auto& led = ledgers.at({v, eid});
                const auto& clock = gp.leaf_clocks[size_t(g.edge_index(eid))];
                const auto m = std::min<std::int64_t>(
                    std::int64_t(led.values.size()) - 1,
                    std::llround(clock[size_t(k)] / cfg.dt));
                const double ratio = led.values[size_t(m)] / g.weight(v, eid);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
            res.max_ratio_mismatch = std::max(res.max_ratio_mismatch, hi - lo);
        }
    }
    return res;
}

nlohmann::json run_invariant_suite(const MetricGraph& g, int root, const SimConfig& cfg,
                                   std::int64_t n_paths, double quantum, int threads) {
    using nlohmann::json;

    std::vector<double> t_checks;
    for (int j = 1; j <= 20; ++j) t_checks.push_back(cfg.horizon * double(j) / 20.0);

    std::vector<double> budget(n_paths, 0.0), mismatch(n_paths, 0.0), bound(n_paths, 0.0);
    std::vector<double> adjacency_bad(n_paths, 0.0), flat_fraction(n_paths, 0.0);
    std::vector<std::string> errors(n_paths);
    for_each_replica(n_paths, threads, [&](std::int64_t r) {
        try {
            GraphPath gp = assemble_recursive(g, root, cfg, std::uint64_t(r),
                                              GraphPoint{-1, 0.0}, quantum);
            EquationResiduals eq =
                equation_residuals(g, root, gp, cfg, quantum, std::uint64_t(r), t_checks);
            budget[r] = eq.max_budget_residual;
            mismatch[r] = eq.max_ratio_mismatch;
            bound[r] = eq.bound;
            adjacency_bad[r] =
                double(check_adjacency_continuity(gp, g, hop_tolerance(g, cfg)).size());
        } catch (const std::exception& e) {
            errors[r] = e.what();
        }
    });

    // Simultaneous-flat fraction over the root's arms, one replica.
    {
        auto incident = g.edges_at(root);
        std::sort(incident.begin(), incident.end());
        if (incident.size() >= 2) {
            const GraphPoint root_pt{incident[0],
                                     g.edge_by_id(incident[0])->vertex_coord(root)};
            const std::vector<double> y0 = embed(g, root_pt);
            std::vector<LocalTimeLedger> leds;
            std::vector<double> ws;
            for (int eid : incident) {
                const EdgeSpec& e = *g.edge_by_id(eid);
                NormalStream rng(cfg.seed,
                                 make_stream(kStreamTagEdgeNoise, 0, std::uint64_t(e.id)));
                EdgePath p = simulate_reflected_edge(e, y0[size_t(g.edge_index(eid))],
                                                     cfg, rng);
                leds.push_back(
                    local_time_kernel(p, e.vertex_coord(root), cfg.kernel_eps, root));
                ws.push_back(g.weight(root, eid));
            }
            const auto grid = make_level_grid(leds, ws, 200);
            flat_fraction[0] = no_simultaneous_flat_check(leds, ws, grid).violation_fraction;
        }
    }

    double max_budget = 0.0, max_mismatch = 0.0, max_bound = 0.0, adjacency_total = 0.0;
    std::string first_error;
    std::int64_t failed = 0;
    for (std::int64_t r = 0; r < n_paths; ++r) {
        max_budget = std::max(max_budget, budget[r]);
        max_mismatch = std::max(max_mismatch, mismatch[r]);
        max_bound = std::max(max_bound, bound[r]);
        adjacency_total += adjacency_bad[r];
        if (!errors[r].empty()) {
            ++failed;
            if (first_error.empty()) first_error = errors[r];
        }
    }

    const bool pass = failed == 0 && max_budget <= cfg.dt * (1.0 + 1e-9) &&
                      max_mismatch <= max_bound + 1e-12 && adjacency_total == 0.0;

    json rep;
    rep["experiment"] = "invariant_suite";
    rep["params"] = {{"dt", cfg.dt},        {"horizon", cfg.horizon},
                     {"seed", cfg.seed},    {"kernel_eps", cfg.kernel_eps},
                     {"quantum", quantum},  {"paths", n_paths},
                     {"root", root}};
    rep["statistics"] = {{"max_budget_residual", max_budget},
                         {"max_ratio_mismatch", max_mismatch},
                         {"mismatch_bound", max_bound},
                         {"adjacency_violations", adjacency_total},
                         {"simultaneous_flat_fraction", flat_fraction[0]},
                         {"replica_errors", failed},
                         {"first_error", first_error}};
    rep["ci"] = {{"budget_tolerance", cfg.dt},
                 {"mismatch_tolerance", max_bound},
                 {"hop_tolerance", hop_tolerance(g, cfg)}};
    rep["pass"] = pass;
    return rep;
}

}  // namespace graphdiff
