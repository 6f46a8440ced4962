#include "graphdiff/probe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphdiff/errors.hpp"

namespace graphdiff {

double poly_eval(const std::vector<double>& coeffs, double y) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + *it;
    return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
    std::vector<double> d;
    for (size_t k = 1; k < coeffs.size(); ++k) d.push_back(double(k) * coeffs[k]);
    if (d.empty()) d.push_back(0.0);
    return d;
}

namespace {

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

// p(a + b*y) as a polynomial in y (Horner over the affine argument).
std::vector<double> poly_compose_affine(const std::vector<double>& p, double a, double b) {
    std::vector<double> acc{0.0};
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        acc = poly_mul(acc, {a, b});
        if (acc.empty()) acc.push_back(0.0);
        acc[0] += *it;
    }
    return acc;
}

// Quintic smoothstep 6x^5 - 15x^4 + 10x^3: C2 ramp from 0 at x=0 to 1 at 1.
const std::vector<double> kSmoothstep{0.0, 0.0, 0.0, 10.0, -15.0, 6.0};

// Ramp from 1 at y=lo down to 0 at y=hi, composed as a polynomial in y.
std::vector<double> fade_down(double lo, double hi) {
    // 1 - s((y - lo)/(hi - lo))
    std::vector<double> s = poly_compose_affine(kSmoothstep, -lo / (hi - lo), 1.0 / (hi - lo));
    for (double& c : s) c = -c;
    s[0] += 1.0;
    return s;
}
std::vector<double> fade_up(double lo, double hi) {
    return poly_compose_affine(kSmoothstep, -lo / (hi - lo), 1.0 / (hi - lo));
}

const PolyPiece* piece_at(const std::vector<PolyPiece>& pieces, double y) {
    for (const auto& p : pieces)
        if (y >= p.lo && y <= p.hi) return &p;
    return nullptr;
}

double eval_pieces(const std::vector<PolyPiece>& pieces, double y) {
    const PolyPiece* p = piece_at(pieces, y);
    if (!p) throw NumericError("probe: coordinate " + std::to_string(y) +
                               " outside every piece");
    return poly_eval(p->coeffs, y);
}

double eval_pieces_d1(const std::vector<PolyPiece>& pieces, double y) {
    const PolyPiece* p = piece_at(pieces, y);
    if (!p) throw NumericError("probe: coordinate outside every piece");
    return poly_eval(poly_derivative(p->coeffs), y);
}

double eval_pieces_d2(const std::vector<PolyPiece>& pieces, double y) {
    const PolyPiece* p = piece_at(pieces, y);
    if (!p) throw NumericError("probe: coordinate outside every piece");
    return poly_eval(poly_derivative(poly_derivative(p->coeffs)), y);
}

}  // namespace

double probe_value(const GeneratorProbe& probe, const MetricGraph& g, GraphPoint p) {
    const int idx = g.edge_index(p.edge);
    if (idx < 0) throw ConfigError("probe_value: unknown edge");
    return eval_pieces(probe.f[size_t(idx)], p.coord);
}

void validate_probe(const MetricGraph& g, const GeneratorProbe& probe) {
    constexpr double tol = 1e-8;
    if (probe.f.size() != g.edges.size())
        throw ConfigError("probe: needs one piece list per edge");

    for (size_t i = 0; i < g.edges.size(); ++i) {
        const EdgeSpec& e = g.edges[i];
        const auto& pieces = probe.f[i];
        if (pieces.empty()) throw ConfigError("probe: edge without pieces");
        if (pieces.front().lo != 0.0)
            throw ConfigError("probe: pieces must start at coordinate 0");
        const double end = e.half_infinite() ? kInfiniteLength : e.length;
        if (pieces.back().hi < end)
            throw ConfigError("probe: pieces do not cover edge " + std::to_string(e.id));
        for (size_t k = 0; k + 1 < pieces.size(); ++k) {
            if (pieces[k].hi != pieces[k + 1].lo)
                throw ConfigError("probe: piece gap on edge " + std::to_string(e.id));
            const double y = pieces[k].hi;
            if (std::abs(poly_eval(pieces[k].coeffs, y) -
                         poly_eval(pieces[k + 1].coeffs, y)) > tol ||
                std::abs(poly_eval(poly_derivative(pieces[k].coeffs), y) -
                         poly_eval(poly_derivative(pieces[k + 1].coeffs), y)) > tol)
                throw ConfigError("probe: pieces not C1 on edge " + std::to_string(e.id));
        }
    }

    // Vertex continuity and the gluing condition, both from coefficients.
    for (int v : g.vertices) {
        const auto incident = g.edges_at(v);
        double ref_value = 0.0;
        bool have_ref = false;
        double glue = 0.0;
        for (int eid : incident) {
            const EdgeSpec& e = *g.edge_by_id(eid);
            const auto& pieces = probe.f[size_t(g.edge_index(eid))];
            const double yc = e.vertex_coord(v);
            const double val = eval_pieces(pieces, yc);
            if (have_ref && std::abs(val - ref_value) > tol)
                throw ConfigError("probe: discontinuous at vertex " + std::to_string(v));
            ref_value = val;
            have_ref = true;
            // Outward derivative: into the edge, away from the vertex.
            const double d1 = eval_pieces_d1(pieces, yc);
            glue += g.weight(v, eid) * (yc == 0.0 ? d1 : -d1);
        }
        if (std::abs(glue) > tol)
            throw ConfigError("probe: gluing condition fails at vertex " +
                              std::to_string(v) + " (sum " + std::to_string(glue) + ")");
    }

    // Edge-wise generator values at the probe point must agree (they define
    // the common target).
    if (probe.vertex >= 0) {
        for (int eid : g.edges_at(probe.vertex)) {
            const EdgeSpec& e = *g.edge_by_id(eid);
            const auto& pieces = probe.f[size_t(g.edge_index(eid))];
            const double yc = e.vertex_coord(probe.vertex);
            const double gen = e.drift(yc) * eval_pieces_d1(pieces, yc) +
                               0.5 * e.volatility(yc) * e.volatility(yc) *
                                   eval_pieces_d2(pieces, yc);
            if (std::abs(gen - probe.target) > 1e-6)
                throw ConfigError("probe: generator value differs across edges at the "
                                  "probe vertex (drift breaks the common target)");
        }
    }
}

GeneratorProbe make_vertex_probe(const MetricGraph& g, int vertex, double q,
                                 std::vector<double> h_grid) {
    auto incident = g.edges_at(vertex);
    std::sort(incident.begin(), incident.end());
    const int n = int(incident.size());
    if (n < 2) throw ConfigError("vertex probe: vertex needs at least two edges");

    GeneratorProbe probe;
    probe.vertex = vertex;
    probe.x0 = GraphPoint{incident[0], g.edge_by_id(incident[0])->vertex_coord(vertex)};
    probe.h_grid = std::move(h_grid);
    probe.f.assign(g.edges.size(), {});
    for (size_t i = 0; i < g.edges.size(); ++i) {
        const EdgeSpec& e = g.edges[i];
        probe.f[i] = {PolyPiece{0.0, e.half_infinite() ? kInfiniteLength : e.length, {0.0}}};
    }

    // First-derivative pattern solving sum_i alpha_i c_i = 0.
    const double a0 = g.weight(vertex, incident[0]);
    const auto interiors = interior_vertices(g);
    for (int a = 0; a < n; ++a) {
        const EdgeSpec& e = *g.edge_by_id(incident[a]);
        const double c =
            a == 0 ? 1.0 : -a0 / (double(n - 1) * g.weight(vertex, incident[a]));
        std::vector<PolyPiece> pieces;
        bool far_leaf = !e.half_infinite();
        for (int w : e.endpoints)
            if (w != vertex &&
                std::find(interiors.begin(), interiors.end(), w) != interiors.end())
                far_leaf = false;
        if (far_leaf) {
            // u-profile c*u + (q/2)u^2 + e4*u^4 with zero slope at the far
            // leaf: the probe is exactly in the generator domain.
            const double L = e.length;
            const double e4 = -(c + q * L) / (4.0 * L * L * L);
            pieces = {PolyPiece{0.0, L, {0.0, c, 0.5 * q, 0.0, e4}}};
        } else {
            // Fade the profile to zero before the far end (or before
            // infinity); the cutoff is C2 so the faded f stays admissible.
            const double reach = e.half_infinite() ? 1.0 : e.length;
            const double flo = 0.3 * reach, fhi = 0.45 * reach;
            const std::vector<double> base{0.0, c, 0.5 * q};
            pieces.push_back(PolyPiece{0.0, flo, base});
            pieces.push_back(PolyPiece{flo, fhi, poly_mul(base, fade_down(flo, fhi))});
            pieces.push_back(
                PolyPiece{fhi, e.half_infinite() ? kInfiniteLength : e.length, {0.0}});
        }
        // Express the u-profile in edge coordinates (u = |y - vertex coord|).
        if (e.vertex_coord(vertex) != 0.0) {
            for (auto& p : pieces) {
                p.coeffs = poly_compose_affine(p.coeffs, e.length, -1.0);
                const double lo = e.length - p.hi, hi = e.length - p.lo;
                p.lo = lo;
                p.hi = hi;
            }
            std::reverse(pieces.begin(), pieces.end());
        }
        probe.f[size_t(g.edge_index(e.id))] = std::move(pieces);
    }

    const EdgeSpec& e0 = *g.edge_by_id(incident[0]);
    const double s0 = e0.volatility(e0.vertex_coord(vertex));
    probe.target = 0.5 * s0 * s0 * q;
    validate_probe(g, probe);
    return probe;
}

GeneratorProbe make_interior_probe(const MetricGraph& g, GraphPoint x0, double q,
                                   std::vector<double> h_grid, double plateau,
                                   double width) {
    const EdgeSpec* e = g.edge_by_id(x0.edge);
    if (!e) throw ConfigError("interior probe: unknown edge");
    const double L = e->half_infinite() ? kInfiniteLength : e->length;
    if (!(x0.coord - width > 0.0) || !(x0.coord + width < L))
        throw ConfigError("interior probe: support reaches a vertex; move the point or "
                          "shrink the width");

    GeneratorProbe probe;
    probe.vertex = -1;
    probe.x0 = x0;
    probe.h_grid = std::move(h_grid);
    probe.f.assign(g.edges.size(), {});
    for (size_t i = 0; i < g.edges.size(); ++i) {
        const EdgeSpec& ge = g.edges[i];
        probe.f[i] = {PolyPiece{0.0, ge.half_infinite() ? kInfiniteLength : ge.length, {0.0}}};
    }

    // (q/2)(y-x0)^2 under a symmetric plateau cutoff.
    const std::vector<double> quad_y =
        poly_compose_affine({0.0, 0.0, 0.5 * q}, -x0.coord, 1.0);
    std::vector<PolyPiece> pieces;
    pieces.push_back(PolyPiece{0.0, x0.coord - width, {0.0}});
    pieces.push_back(PolyPiece{x0.coord - width, x0.coord - plateau,
                               poly_mul(quad_y, fade_up(x0.coord - width, x0.coord - plateau))});
    pieces.push_back(PolyPiece{x0.coord - plateau, x0.coord + plateau, quad_y});
    pieces.push_back(PolyPiece{x0.coord + plateau, x0.coord + width,
                               poly_mul(quad_y, fade_down(x0.coord + plateau, x0.coord + width))});
    pieces.push_back(PolyPiece{x0.coord + width, L, {0.0}});
    probe.f[size_t(g.edge_index(x0.edge))] = std::move(pieces);

    const double s = e->volatility(x0.coord);
    probe.target = 0.5 * s * s * q;  // f'(x0) = 0 kills the drift term
    validate_probe(g, probe);
    return probe;
}

}  // namespace graphdiff
