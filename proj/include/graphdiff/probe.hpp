#pragma once

// Test functions for the generator check: per-edge piecewise polynomials
// built so the vertex gluing condition holds exactly (verified symbolically
// on the coefficients before any simulation).

#include <vector>

#include "graphdiff/metric_graph.hpp"

namespace graphdiff {

// One polynomial piece on [lo, hi] of an edge's coordinate range.
struct PolyPiece {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> coeffs;  // c0 + c1*y + c2*y^2 + ...
};

struct GeneratorProbe {
    std::vector<std::vector<PolyPiece>> f;  // per edge, in g.edges order
    int vertex = -1;        // probe vertex id, or -1 for an edge-interior probe
    GraphPoint x0;          // the point where (P_h f - f)/h is estimated
    std::vector<double> h_grid;
    double target = 0.0;    // A f(x0), computed symbolically
};

double poly_eval(const std::vector<double>& coeffs, double y);
std::vector<double> poly_derivative(const std::vector<double>& coeffs);

double probe_value(const GeneratorProbe& probe, const MetricGraph& g, GraphPoint p);

// Throws ConfigError unless: pieces tile every edge range and join C1,
// f is continuous at every vertex, the weighted outward derivatives sum to
// zero at every vertex (the gluing condition — at a leaf this is a Neumann
// condition), and the edge-wise generator values at the probe point agree.
void validate_probe(const MetricGraph& g, const GeneratorProbe& probe);

// Probe anchored at a vertex with at least two edges: f_i = c_i*u +
// (q/2)*u^2 + tail in the distance u from the vertex, with sum_i alpha_i c_i
// = 0 solved constructively.  On a finite edge whose far end is a leaf the
// tail is the quartic e_i*u^4 with e_i chosen to zero the derivative there
// (so f lies in the generator domain with no truncation at all); otherwise
// the profile is faded to zero by a C2 cutoff before the far end.
// Target: b(v)*derivative is required to vanish (validate rejects drifts
// that break edge-wise agreement), leaving sigma(v)^2 * q / 2.
GeneratorProbe make_vertex_probe(const MetricGraph& g, int vertex, double q,
                                 std::vector<double> h_grid);

// Probe supported strictly inside one edge: f = (q/2)(y - x0)^2 under a C2
// plateau cutoff (1 on |y-x0| <= plateau, 0 beyond width), zero elsewhere on
// the graph, so every vertex condition holds trivially.
GeneratorProbe make_interior_probe(const MetricGraph& g, GraphPoint x0, double q,
                                   std::vector<double> h_grid, double plateau = 0.3,
                                   double width = 0.45);

}  // namespace graphdiff
