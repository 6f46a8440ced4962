#include "graphdiff/edge_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphdiff/errors.hpp"

namespace graphdiff {

std::int64_t grid_steps(double horizon, double dt) {
    return std::max<std::int64_t>(1, std::int64_t(std::ceil(horizon / dt - 1e-9)));
}

namespace {

// Doubly-reflected (tent) fold of x into [0, l].
double fold_finite(double x, double l) {
    double y = std::fmod(x, 2.0 * l);
    if (y < 0.0) y += 2.0 * l;
    return y <= l ? y : 2.0 * l - y;
}

}  // namespace

EdgePath simulate_reflected_edge(const EdgeSpec& e, double x0, const SimConfig& cfg,
                                 NormalStream& rng) {
    const std::int64_t n = grid_steps(cfg.horizon, cfg.dt);
    const double dt = cfg.dt, sdt = std::sqrt(dt);
    EdgePath p;
    p.edge = e.id;
    p.times.resize(n + 1);
    p.coords.resize(n + 1);
    p.qv_increments.resize(n);
    double x = x0;
    p.coords[0] = x;
    for (std::int64_t k = 0; k < n; ++k) {
        p.times[k] = double(k) * dt;
        const double s = e.volatility(x);
        double xp = x + e.drift(x) * dt + s * sdt * rng.next();
        if (!std::isfinite(xp))
            throw NumericError("simulate_reflected_edge: non-finite state on edge " +
                               std::to_string(e.id) + " at step " + std::to_string(k));
        x = e.half_infinite() ? std::abs(xp) : fold_finite(xp, e.length);
        p.qv_increments[k] = s * s * dt;
        p.coords[k + 1] = x;
    }
    p.times[n] = double(n) * dt;
    return p;
}

LocalTimeLedger local_time_kernel(const EdgePath& p, double vertex_coord, double eps,
                                  int vertex_id) {
    const size_t n = p.qv_increments.size();
    LocalTimeLedger led;
    led.vertex = vertex_id;
    led.edge = p.edge;
    led.times = p.times;
    led.values.resize(n + 1);
    led.values[0] = 0.0;
    const double scale = 0.5 / eps;
    double acc = 0.0;
    for (size_t j = 0; j < n; ++j) {
        if (std::abs(p.coords[j] - vertex_coord) < eps) acc += scale * p.qv_increments[j];
        led.values[j + 1] = acc;
    }
    return led;
}

LocalTimeLedger local_time_downcrossing(const EdgePath& p, double vertex_coord, double delta,
                                        int vertex_id) {
    LocalTimeLedger led;
    led.vertex = vertex_id;
    led.edge = p.edge;
    led.times = p.times;
    led.values.resize(p.coords.size());
    led.values[0] = 0.0;
    // A crossing completes when the path, having reached distance >= delta,
    // returns to distance <= delta/2; the half-band keeps the count robust to
    // grid jitter right at the vertex.
    bool armed = std::abs(p.coords[0] - vertex_coord) >= delta;
    long count = 0;
    const double unit = kDowncrossCalibration * delta;
    for (size_t k = 1; k < p.coords.size(); ++k) {
        const double d = std::abs(p.coords[k] - vertex_coord);
        if (!armed && d >= delta) {
            armed = true;
        } else if (armed && d <= 0.5 * delta) {
            armed = false;
            ++count;
        }
        led.values[k] = unit * double(count);
    }
    return led;
}

double inverse_local_time(const LocalTimeLedger& ledger, double alpha, double level) {
    if (level <= 0.0) return ledger.times.empty() ? 0.0 : ledger.times.front();
    const double target = alpha * level;
    auto it = std::lower_bound(ledger.values.begin(), ledger.values.end(), target);
    if (it == ledger.values.end()) return kNeverReached;
    return ledger.times[size_t(it - ledger.values.begin())];
}

}  // namespace graphdiff
