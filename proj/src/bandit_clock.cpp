#include "graphdiff/bandit_clock.hpp"

#include <algorithm>
#include <cmath>

#include "graphdiff/errors.hpp"

namespace graphdiff {

namespace {

double ledger_dt(const LocalTimeLedger& led) {
    if (led.times.size() < 2) throw NumericError("allocate: ledger has no grid");
    return led.times[1] - led.times[0];
}

}  // namespace

TimeChange allocate(std::span<const LocalTimeLedger> ledgers,
                    std::span<const double> weights, double horizon, double quantum,
                    int initial_arm, AllocationState* final_state) {
    const int n_arms = int(ledgers.size());
    if (n_arms == 0 || size_t(n_arms) != weights.size())
        throw NumericError("allocate: ledger/weight count mismatch");
    const double dt = ledger_dt(ledgers[0]);
    const std::int64_t n = grid_steps(horizon, dt);

    TimeChange tc;
    tc.quantum = quantum;
    tc.times.resize(n + 1);
    for (std::int64_t k = 0; k <= n; ++k) tc.times[k] = double(k) * dt;
    tc.active.reserve(n);

    std::vector<std::int64_t> consumed(n_arms, 0);
    double target = quantum;

    if (n_arms == 1) {
        // Single arm: the whole budget is its clock, no ledger consulted.
        tc.active.assign(n, 0);
        consumed[0] = n;
    } else {
        std::vector<std::int64_t> avail(n_arms);
        std::vector<bool> inert(n_arms);
        for (int i = 0; i < n_arms; ++i) {
            avail[i] = std::int64_t(ledgers[i].values.size()) - 1;
            // A ledger that never moves can never reach a positive target.
            inert[i] = ledgers[i].values.back() == 0.0;
        }
        bool any_live = false;
        for (int i = 0; i < n_arms; ++i)
            any_live = any_live || !inert[i] || i == initial_arm;
        if (!any_live) throw NumericError("allocate: all ledgers identically zero");

        std::int64_t total = 0;
        auto step = [&](int i) {
            if (consumed[i] >= avail[i])
                throw NumericError(
                    "allocate: edge-clock budget exhausted on edge " +
                    std::to_string(ledgers[i].edge) +
                    " (simulate more edge-clock time)");
            const double jump =
                (ledgers[i].values[consumed[i] + 1] - ledgers[i].values[consumed[i]]) /
                weights[i];
            tc.max_step_ratio_jump = std::max(tc.max_step_ratio_jump, jump);
            tc.active.push_back(std::uint32_t(i));
            ++consumed[i];
            ++total;
        };

        // Start-away-from-vertex phase: the start edge runs alone until its
        // local time first moves (the first return to the shared vertex).
        if (initial_arm >= 0) {
            while (total < n && ledgers[initial_arm].values[consumed[initial_arm]] == 0.0)
                step(initial_arm);
        }

        while (total < n) {
            for (int i = 0; i < n_arms && total < n; ++i) {
                if (inert[i]) continue;
                while (total < n &&
                       ledgers[i].values[consumed[i]] / weights[i] < target)
                    step(i);
            }
            if (total < n) target += quantum;
        }
    }

    // Materialize the clock arrays from the step sequence.
    tc.clocks.assign(n_arms, std::vector<double>(n + 1, 0.0));
    {
        std::vector<std::int64_t> cnt(n_arms, 0);
        for (std::int64_t k = 0; k < n; ++k) {
            ++cnt[tc.active[k]];
            for (int i = 0; i < n_arms; ++i) tc.clocks[i][k + 1] = double(cnt[i]) * dt;
        }
    }

    if (final_state) {
        final_state->active_arm = tc.active.empty() ? 0 : tc.active.back();
        final_state->level = target;
        final_state->consumed_steps = consumed;
    }
    return tc;
}

namespace {

// Sum of per-arm inverse local times at a common level; +inf when any arm
// never reaches it.
double total_inverse(std::span<const LocalTimeLedger> ledgers,
                     std::span<const double> weights, double level) {
    double sum = 0.0;
    for (size_t i = 0; i < ledgers.size(); ++i) {
        const double h = inverse_local_time(ledgers[i], weights[i], level);
        if (h == kNeverReached) return kNeverReached;
        sum += h;
    }
    return sum;
}

}  // namespace

TimeEquationSolution solve_time_equations(std::span<const LocalTimeLedger> ledgers,
                                          std::span<const double> weights, double t,
                                          double tol) {
    const int n_arms = int(ledgers.size());
    TimeEquationSolution sol;
    sol.s.assign(n_arms, 0.0);
    if (t <= 0.0) {
        sol.status = SolveStatus::Ok;
        sol.within_tol = true;
        return sol;
    }
    const double dt = ledger_dt(ledgers[0]);

    if (n_arms == 1) {
        sol.s[0] = t;
        sol.status = SolveStatus::Ok;
        const auto& v = ledgers[0].values;
        const size_t idx = std::min(v.size() - 1, size_t(std::llround(t / dt)));
        sol.level = v[idx] / weights[0];
        sol.within_tol = true;
        return sol;
    }

    // Highest level all arms reach within their simulated data.
    double ceiling = kNeverReached;
    int ceiling_arm = -1;
    int ceiling_ties = 0;
    for (int i = 0; i < n_arms; ++i) {
        const double top = ledgers[i].values.back() / weights[i];
        if (top < ceiling) {
            ceiling = top;
            ceiling_arm = i;
            ceiling_ties = 1;
        } else if (top == ceiling) {
            ++ceiling_ties;
        }
    }

    auto ratio_at = [&](int i, double s) {
        const auto& v = ledgers[i].values;
        const size_t idx = std::min(v.size() - 1, size_t(std::llround(s / dt)));
        return v[idx] / weights[i];
    };
    auto finish = [&](double level, int jump) {
        sol.level = level;
        sol.jump_arm = jump;
        double mism = 0.0;
        for (int i = 0; i < n_arms; ++i)
            for (int j = i + 1; j < n_arms; ++j)
                mism = std::max(mism,
                                std::abs(ratio_at(i, sol.s[i]) - ratio_at(j, sol.s[j])));
        sol.max_ratio_mismatch = mism;
        sol.within_tol = mism <= tol;
    };

    if (ceiling <= 0.0 || total_inverse(ledgers, weights, ceiling) <= t) {
        // The data never pins a level above t's worth of time: the budget
        // residual runs into the flat tail of the lowest-topping arm.
        double sum = 0.0;
        for (int i = 0; i < n_arms; ++i) {
            sol.s[i] = inverse_local_time(ledgers[i], weights[i], ceiling);
            sum += sol.s[i];
        }
        const double residual = t - sum;
        const double tail_room =
            ledgers[ceiling_arm].times.back() - sol.s[ceiling_arm];
        if (residual > tail_room + 0.5 * dt) {
            sol.status = SolveStatus::Infeasible;
            sol.message = "ledger for edge " + std::to_string(ledgers[ceiling_arm].edge) +
                          " too short to cover its share of t";
            finish(ceiling, ceiling_arm);
            return sol;
        }
        sol.s[ceiling_arm] += residual;
        sol.status = ceiling_ties > 1 ? SolveStatus::Ambiguous : SolveStatus::Ok;
        if (ceiling_ties > 1)
            sol.message = "two arms top out at the same level; residual assigned to the "
                          "lowest index";
        finish(ceiling, ceiling_arm);
        return sol;
    }

    // Bracket the level by doubling, then bisect.  total_inverse is a
    // nondecreasing step function with H(0) = 0 <= t < H(ceiling).
    double lo = 0.0, hi = std::min(ceiling, 0x1.0p-20);
    while (hi < ceiling && total_inverse(ledgers, weights, hi) <= t) {
        lo = hi;
        hi = std::min(ceiling, hi * 2.0);
    }
    if (total_inverse(ledgers, weights, hi) <= t) hi = ceiling;
    for (int iter = 0; iter < 64; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (total_inverse(ledgers, weights, mid) <= t)
            lo = mid;
        else
            hi = mid;
    }

    double sum = 0.0;
    for (int i = 0; i < n_arms; ++i) {
        sol.s[i] = inverse_local_time(ledgers[i], weights[i], lo);
        sum += sol.s[i];
    }
    const double residual = t - sum;

    // Which arms' inverses jump across the final bracket?
    std::vector<int> jumpers;
    for (int i = 0; i < n_arms; ++i)
        if (inverse_local_time(ledgers[i], weights[i], hi) > sol.s[i]) jumpers.push_back(i);

    if (residual <= 0.25 * dt) {
        sol.status = SolveStatus::Ok;
        finish(lo, -1);
        return sol;
    }
    if (jumpers.empty()) {
        sol.status = SolveStatus::Infeasible;
        sol.message = "positive residual but no arm jumps across the bracket";
        finish(lo, -1);
        return sol;
    }
    sol.s[jumpers.front()] += residual;
    sol.status = jumpers.size() > 1 ? SolveStatus::Ambiguous : SolveStatus::Ok;
    if (jumpers.size() > 1)
        sol.message = "simultaneous flat at the solution level; residual assigned to the "
                      "lowest-index jumping arm";
    finish(lo, jumpers.front());
    return sol;
}

FlatCheckReport no_simultaneous_flat_check(std::span<const LocalTimeLedger> ledgers,
                                           std::span<const double> weights,
                                           std::span<const double> level_grid) {
    const int n_arms = int(ledgers.size());
    FlatCheckReport rep;
    rep.n_levels = std::int64_t(level_grid.size());
    if (n_arms < 2 || level_grid.empty()) return rep;
    const double dt = ledger_dt(ledgers[0]);

    std::vector<double> flat(n_arms);
    for (double level : level_grid) {
        for (int i = 0; i < n_arms; ++i) {
            const auto& v = ledgers[i].values;
            auto it = std::lower_bound(v.begin(), v.end(), weights[i] * level);
            if (it == v.end()) {
                flat[i] = 0.0;  // level beyond this arm's data: nothing to measure
                continue;
            }
            // Run of bit-identical values starting at the first crossing;
            // kernel ledgers only change by exact in-window increments, so
            // equality is exact, not a tolerance.
            size_t k = size_t(it - v.begin()), m = k;
            while (m + 1 < v.size() && v[m + 1] == v[k]) ++m;
            flat[i] = double(m - k) * dt;
        }
        bool any_flat = false;
        bool violated = false;
        for (int i = 0; i < n_arms; ++i) any_flat = any_flat || flat[i] > 2.0 * dt;
        for (int i = 0; i < n_arms && !violated; ++i)
            for (int j = i + 1; j < n_arms; ++j)
                if (flat[i] > 2.0 * dt && flat[j] > 2.0 * dt) {
                    violated = true;
                    if (rep.pairs.size() < 16) rep.pairs.emplace_back(i, j, level);
                    break;
                }
        if (any_flat) ++rep.eligible_levels;
        if (violated) ++rep.violating_levels;
    }
    rep.violation_fraction =
        rep.eligible_levels == 0
            ? 0.0
            : double(rep.violating_levels) / double(rep.eligible_levels);
    return rep;
}

std::vector<double> make_level_grid(std::span<const LocalTimeLedger> ledgers,
                                    std::span<const double> weights, int n_levels,
                                    double frac) {
    double top = kNeverReached;
    for (size_t i = 0; i < ledgers.size(); ++i)
        top = std::min(top, ledgers[i].values.back() / weights[i]);
    std::vector<double> grid;
    if (top <= 0.0 || top == kNeverReached) return grid;
    grid.reserve(n_levels);
    for (int j = 1; j <= n_levels; ++j)
        grid.push_back(frac * top * double(j) / double(n_levels));
    return grid;
}

}  // namespace graphdiff
