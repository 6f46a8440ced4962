#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "graphdiff/bandit_clock.hpp"
#include "graphdiff/errors.hpp"
#include "oracles.hpp"

using namespace graphdiff;

namespace {

// Deterministic ledger growing at `slope` local-time units per clock unit.
// For such ledgers the continuum time change is available in closed form:
// equalizing L_i(T_i)/alpha_i with sum T_i = t gives
//   T_i(t) = t * (alpha_i / slope_i) / sum_j (alpha_j / slope_j).
LocalTimeLedger linear_ledger(double slope, std::int64_t n_steps, double dt, int edge = 0) {
    LocalTimeLedger led;
    led.edge = edge;
    led.vertex = 0;
    led.times.resize(n_steps + 1);
    led.values.resize(n_steps + 1);
    for (std::int64_t k = 0; k <= n_steps; ++k) {
        led.times[k] = double(k) * dt;
        led.values[k] = slope * double(k) * dt;
    }
    return led;
}

LocalTimeLedger zero_ledger(std::int64_t n_steps, double dt, int edge = 0) {
    return linear_ledger(0.0, n_steps, dt, edge);
}

}  // namespace

TEST_CASE("default quantum is 2^-10") { CHECK(kDefaultQuantum == 0.0009765625); }

TEST_CASE("allocate matches the closed-form split on linear ledgers") {
    const double dt = 1e-3;
    const std::vector<double> slopes = {1.0, 0.5};
    const std::vector<double> alpha = {0.6, 0.4};
    const std::vector<LocalTimeLedger> leds = {linear_ledger(slopes[0], 2000, dt, 0),
                                               linear_ledger(slopes[1], 2000, dt, 1)};
    const double t = 0.7777;
    const TimeChange tc = allocate(leds, alpha, t, kDefaultQuantum);

    const std::int64_t n = grid_steps(t, dt);
    REQUIRE(std::int64_t(tc.active.size()) == n);
    REQUIRE(tc.clocks.size() == 2);
    REQUIRE(std::int64_t(tc.times.size()) == n + 1);

    // the self-reported jump equals the largest weighted per-step increment
    const double jump = std::max(slopes[0] * dt / alpha[0], slopes[1] * dt / alpha[1]);
    CHECK(tc.max_step_ratio_jump == doctest::Approx(jump));

    double denom = 0.0;
    for (int i = 0; i < 2; ++i) denom += alpha[i] / slopes[i];
    const double tol_level = kDefaultQuantum + jump;
    for (int i = 0; i < 2; ++i) {
        const double share = (alpha[i] / slopes[i]) / denom;
        for (std::int64_t k = 0; k <= n; k += 97) {
            const double want = share * tc.times[k];
            const double tol = tol_level * (alpha[i] / slopes[i]) + 3.0 * dt;
            CHECK(std::abs(tc.clocks[i][k] - want) < tol);
        }
    }
}

TEST_CASE("clocks partition the budget exactly") {
    const double dt = 1e-3;
    const std::vector<double> alpha = {0.5, 0.3, 0.2};
    const std::vector<LocalTimeLedger> leds = {linear_ledger(1.0, 3000, dt, 0),
                                               linear_ledger(0.7, 3000, dt, 1),
                                               linear_ledger(0.45, 3000, dt, 2)};
    const TimeChange tc = allocate(leds, alpha, 1.0, kDefaultQuantum);
    for (size_t k = 0; k < tc.times.size(); ++k) {
        double sum = 0.0;
        for (const auto& c : tc.clocks) sum += c[k];
        CHECK(std::abs(sum - tc.times[k]) < 1e-12);
    }
    // per-step movement: exactly one arm advances, by exactly dt
    for (size_t k = 0; k + 1 < tc.times.size(); ++k) {
        int moved = 0;
        for (const auto& c : tc.clocks) {
            const double inc = c[k + 1] - c[k];
            if (inc != 0.0) {
                ++moved;
                CHECK(inc == doctest::Approx(dt));
            }
        }
        CHECK(moved == 1);
        CHECK(tc.active[k] < 3);
    }
}

TEST_CASE("equal arms are served in index order") {
    const double dt = 1e-3;
    const std::vector<double> alpha = {0.5, 0.5};
    const std::vector<LocalTimeLedger> leds = {linear_ledger(1.0, 1000, dt, 0),
                                               linear_ledger(1.0, 1000, dt, 1)};
    const TimeChange tc = allocate(leds, alpha, 0.5, kDefaultQuantum);
    CHECK(tc.active[0] == 0);
    for (size_t k = 0; k < tc.times.size(); ++k) CHECK(tc.clocks[0][k] >= tc.clocks[1][k]);
}

TEST_CASE("starved allocation names the edge and asks for more simulation") {
    const double dt = 1e-3;
    const std::vector<double> alpha = {0.5, 0.5};
    const std::vector<LocalTimeLedger> leds = {linear_ledger(1.0, 100, dt, 7),
                                               linear_ledger(1.0, 100, dt, 8)};
    try {
        allocate(leds, alpha, 0.5, kDefaultQuantum);
        FAIL_CHECK("expected NumericError");
    } catch (const NumericError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("simulate more") != std::string::npos);
    }
}

TEST_CASE("inert ledgers are never scheduled") {
    const double dt = 1e-3;
    const std::vector<double> alpha = {0.4, 0.3, 0.3};
    const std::vector<LocalTimeLedger> leds = {linear_ledger(1.0, 2000, dt, 0),
                                               zero_ledger(2000, dt, 1),
                                               linear_ledger(0.5, 2000, dt, 2)};
    const TimeChange tc = allocate(leds, alpha, 1.0, kDefaultQuantum);
    for (double c : tc.clocks[1]) CHECK(c == 0.0);
    CHECK(tc.clocks[0].back() + tc.clocks[2].back() == doctest::Approx(1.0));

    const std::vector<LocalTimeLedger> all_zero = {zero_ledger(2000, dt, 0),
                                                   zero_ledger(2000, dt, 1)};
    CHECK_THROWS_AS(allocate(all_zero, std::vector<double>{0.5, 0.5}, 0.5, kDefaultQuantum),
                    NumericError);
}

TEST_CASE("initial arm runs alone until its ledger first moves") {
    const double dt = 1e-3;
    // arm 0 sits at zero local time for 31 steps, then grows
    LocalTimeLedger slow = linear_ledger(1.0, 2000, dt, 0);
    for (std::int64_t k = 0; k <= 2000; ++k)
        slow.values[k] = std::max(0.0, slow.values[k] - 31.0 * dt);
    const std::vector<LocalTimeLedger> leds = {slow, linear_ledger(1.0, 2000, dt, 1)};
    const std::vector<double> alpha = {0.5, 0.5};

    AllocationState st;
    const TimeChange tc = allocate(leds, alpha, 1.0, kDefaultQuantum, 0, &st);
    for (std::int64_t k = 0; k <= 31; ++k) {
        CHECK(tc.clocks[0][k] == doctest::Approx(double(k) * dt));
        CHECK(tc.clocks[1][k] == 0.0);
    }
    CHECK(tc.clocks[1].back() > 0.0);
    CHECK(st.consumed_steps[0] + st.consumed_steps[1] == grid_steps(1.0, dt));
}

TEST_CASE("single arm gets the identity clock") {
    const double dt = 1e-3;
    const std::vector<LocalTimeLedger> leds = {linear_ledger(2.0, 500, dt, 0)};
    const std::vector<double> alpha = {1.0};
    const TimeChange tc = allocate(leds, alpha, 0.25, kDefaultQuantum);
    REQUIRE(tc.clocks.size() == 1);
    for (size_t k = 0; k < tc.times.size(); ++k) CHECK(tc.clocks[0][k] == tc.times[k]);
}

TEST_CASE("solve_time_equations matches the closed form and the scheduler") {
    const double dt = 1e-3;
    const std::vector<double> slopes = {1.0, 0.5};
    const std::vector<double> alpha = {0.6, 0.4};
    const std::vector<LocalTimeLedger> leds = {linear_ledger(slopes[0], 2000, dt, 0),
                                               linear_ledger(slopes[1], 2000, dt, 1)};
    const double t = 0.7777;
    const double jump = std::max(slopes[0] * dt / alpha[0], slopes[1] * dt / alpha[1]);
    const double tol = kDefaultQuantum + jump;

    const TimeEquationSolution sol = solve_time_equations(leds, alpha, t, tol);
    REQUIRE(sol.status != SolveStatus::Infeasible);
    CHECK(sol.within_tol);
    CHECK(sol.max_ratio_mismatch <= tol);

    double denom = 0.0;
    for (int i = 0; i < 2; ++i) denom += alpha[i] / slopes[i];
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double want = t * (alpha[i] / slopes[i]) / denom;
        CHECK(std::abs(sol.s[i] - want) < tol * (alpha[i] / slopes[i]) + 3.0 * dt);
        sum += sol.s[i];
    }
    CHECK(sum == doctest::Approx(t).epsilon(1e-12));

    // agreement with the scheduler's split at the same t
    const TimeChange tc = allocate(leds, alpha, t, kDefaultQuantum);
    for (int i = 0; i < 2; ++i)
        CHECK(std::abs(tc.clocks[i].back() - sol.s[i]) <
              2.0 * tol * (alpha[i] / slopes[i]) + 3.0 * dt);
}

TEST_CASE("solve reports zero clocks at t = 0") {
    const double dt = 1e-3;
    const std::vector<LocalTimeLedger> leds = {linear_ledger(1.0, 100, dt, 0),
                                               linear_ledger(1.0, 100, dt, 1)};
    const auto sol = solve_time_equations(leds, std::vector<double>{0.5, 0.5}, 0.0, 1e-3);
    CHECK(sol.status == SolveStatus::Ok);
    CHECK(sol.s == std::vector<double>{0.0, 0.0});
}

TEST_CASE("solve flags short ledgers as infeasible") {
    const double dt = 1e-3;
    const std::vector<LocalTimeLedger> leds = {linear_ledger(1.0, 100, dt, 3),
                                               linear_ledger(1.0, 100, dt, 4)};
    const auto sol = solve_time_equations(leds, std::vector<double>{0.5, 0.5}, 0.5, 1e-3);
    CHECK(sol.status == SolveStatus::Infeasible);
    CHECK(sol.message.find("too short") != std::string::npos);
}

TEST_CASE("duplicated data is reported ambiguous, filled at the lowest index") {
    const double dt = 1e-3;
    // Identical ledgers and weights: every level is flat on both arms at
    // once, so the discrete system cannot attribute the residual.
    const LocalTimeLedger led = linear_ledger(1.0, 2000, dt, 0);
    const std::vector<LocalTimeLedger> leds = {led, led};
    const std::vector<double> alpha = {0.5, 0.5};
    const auto sol = solve_time_equations(leds, alpha, 0.505, kDefaultQuantum + dt / 0.5);
    CHECK(sol.status == SolveStatus::Ambiguous);
    CHECK(sol.jump_arm == 0);
    CHECK_FALSE(sol.message.empty());
    CHECK(sol.s[0] + sol.s[1] == doctest::Approx(0.505).epsilon(1e-12));
    CHECK(sol.s[0] >= sol.s[1]);
}

TEST_CASE("frozen-arm degenerate system: both conventions satisfy the equations") {
    // With a zero ledger the discrete system is degenerate: the scheduler
    // starves the frozen arm (clock 0), while the solver may park the whole
    // budget on it at level 0 -- both have all ratios equal.  This corner is
    // outside the elliptic setting and only reachable through the
    // zero-volatility test hatch, so the contract is just "no crash, budget
    // conserved, ratios consistent".
    const double dt = 1e-3;
    const std::vector<LocalTimeLedger> leds = {zero_ledger(2000, dt, 0),
                                               linear_ledger(1.0, 2000, dt, 1)};
    const std::vector<double> alpha = {0.5, 0.5};
    const auto sol = solve_time_equations(leds, alpha, 0.5, 1e-2);
    CHECK(sol.s[0] + sol.s[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sol.within_tol);
}

namespace {

// Kernel ledger of a reflected BM at its vertex — the genuine article the
// flat check is specified against.  At dt = 1e-3 a window visit is almost
// always a single step, so nearly every level's flat run is a full excursion.
LocalTimeLedger simulated_ledger(double dt, double horizon, std::uint64_t lane) {
    EdgeSpec e;
    e.id = int(lane);
    e.endpoints = {0};
    e.length = kInfiniteLength;
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = horizon;
    NormalStream rng(23, make_stream(kStreamTagEdgeNoise, 0, lane));
    return local_time_kernel(simulate_reflected_edge(e, 0.0, cfg, rng), 0.0,
                             cfg.kernel_eps);
}

}  // namespace

TEST_CASE("flat check: duplicated path is the positive control") {
    const std::vector<double> alpha = {0.5, 0.5};
    const LocalTimeLedger led = simulated_ledger(1e-3, 2.0, 1);
    const std::vector<LocalTimeLedger> dup = {led, led};
    const auto grid = make_level_grid(dup, alpha, 200);
    REQUIRE(std::int64_t(grid.size()) == 200);
    const auto rep = no_simultaneous_flat_check(dup, alpha, grid);
    CHECK(rep.n_levels == 200);
    CHECK(rep.eligible_levels > 0);
    // identical arms: every level with a jump has both arms jumping
    CHECK(rep.violating_levels == rep.eligible_levels);
    CHECK(rep.violation_fraction == 1.0);
    CHECK(rep.pairs.size() <= 16);
    CHECK_FALSE(rep.pairs.empty());
    CHECK(std::get<0>(rep.pairs[0]) == 0);
    CHECK(std::get<1>(rep.pairs[0]) == 1);
}

TEST_CASE("flat check: independent ledgers violate less than duplicates") {
    const std::vector<double> alpha = {0.5, 0.5};
    // Averaged over replicas so the comparison is not one path's luck.
    double indep_frac = 0.0, dup_frac = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const std::vector<LocalTimeLedger> indep = {
            simulated_ledger(1e-3, 2.0, 100 + 2 * std::uint64_t(r)),
            simulated_ledger(1e-3, 2.0, 101 + 2 * std::uint64_t(r))};
        const auto grid = make_level_grid(indep, alpha, 100);
        indep_frac += no_simultaneous_flat_check(indep, alpha, grid).violation_fraction;
        const std::vector<LocalTimeLedger> dup = {indep[0], indep[0]};
        dup_frac += no_simultaneous_flat_check(dup, alpha, make_level_grid(dup, alpha, 100))
                        .violation_fraction;
    }
    CHECK(indep_frac < dup_frac);
    CHECK(dup_frac / reps == 1.0);
}

TEST_CASE("level grid spans the commonly reached range") {
    const double dt = 1e-3;
    const std::vector<LocalTimeLedger> leds = {linear_ledger(1.0, 1000, dt, 0),
                                               linear_ledger(0.25, 1000, dt, 1)};
    const std::vector<double> alpha = {0.5, 0.5};
    const auto grid = make_level_grid(leds, alpha, 50, 0.9);
    REQUIRE(grid.size() == 50);
    // arm 1 tops out at 0.25 * 1.0 / 0.5 = 0.5; the grid must stay below it
    CHECK(grid.back() == doctest::Approx(0.9 * 0.5));
    CHECK(grid.front() > 0.0);
    for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}
