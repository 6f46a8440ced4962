#pragma once

// The multi-parameter time change.  `allocate` plays the round-robin quantum
// scheme over the edge ledgers (each arm runs until its weighted local time
// reaches the current target level, then the target is raised);
// `solve_time_equations` independently finds the same split by inverting the
// common-level equation system, which gives a cross-check oracle that shares
// no code with the scheduler.

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "graphdiff/edge_dynamics.hpp"

namespace graphdiff {

inline constexpr double kDefaultQuantum = 0x1.0p-10;  // local-time units

// Per-arm clocks T_i on the global grid.  Internally one arm advances by
// exactly dt per grid step, so sum_i T_i(t_k) = t_k holds at integer-step
// precision; the double arrays only add multiplication rounding.
struct TimeChange {
    std::vector<double> times;                 // 0, dt, ..., n*dt
    std::vector<std::vector<double>> clocks;   // clocks[arm][k] = T_arm(t_k)
    double quantum = kDefaultQuantum;
    std::vector<std::uint32_t> active;         // arm advanced during step k
    // Largest single-step weighted ledger increment consumed anywhere; the
    // achievable ratio agreement is quantum + this jump, so it is reported
    // alongside the clocks as the self-calibrated part of the bound.
    double max_step_ratio_jump = 0.0;
};

// Scheduler snapshot when the budget ran out (mostly for tests/diagnostics).
struct AllocationState {
    std::uint32_t active_arm = 0;
    double level = 0.0;                        // current target in L/alpha units
    std::vector<std::int64_t> consumed_steps;  // per-arm steps taken
};

// Runs the scheme until sum of clocks reaches `horizon`.
//   initial_arm >= 0: that arm runs first until its ledger first increases —
//   used when the start point sits away from the shared vertex, where the
//   continuum time change spends an initial stretch entirely on the start
//   edge.  Arms whose ledger is identically zero are never scheduled (they
//   can never meet a positive target; this is how zero-volatility test edges
//   stay frozen).
// Throws NumericError naming the starved arm if some ledger runs out of
// simulated steps before the budget is met.
TimeChange allocate(std::span<const LocalTimeLedger> ledgers,
                    std::span<const double> weights, double horizon, double quantum,
                    int initial_arm = -1, AllocationState* final_state = nullptr);

enum class SolveStatus { Ok, Ambiguous, Infeasible };

struct TimeEquationSolution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> s;          // per-arm clock times, sum = t
    double level = 0.0;             // common weighted local-time level
    int jump_arm = -1;              // arm that absorbed the budget residual
    double max_ratio_mismatch = 0.0;
    bool within_tol = false;
    std::string message;
};

// Solves  sum_i s_i = t,  L^i(s_i)/alpha_i all equal  by monotone bisection
// on the common level (64 iterations after doubling finds a bracket).  The
// residual t - sum_i h_i(level) is assigned to the unique arm whose inverse
// jumps across the final bracket; if two arms jump there the discrete data
// cannot attribute it and status = Ambiguous (the residual then goes to the
// lowest-index jumping arm, flagged, never silently).  Infeasible = some
// ledger is too short to cover its share of t.
TimeEquationSolution solve_time_equations(std::span<const LocalTimeLedger> ledgers,
                                          std::span<const double> weights, double t,
                                          double tol);

struct FlatCheckReport {
    std::int64_t n_levels = 0;          // grid levels probed
    std::int64_t eligible_levels = 0;   // levels where some arm is flat > 2*dt
    std::int64_t violating_levels = 0;  // levels where two or more arms are
    double violation_fraction = 0.0;    // violating / eligible (0 when none)
    // First few offending (arm_i, arm_j, level) triples, for diagnostics.
    std::vector<std::tuple<int, int, double>> pairs;
};

// For each level l in level_grid, measures how long each weighted ledger sits
// flat (bit-identical values) at its first crossing of l.  A level where some
// arm is flat longer than 2*dt is where an inverse map jumps; the claim under
// test is that exactly one arm jumps there, so a violation is a level where a
// second arm is flat too, and the summary fraction is taken over the levels
// where a jump happens at all.  Two copies of one path then score exactly 1,
// and independent arms should score a vanishing fraction as dt -> 0.
FlatCheckReport no_simultaneous_flat_check(std::span<const LocalTimeLedger> ledgers,
                                           std::span<const double> weights,
                                           std::span<const double> level_grid);

// Evenly spaced levels over (0, frac * min_i max-ratio], the range all arms
// actually reach.
std::vector<double> make_level_grid(std::span<const LocalTimeLedger> ledgers,
                                    std::span<const double> weights, int n_levels,
                                    double frac = 0.9);

}  // namespace graphdiff
