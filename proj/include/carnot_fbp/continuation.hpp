#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "carnot_fbp/auxiliary.hpp"
#include "carnot_fbp/mountain_pass.hpp"
#include "carnot_fbp/solvers.hpp"

namespace cfbp {

struct ContinuationSchedule {
  std::vector<double> eps;  // strictly decreasing, positive

  /// eps_j = eps0 2^{-j}, j = 0..J.
  static ContinuationSchedule geometric(double eps0, int J);
  /// Throws InvalidArgument unless strictly decreasing and positive.
  void validate() const;
};

struct StageReport {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  int stage = 0;
  double eps = 0.0;
  double E_eps_u0 = nan, E_u0 = nan, E_eps_u1 = nan, E_u1 = nan;
  double res_u0 = nan, res_u1 = nan;
  double tol_u0 = nan, tol_u1 = nan;
  double lip_u0 = nan, lip_u1 = nan;
  double sup_delta_u0 = nan, sup_delta_u1 = nan;  // against the previous stage
  int fb_cells = 0;  // free-boundary crossings of u0
  double jump_mean = nan, jump_max = nan;
  double level = nan;
  double norm_sq_u0 = nan;  // <A u0, u0>
  double m2 = nan;
  int morse_u1 = -1;
  /// E_eps_j(u0 of stage j-1), for the warm-start bound.
  double E_eps_warm = nan;
  int iterations_u0 = 0, newton_u0 = 0, path_iterations = 0, newton_u1 = 0;
  double seconds = 0.0;
};

/// Column names of the stage table, in write order.
std::vector<std::string> stage_table_columns();
std::vector<double> stage_table_row(const StageReport& s);

struct ContinuationOptions {
  MinimizeOptions minimize;
  MountainPassOptions mountain;
  bool mountain_pass = true;
  /// Sampled rim value at every stage (costs a few hundred energy evaluations).
  bool rim = true;
  int rim_directions = 64;
  std::uint64_t seed = 7;
  /// Log callback, one line per stage; may be empty.
  std::function<void(const std::string&)> log;
};

struct ContinuationResult {
  ScalarField u0, u1;
  ScalarField v0;  // barrier
  std::vector<StageReport> stages;
  MountainPassResult last_mountain;  // path of the final stage
  SolveReport report_u0, report_u1;
};

/// Stage loop eps_0 > eps_1 > ...: minimizer warm-started from the previous
/// u0 (stage 0 takes the best minimizer from 0, v0/2, v0, 2 v0), truncation
/// at u0, mountain pass warm-started from the previous path and saddle.
/// Solver errors are rethrown with the stage index prepended.
ContinuationResult run_continuation(DiscretizationPtr disc, const ModelParams& params,
                                    const SingularSolution& singular, const ContinuationSchedule& schedule,
                                    const ContinuationOptions& opt = {});

struct FreeBoundaryPoint {
  std::size_t minus_node = 0, plus_node = 0;  // edge ends, u <= 1 and u > 1
  int axis = 0;
  Point location;      // linear interpolation of u = 1 along the edge
  Point normal;        // unit, pointing into {u > 1}
  double grad_plus_sq = 0.0;
  double grad_minus_sq = 0.0;
};

struct FreeBoundary {
  std::vector<FreeBoundaryPoint> points;
  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
};

/// Edges where u - 1 changes sign. One-sided |grad_G u|^2 comes from the
/// nodal gradients at the two nearest nodes beyond the edge on each side
/// (the edge ends themselves are skipped), extrapolated linearly to the
/// crossing. Crossings without two such nodes on a side are dropped.
/// For a field solving the smoothed problem pass its eps as `layer_eps`: the
/// traces are then taken where u = 1 + layer_eps / 2, the middle of the
/// transition layer, which removes the O(lambda eps) bias of the jump.
FreeBoundary extract_free_boundary(const GroupModel& group, const ScalarField& u, double layer_eps = 0.0);

struct JumpStats {
  double mean = 0.0, max = 0.0;
  std::size_t count = 0;
};
/// |grad_plus_sq - grad_minus_sq - 2| over the boundary; InvalidArgument if empty.
JumpStats jump_check(const FreeBoundary& fb);

struct SandwichReport {
  bool passed = true;
  double E_final = 0.0;       // energy_exact of the final field
  double band_measure = 0.0;  // H({|u - 1| <= h})
  std::vector<double> lower_margin, upper_margin;  // >= 0 when satisfied
};
/// E(u) - slack <= E_eps_j(u_j) <= E(u) + H({|u-1| <= h}) + slack over the
/// last three stages, slack = 10 tol_j. `branch` 0 reads the u0 columns, 1 the u1.
SandwichReport energy_sandwich_check(const Discretization& disc, const ModelParams& params, const ScalarField& u,
                                     const std::vector<StageReport>& stages, int branch = 0);

struct RadonReport {
  int inequality_trials = 0, equality_trials = 0;
  double min_pairing = 0.0;             // min over inequality bumps of pairing / ||xi||
  double max_equality_rel_error = 0.0;  // over bumps inside {u > 1 + 2h}
  int inequality_failures = 0, equality_failures = 0;
  bool passed() const noexcept { return inequality_failures == 0 && equality_failures == 0; }
};
/// Pairs A u - W beta u^{-delta} with random bumps. Bumps whose support (grown
/// by one cell) lies in {u < 1 - 2h} must give >= -1e-8 ||xi||; in
/// {u > 1 + 2h} the pairing must equal lambda <W g((u-1)_+), xi> to 1e-6
/// relative. ||xi|| is the Haar L2 norm. Placements that fit neither set are
/// redrawn (bounded number of tries).
RadonReport radon_measure_check(const Discretization& disc, const ModelParams& params, const ScalarField& u,
                                int trials, std::uint64_t seed = 11);

struct ComparisonReport {
  std::size_t below = 0;   // u < u_beta - tol
  std::size_t strict = 0;  // u > u_beta
  std::size_t interior = 0;
  double strict_fraction = 0.0;
  bool passed() const noexcept { return below == 0 && strict_fraction >= 0.99; }
};
ComparisonReport comparison_check(const ScalarField& u, const ScalarField& u_beta, double tol = 1e-6);

struct BarrierReport {
  double d0 = 0.0;     // from the barrier v0
  double dist = 0.0;   // min distance of {u >= 1} to the boundary
  bool passed = true;  // dist >= d0 - h
};
BarrierReport barrier_check(const ScalarField& u, const ScalarField& v0);

/// Connected components (grid edges) of the interior nodes where pred holds.
int count_components(const Grid& grid, const std::function<bool(std::size_t)>& pred);

}  // namespace cfbp
