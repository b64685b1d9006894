#pragma once

#include <functional>
#include <string>
#include <vector>

#include "carnot_fbp/auxiliary.hpp"
#include "carnot_fbp/config.hpp"
#include "carnot_fbp/continuation.hpp"

namespace cfbp {

struct Check {
  std::string name;
  bool passed = false;
  /// Non-gating checks are reported but do not fail a suite.
  bool gating = true;
  std::string detail;
};

struct Problem {
  DiscretizationPtr disc;
  ModelParams params;  // epsilon = eps0
  SingularSolution singular;
  std::shared_ptr<const CutoffContext> ctx;
  Eigenpair eig;
  double beta_star = 0.0;
};

using LogFn = std::function<void(const std::string&)>;

DiscretizationPtr make_discretization(const RunConfig& cfg);
/// Grid, singular solution, principal eigenpair, beta* estimate.
Problem make_problem(const RunConfig& cfg);

/// <K u, v> against the Gauss-point form over `pairs` random pairs, symmetry.
std::vector<Check> operator_checks(const Discretization& disc, std::uint64_t seed, int pairs = 100);

/// Central differences (t = 1e-5) of E_eps against <E', v> for `probes`
/// smooth random (u in [0, 1.6], v in [-0.5, 0.5], sine modes times a random
/// exponential tilt) at each eps, plain and truncated; relative error <= 1e-6.
std::vector<Check> gradient_checks(const Problem& pb, const std::vector<double>& eps, int probes,
                                   std::uint64_t seed);
/// Worst relative error of the above for one functional.
double gradient_fd_error(const EnergyFunctional& e, int probes, std::uint64_t seed);

/// Invariants of a finished continuation. m1 may be NaN (then the m1
/// inequality is skipped).
std::vector<Check> continuation_checks(const Problem& pb, const ContinuationResult& run, double m1,
                                       std::uint64_t seed);

struct SuiteReport {
  std::vector<Check> checks;
  ContinuationResult run;
  double m1 = 0.0;
  bool passed() const;
};

/// Everything above for one config: operator, gradient, singular,
/// m1 estimate, continuation and its invariants.
SuiteReport run_invariant_suite(const RunConfig& cfg, const LogFn& log = {});

std::string format_check(const Check& c);

}  // namespace cfbp
