#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "carnot_fbp/geometry.hpp"

namespace cfbp {

struct ModelParams;

/// Integrals over tau in [0,1] of the (optionally capped) bulk density along a
/// segment where u is linear: I = int f, J_s = int f' l_s, H_st = int f'' l_s l_t
/// with l_0 = 1 - tau, l_1 = tau.
struct LineIntegrals {
  double I = 0, J0 = 0, J1 = 0, H00 = 0, H01 = 0, H11 = 0;
};

/// cap == nullptr means no truncation; otherwise cap[0], cap[1] are the cap
/// values at the segment ends. The segment is split where u or the cap cross
/// 1 or 1 + eps and where u meets the cap; each piece uses 6-point Gauss-Legendre.
/// J0, J1 differentiate the rule exactly (split points move with u); the
/// H entries hold the split points fixed.
LineIntegrals integrate_line(const ModelParams& m, double ua, double ub, const double* cap, bool hessian);

/// Sum over cells of the bulk integral on the Q1 interpolant. Lines along axis 0
/// are integrated piecewise, the remaining axes with a tensor Gauss-Legendre
/// rule. Optionally accumulates the nodal gradient and node-indexed Hessian
/// triplets.
double bulk_integral(const Grid& grid, const ModelParams& m, const Eigen::VectorXd& u, const Eigen::VectorXd* cap,
                     Eigen::VectorXd* grad, std::vector<Eigen::Triplet<double>>* hess);

/// Points per axis of the outer Gauss-Legendre rule.
inline constexpr int kOuterOrder = 4;

}  // namespace cfbp
