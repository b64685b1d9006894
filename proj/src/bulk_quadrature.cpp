#include "carnot_fbp/bulk_quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "carnot_fbp/model.hpp"
#include "carnot_fbp/parallel.hpp"

namespace cfbp {

namespace {

constexpr std::array<double, 6> kGl6x = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                         0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr std::array<double, 6> kGl6w = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                         0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
constexpr std::array<double, 4> kGl4x = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                         0.8611363115940526};
constexpr std::array<double, 4> kGl4w = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                         0.3478548451374538};
static_assert(kOuterOrder == 4);

// A split point of the segment and its derivatives with respect to ua, ub.
struct Cut {
  double t, dua, dub;
};

// Where ya + (yb - ya) t = level. `moves` marks crossings of u (or u - cap),
// whose position depends on the endpoint values of u.
void add_crossing(double ya, double yb, double level, bool moves, Cut* out, int& n) {
  const double d = yb - ya;
  if (d == 0.0) return;
  const double t = (level - ya) / d;
  if (t > 0.0 && t < 1.0) out[n++] = moves ? Cut{t, (t - 1.0) / d, -t / d} : Cut{t, 0.0, 0.0};
}

}  // namespace

LineIntegrals integrate_line(const ModelParams& m, double ua, double ub, const double* cap, bool hessian) {
  LineIntegrals r;
  if (std::max(ua, ub) <= 1.0) return r;
  const double top = 1.0 + m.epsilon;
  Cut cuts[12];
  int nc = 0;
  cuts[nc++] = {0.0, 0.0, 0.0};
  add_crossing(ua, ub, 1.0, true, cuts, nc);
  add_crossing(ua, ub, top, true, cuts, nc);
  double ca = 0, cb = 0;
  if (cap) {
    ca = cap[0];
    cb = cap[1];
    add_crossing(ca, cb, 1.0, false, cuts, nc);
    add_crossing(ca, cb, top, false, cuts, nc);
    add_crossing(ua - ca, ub - cb, 0.0, true, cuts, nc);
  }
  cuts[nc++] = {1.0, 0.0, 0.0};
  std::sort(cuts, cuts + nc, [](const Cut& a, const Cut& b) { return a.t < b.t; });

  // J0, J1 are the exact derivatives of the rule, including the motion of
  // the cuts (the Gauss rule is not exact on non-polynomial densities, so
  // those terms do not cancel). The Hessian leaves them out.
  const double du = ub - ua;
  for (int k = 0; k + 1 < nc; ++k) {
    const double t0 = cuts[k].t, t1 = cuts[k + 1].t;
    const double len = t1 - t0;
    if (len <= 0.0) continue;
    // A piece lying entirely in {u <= 1} contributes nothing.
    if (ua + du * t0 <= 1.0 && ua + du * t1 <= 1.0) continue;
    double dI0 = 0.0, dI1 = 0.0;  // d/dt0, d/dt1 of this piece
    for (int q = 0; q < 6; ++q) {
      const double xi = 0.5 * (kGl6x[q] + 1.0);
      const double t = t0 + xi * len;
      const double w = 0.5 * kGl6w[q] * len;
      const double u = ua + du * t;
      double F, F1, F2;
      if (cap) {
        const double c = ca + (cb - ca) * t;
        if (u <= c) {
          const BulkValue b = bulk_density(m, u);
          F = b.f;
          F1 = b.f1;
          F2 = b.f2;
        } else {
          const BulkValue b = bulk_density(m, c);
          F = b.f + b.f1 * (u - c);
          F1 = b.f1;
          F2 = 0.0;
        }
      } else {
        const BulkValue b = bulk_density(m, u);
        F = b.f;
        F1 = b.f1;
        F2 = b.f2;
      }
      const double l0 = 1.0 - t, l1 = t;
      r.I += w * F;
      r.J0 += w * F1 * l0;
      r.J1 += w * F1 * l1;
      const double wq = 0.5 * kGl6w[q];
      dI0 += wq * (-F + len * F1 * du * (1.0 - xi));
      dI1 += wq * (F + len * F1 * du * xi);
      if (hessian) {
        r.H00 += w * F2 * l0 * l0;
        r.H01 += w * F2 * l0 * l1;
        r.H11 += w * F2 * l1 * l1;
      }
    }
    r.J0 += dI0 * cuts[k].dua + dI1 * cuts[k + 1].dua;
    r.J1 += dI0 * cuts[k].dub + dI1 * cuts[k + 1].dub;
  }
  return r;
}

double bulk_integral(const Grid& grid, const ModelParams& m, const Eigen::VectorXd& u, const Eigen::VectorXd* cap,
                     Eigen::VectorXd* grad, std::vector<Eigen::Triplet<double>>* hess) {
  const int d = grid.dim();
  const int nv = grid.vertices_per_cell();
  const int half = nv / 2;  // vertices with bit 0 clear
  const int outer_pts = d == 1 ? 1 : (d == 2 ? kOuterOrder : kOuterOrder * kOuterOrder);
  const double vol = grid.cell_volume();

  // Outer rule over axes 1..d-1: weights and the factor prod_{b>=1} l_{v_b}
  // for each of the `half` vertex patterns (v >> 1).
  std::vector<double> ow(static_cast<std::size_t>(outer_pts), 1.0);
  std::vector<double> ol(static_cast<std::size_t>(outer_pts * half), 1.0);
  for (int o = 0; o < outer_pts; ++o) {
    double t[2] = {0, 0};
    double w = 1.0;
    for (int b = 0; b < d - 1; ++b) {
      const int i = b == 0 ? o % kOuterOrder : o / kOuterOrder;
      t[b] = 0.5 * (kGl4x[static_cast<std::size_t>(i)] + 1.0);
      w *= 0.5 * kGl4w[static_cast<std::size_t>(i)];
    }
    ow[static_cast<std::size_t>(o)] = w;
    for (int pat = 0; pat < half; ++pat) {
      double l = 1.0;
      for (int b = 0; b < d - 1; ++b) l *= ((pat >> b) & 1) ? t[b] : 1.0 - t[b];
      ol[static_cast<std::size_t>(o * half + pat)] = l;
    }
  }

  const bool linear_top = m.g_kind == GKind::constant_one;
  const double top = 1.0 + m.epsilon;
  const double top_value = bulk_density(m, top).f;

  const int chunks = reduction_chunks();
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  std::vector<Eigen::VectorXd> gparts(grad ? static_cast<std::size_t>(chunks) : 0);
  std::vector<std::vector<Eigen::Triplet<double>>> hparts(hess ? static_cast<std::size_t>(chunks) : 0);

  parallel_chunks(grid.num_cells(), [&](int chunk, std::size_t cb, std::size_t ce) {
    double acc = 0.0;
    Eigen::VectorXd* g = nullptr;
    if (grad) {
      gparts[static_cast<std::size_t>(chunk)] = Eigen::VectorXd::Zero(u.size());
      g = &gparts[static_cast<std::size_t>(chunk)];
    }
    std::vector<Eigen::Triplet<double>>* h = hess ? &hparts[static_cast<std::size_t>(chunk)] : nullptr;
    std::size_t vn[8];
    double uv[8], cv[8], gl[8], hl[64];
    for (std::size_t c = cb; c < ce; ++c) {
      double umax = -1e300;
      for (int v = 0; v < nv; ++v) {
        vn[v] = grid.cell_vertex(c, v);
        uv[v] = u[static_cast<Eigen::Index>(vn[v])];
        umax = std::max(umax, uv[v]);
      }
      if (umax <= 1.0) continue;
      if (cap)
        for (int v = 0; v < nv; ++v) cv[v] = (*cap)[static_cast<Eigen::Index>(vn[v])];
      if (linear_top) {
        // g = 1 and the whole cell (field and cap) above 1 + eps: the density
        // is affine in u there, so the cell integral is the vertex mean.
        double lo = 1e300;
        for (int v = 0; v < nv; ++v) lo = std::min(lo, cap ? std::min(uv[v], cv[v]) : uv[v]);
        if (lo >= top) {
          double mean = 0.0;
          for (int v = 0; v < nv; ++v) mean += uv[v];
          mean /= nv;
          acc += vol * (top_value - m.lambda * (mean - top));
          if (g)
            for (int v = 0; v < nv; ++v) (*g)[static_cast<Eigen::Index>(vn[v])] -= vol * m.lambda / nv;
          continue;
        }
      }
      double cell = 0.0;
      std::fill(gl, gl + nv, 0.0);
      if (h) std::fill(hl, hl + nv * nv, 0.0);
      for (int o = 0; o < outer_pts; ++o) {
        const double* L = &ol[static_cast<std::size_t>(o * half)];
        double ua = 0, ub = 0, ca = 0, cb2 = 0;
        for (int pat = 0; pat < half; ++pat) {
          ua += L[pat] * uv[2 * pat];
          ub += L[pat] * uv[2 * pat + 1];
          if (cap) {
            ca += L[pat] * cv[2 * pat];
            cb2 += L[pat] * cv[2 * pat + 1];
          }
        }
        if (std::max(ua, ub) <= 1.0) continue;
        const double cends[2] = {ca, cb2};
        const LineIntegrals li = integrate_line(m, ua, ub, cap ? cends : nullptr, h != nullptr);
        const double w = ow[static_cast<std::size_t>(o)];
        cell += w * li.I;
        if (g) {
          for (int pat = 0; pat < half; ++pat) {
            gl[2 * pat] += w * L[pat] * li.J0;
            gl[2 * pat + 1] += w * L[pat] * li.J1;
          }
        }
        if (h) {
          const double hh[2][2] = {{li.H00, li.H01}, {li.H01, li.H11}};
          for (int v = 0; v < nv; ++v)
            for (int x = 0; x < nv; ++x) hl[v * nv + x] += w * L[v >> 1] * L[x >> 1] * hh[v & 1][x & 1];
        }
      }
      acc += vol * cell;
      if (g)
        for (int v = 0; v < nv; ++v) (*g)[static_cast<Eigen::Index>(vn[v])] += vol * gl[v];
      if (h) {
        for (int v = 0; v < nv; ++v)
          for (int x = 0; x < nv; ++x)
            if (hl[v * nv + x] != 0.0)
              h->emplace_back(static_cast<int>(vn[v]), static_cast<int>(vn[x]), vol * hl[v * nv + x]);
      }
    }
    partial[static_cast<std::size_t>(chunk)] = acc;
  });

  double total = 0.0;
  for (double p : partial) total += p;
  if (grad) {
    for (const auto& gp : gparts)
      if (gp.size() == u.size()) *grad += gp;
  }
  if (hess)
    for (auto& hp : hparts) hess->insert(hess->end(), hp.begin(), hp.end());
  return total;
}

}  // namespace cfbp
