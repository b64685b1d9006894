#include "carnot_fbp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

double Profile::operator()(double xq) const {
  if (xq > 0.5 * length) xq = length - xq;
  if (xq <= x.front()) return u.front();
  if (xq >= x.back()) return u.back();
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double h = x[i + 1] - x[i];
  const double t = (xq - x[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * u[i] + (t3 - 2 * t2 + t) * h * du[i] + (-2 * t3 + 3 * t2) * u[i + 1] +
         (t3 - t2) * h * du[i + 1];
}

double Profile::max_value() const { return *std::max_element(u.begin(), u.end()); }

Eigen::VectorXd Profile::sample(const Grid& grid) const {
  if (grid.dim() != 1) throw InvalidArgument("Profile::sample: 1-D grids only");
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.num_nodes()));
  for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
    const double xn = grid.coord(n, 0) - grid.lo()[0];
    v[static_cast<Eigen::Index>(n)] = grid.is_interior(n) ? (*this)(xn) : 0.0;
  }
  return v;
}

namespace {

struct State {
  double x, u, v;
};

using Force = std::function<double(double)>;  // -u'' as a function of u

State rk4(const State& s, double h, const Force& f) {
  const double k1u = s.v, k1v = -f(s.u);
  const double k2u = s.v + 0.5 * h * k1v, k2v = -f(s.u + 0.5 * h * k1u);
  const double k3u = s.v + 0.5 * h * k2v, k3v = -f(s.u + 0.5 * h * k2u);
  const double k4u = s.v + h * k3v, k4v = -f(s.u + h * k3u);
  return {s.x + h, s.u + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u), s.v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)};
}

enum class Stop { reached_end, event, invalid };

// Integrates over the given abscissae. `event` is a signed function of the
// state; a sign change from positive to non-positive inside a step is located
// by bisection on the step length and ends the integration there.
Stop integrate(State s, const std::vector<double>& mesh, const Force& f,
               const std::function<double(const State&)>& event, std::vector<State>& out) {
  out.push_back(s);
  for (double xn : mesh) {
    if (xn <= s.x) continue;
    const double h = xn - s.x;
    State next = rk4(s, h, f);
    if (!std::isfinite(next.u) || !std::isfinite(next.v) || next.u <= 0.0) return Stop::invalid;
    if (event && event(next) <= 0.0) {
      double lo = 0.0, hi = h;
      for (int it = 0; it < 80 && hi - lo > 1e-16 * std::max(1.0, s.x); ++it) {
        const double mid = 0.5 * (lo + hi);
        (event(rk4(s, mid, f)) > 0.0 ? lo : hi) = mid;
      }
      out.push_back(rk4(s, hi, f));
      return Stop::event;
    }
    s = next;
    out.push_back(s);
  }
  return Stop::reached_end;
}

std::vector<double> graded_mesh(double half, int n) {
  std::vector<double> m(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double r = static_cast<double>(i) / n;
    m[static_cast<std::size_t>(i - 1)] = half * r * r * r;
  }
  m.back() = half;
  return m;
}

// Series start near x = 0 for -u'' = beta u^{-delta} with u'(0) = s.
State series_start(double s, double beta, double delta, double x) {
  const double c = beta * std::pow(s, -delta);
  return {x, s * x - c * std::pow(x, 2 - delta) / ((1 - delta) * (2 - delta)),
          s - c * std::pow(x, 1 - delta) / (1 - delta)};
}

Profile make_profile(const std::vector<State>& states, double length, double s0) {
  Profile p;
  p.length = length;
  p.x.push_back(0.0);
  p.u.push_back(0.0);
  p.du.push_back(s0);
  for (const State& st : states) {
    p.x.push_back(st.x);
    p.u.push_back(st.u);
    p.du.push_back(st.v);
  }
  return p;
}

}  // namespace

Profile shoot_singular(double beta, double delta, int n, double length) {
  if (!(beta > 0.0) || !(delta > 0.0 && delta < 1.0)) throw InvalidArgument("shoot_singular: bad parameters");
  if (n < 10) throw InvalidArgument("shoot_singular: need n >= 10");
  const double half = 0.5 * length;
  const std::vector<double> mesh = graded_mesh(half, n);
  const Force f = [&](double u) { return beta * std::pow(u, -delta); };

  // Returns u'(L/2), or -inf when the trajectory hits zero first.
  auto shoot = [&](double s, std::vector<State>* keep) {
    std::vector<State> st;
    const Stop r = integrate(series_start(s, beta, delta, mesh.front()), mesh, f, nullptr, st);
    if (r == Stop::invalid) return -std::numeric_limits<double>::infinity();
    if (keep) *keep = std::move(st);
    return st.back().v;
  };

  double lo = 1e-8, hi = 1.0;
  int guard = 0;
  while (shoot(hi, nullptr) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw NoSolution("shoot_singular: no upper bracket for the initial slope");
  }
  if (shoot(lo, nullptr) > 0.0) throw NoSolution("shoot_singular: no lower bracket for the initial slope");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (shoot(mid, nullptr) > 0.0 ? hi : lo) = mid;
  }
  const double s = 0.5 * (lo + hi);
  std::vector<State> st;
  shoot(s, &st);
  return make_profile(st, length, s);
}

FreeBoundaryPair shoot_free_boundary(const ModelParams& params, int n, double length) {
  params.validate();
  if (n < 10) throw InvalidArgument("shoot_free_boundary: need n >= 10");
  const double half = 0.5 * length;
  const double beta = params.beta, delta = params.delta, lam = params.lambda;
  const std::vector<double> outer_mesh = graded_mesh(half, n);
  const double h_in = half / n;
  const Force outer = [&](double u) { return beta > 0.0 ? beta * std::pow(u, -delta) : 0.0; };
  const Force inner = [&](double u) {
    return lam * g_eval(params, std::max(u - 1.0, 0.0)) + (beta > 0.0 ? beta * std::pow(u, -delta) : 0.0);
  };

  struct Shot {
    bool valid = false;
    double mismatch = 0.0;  // turning point minus L/2
    FreeBoundaryShot fb;
  };
  auto shoot = [&](double s, bool keep) {
    Shot r;
    std::vector<State> st;
    const State start = beta > 0.0 ? series_start(s, beta, delta, outer_mesh.front()) : State{outer_mesh.front(), s * outer_mesh.front(), s};
    // Stop at u = 1 or at a turning point, whichever comes first.
    const Stop a = integrate(start, outer_mesh, outer, [](const State& q) { return std::min(1.0 - q.u, q.v); }, st);
    if (a != Stop::event || st.back().v <= 0.0 || std::abs(st.back().u - 1.0) > 1e-9) return r;
    const State cross = st.back();
    const double qin = std::sqrt(cross.v * cross.v + 2.0);
    std::vector<double> mesh;
    for (int i = 1; cross.x + i * h_in < 4.0 * length; ++i) mesh.push_back(cross.x + i * h_in);
    std::vector<State> in;
    const Stop b = integrate({cross.x, cross.u, qin}, mesh, inner, [](const State& q) { return q.v; }, in);
    if (b == Stop::invalid) return r;
    r.valid = true;
    r.mismatch = b == Stop::event ? in.back().x - half : 4.0 * length;
    if (keep) {
      std::vector<State> all = st;
      all.insert(all.end(), in.begin(), in.end());
      r.fb.profile = make_profile(all, length, s);
      r.fb.slope0 = s;
      r.fb.crossing = cross.x;
      r.fb.slope_outer = cross.v;
      r.fb.slope_inner = qin;
      r.fb.jump_residual = std::abs(qin * qin - cross.v * cross.v - 2.0);
    }
    return r;
  };

  // Scan the initial slope, then bisect each sign change of the mismatch.
  const int scan = 800;
  const double s_lo = 1e-2, s_hi = 1e3;
  std::vector<double> ss(scan);
  std::vector<Shot> shots(scan);
  for (int i = 0; i < scan; ++i) {
    ss[i] = s_lo * std::pow(s_hi / s_lo, static_cast<double>(i) / (scan - 1));
    shots[i] = shoot(ss[i], false);
  }
  FreeBoundaryPair out;
  std::vector<FreeBoundaryShot> found;
  for (int i = 0; i + 1 < scan; ++i) {
    if (!shots[i].valid || !shots[i + 1].valid) continue;
    const double f0 = shots[i].mismatch, f1 = shots[i + 1].mismatch;
    if ((f0 > 0.0) == (f1 > 0.0)) continue;
    double lo = ss[i], hi = ss[i + 1];
    const bool lo_pos = f0 > 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Shot m = shoot(mid, false);
      if (!m.valid) break;
      ((m.mismatch > 0.0) == lo_pos ? lo : hi) = mid;
    }
    const Shot fin = shoot(0.5 * (lo + hi), true);
    if (!fin.valid) continue;
    out.roots.push_back(fin.fb.slope0);
    found.push_back(fin.fb);
  }
  if (found.size() < 2)
    throw GeometryFailure("shoot_free_boundary: found " + std::to_string(found.size()) +
                          " matched profile(s); lambda may be below the two-solution threshold");
  // Largest slope gives the largest plateau; the next one is the unstable branch.
  out.u0 = found[found.size() - 1];
  out.u1 = found[found.size() - 2];
  return out;
}

double ScanAxis::at(int i) const {
  if (count <= 1) return lo;
  const double r = static_cast<double>(i) / (count - 1);
  return log ? lo * std::pow(hi / lo, r) : lo + (hi - lo) * r;
}

namespace {

ScanResult scan_extremum(const std::function<double(const std::vector<double>&)>& f, const std::vector<ScanAxis>& axes,
                         bool minimize) {
  if (axes.empty()) throw InvalidArgument("dense_scan: no axes");
  std::vector<int> idx(axes.size(), 0);
  std::vector<double> arg(axes.size());
  ScanResult best;
  best.value = minimize ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t a = 0; a < axes.size(); ++a) arg[a] = axes[a].at(idx[a]);
    const double v = f(arg);
    if (minimize ? v < best.value : v > best.value) {
      best.value = v;
      best.arg = arg;
    }
    std::size_t a = 0;
    while (a < axes.size() && ++idx[a] == axes[a].count) idx[a++] = 0;
    if (a == axes.size()) break;
  }
  return best;
}

}  // namespace

ScanResult dense_scan_min(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<ScanAxis>& axes) {
  return scan_extremum(f, axes, true);
}

ScanResult dense_scan_max(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<ScanAxis>& axes) {
  return scan_extremum(f, axes, false);
}

double dense_scan_threshold(const std::function<bool(double)>& pred, const ScanAxis& axis) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < axis.count; ++i)
    if (pred(axis.at(i))) best = axis.at(i);
  return best;
}

double dense_integral(const std::function<double(double)>& f, double lo, double hi, int count) {
  if (count < 2) throw InvalidArgument("dense_integral: need at least two points");
  const double h = (hi - lo) / (count - 1);
  double s = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < count - 1; ++i) s += f(lo + i * h);
  return s * h;
}

}  // namespace cfbp
