#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "bettilab/errors.hpp"
#include "bettilab/poly.hpp"
#include "bettilab/precision.hpp"

namespace bettilab {

struct QuadratureConfig {
  int nodes = 96;            // base node count per segment; >= 16
  double refine_tol = 1e-9;  // allowed relative disagreement between refinement levels
  Precision precision = Precision::f64;
  int max_depth = 7;         // segment bisection cap before QuadratureDivergence
};

namespace quad {

template <class C>
PolyT<C> convert_poly(const Poly& f) {
  std::vector<C> c(f.coeffs().size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = scalar_traits<C>::from_std(f.coeffs()[k]);
  return PolyT<C>(std::move(c));
}

// ---------------------------------------------------------------------------
// Square-root branch continuation.
//
// y is a branch of sqrt(f) followed along a straight segment. Each step picks
// the square root closest to the first-order prediction y + f'(x)/(2y) dx.
// A step is accepted only when the predicted relative change stays small and
// the picked root lies within 90 degrees of the prediction; in that regime
// the wrong root is provably farther from the prediction than the right one.
// Otherwise the step is bisected.
// ---------------------------------------------------------------------------

template <class C>
C continue_branch(const PolyT<C>& f, const PolyT<C>& df, C x0, C y0, const C& x1) {
  using std::abs;
  using std::conj;
  using std::real;
  using std::sqrt;
  using R = typename scalar_traits<C>::real_type;

  C x = x0;
  C y = y0;
  std::vector<C> targets{x1};
  int guard = 0;
  while (!targets.empty()) {
    if (++guard > 400000) fail(errc::quadrature_divergence, "branch continuation stalled");
    const C xt = targets.back();
    const C dx = xt - x;
    const C shift = df.eval(x) / (C(2) * y) * dx;
    const C ypred = y + shift;

    const double y_mag = scalar_traits<C>::to_double(abs(y));
    const bool small_step = scalar_traits<C>::to_double(abs(shift)) <= 0.25 * y_mag;

    bool accepted = false;
    if (small_step || abs(dx) == R(0)) {
      C cand = sqrt(f.eval(xt));
      if (abs(cand + ypred) <= abs(cand - ypred)) cand = -cand;
      const bool aligned = real(cand * conj(ypred)) > R(0);
      const bool close = scalar_traits<C>::to_double(abs(cand - ypred)) <= 0.5 * y_mag;
      if ((aligned && close) || abs(dx) == R(0)) {
        x = xt;
        y = cand;
        targets.pop_back();
        accepted = true;
      }
    }
    if (!accepted) {
      if (scalar_traits<C>::to_double(abs(dx)) < 1e-15 * (1.0 + scalar_traits<C>::to_double(abs(x))))
        fail(errc::quadrature_divergence, "branch continuation cannot resolve a sheet");
      targets.push_back(x + dx * C(0.5));
    }
  }
  return y;
}

template <class C>
C continue_polyline(const PolyT<C>& f, const std::vector<C>& waypoints, C y0) {
  const PolyT<C> df = f.derivative();
  C y = y0;
  for (std::size_t k = 1; k < waypoints.size(); ++k)
    y = continue_branch(f, df, waypoints[k - 1], y, waypoints[k]);
  return y;
}

/// y values at the listed positions, visited in order starting from the seed.
template <class C>
std::vector<C> track_values(const PolyT<C>& f, const PolyT<C>& df, C x_seed, C y_seed,
                            const std::vector<C>& xs) {
  std::vector<C> ys(xs.size());
  C x = x_seed;
  C y = y_seed;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    y = continue_branch(f, df, x, y, xs[k]);
    x = xs[k];
    ys[k] = y;
  }
  return ys;
}

// ---------------------------------------------------------------------------
// Node tables.
// ---------------------------------------------------------------------------

template <class R>
R pi_value() {
  using std::atan;
  static const R pi = R(4) * atan(R(1));
  return pi;
}

template <class R>
std::vector<std::pair<R, R>> legendre_nodes_uncached(int n) {
  using std::abs;
  using std::cos;
  const R eps = std::numeric_limits<R>::epsilon() * 8;
  std::vector<std::pair<R, R>> nw(n);
  for (int k = 0; k < n; ++k) {
    R x = R(cos(M_PI * (k + 0.75) / (n + 0.5)));
    R dp = R(0);
    for (int it = 0; it < 60; ++it) {
      R p0 = R(1), p1 = x;
      for (int j = 2; j <= n; ++j) {
        const R p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / R(j);
        p0 = p1;
        p1 = p2;
      }
      dp = R(n) * (x * p1 - p0) / (x * x - R(1));
      const R step = p1 / dp;
      x -= step;
      if (abs(step) < eps * (R(1) + abs(x))) break;
    }
    nw[k] = {x, R(2) / ((R(1) - x * x) * dp * dp)};
  }
  return nw;
}

template <class R>
const std::vector<std::pair<R, R>>& gauss_legendre(int n) {
  static std::map<int, std::vector<std::pair<R, R>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, legendre_nodes_uncached<R>(n)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// Integral engines. All integrate the m forms x^j dx / y, j = 0..m-1, with
// the branch of y pinned by the stated seed, and report a two-level
// refinement disagreement as the error estimate.
// ---------------------------------------------------------------------------

template <class C>
struct IntegralResult {
  std::vector<C> vals;
  double err = 0.0;
};

namespace detail {

template <class C>
void add_scaled_powers(std::vector<C>& acc, const C& x, const C& w, int m) {
  C p = w;
  for (int j = 0; j < m; ++j) {
    acc[j] += p;
    p *= x;
  }
}

template <class C>
double rel_diff(const std::vector<C>& a, const std::vector<C>& b) {
  using std::abs;
  double d = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double den = 1.0 + scalar_traits<C>::to_double(abs(b[j]));
    d = std::max(d, scalar_traits<C>::to_double(abs(a[j] - b[j])) / den);
  }
  return d;
}

// Gauss-Chebyshev pass over a full branch segment [u, v]; the 1/sqrt endpoint
// behaviour is absorbed by the weight.
template <class C>
std::vector<C> chebyshev_pass(const PolyT<C>& f, const PolyT<C>& df, const C& u, const C& v,
                              const C& y_mid, int K, int m) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  using R = typename scalar_traits<C>::real_type;

  const C mid = (u + v) * C(0.5);
  const C half = (v - u) * C(0.5);

  const R pi = pi_value<R>();
  std::vector<R> t_right, t_left;  // center-out ordering on each side
  std::vector<R> s_right, s_left;  // sqrt(1-t^2)
  for (int k = K / 2; k >= 1; --k) {
    const R theta = pi * R(2 * k - 1) / R(2 * K);
    t_right.push_back(cos(theta));
    s_right.push_back(sin(theta));
  }
  for (int k = K / 2 + 1; k <= K; ++k) {
    const R theta = pi * R(2 * k - 1) / R(2 * K);
    t_left.push_back(cos(theta));
    s_left.push_back(sin(theta));
  }

  std::vector<C> acc(m, C(0));
  auto sweep = [&](const std::vector<R>& ts, const std::vector<R>& ss) {
    std::vector<C> xs(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) xs[i] = mid + half * C(ts[i]);
    const std::vector<C> ys = track_values(f, df, mid, y_mid, xs);
    for (std::size_t i = 0; i < ts.size(); ++i)
      add_scaled_powers(acc, xs[i], C(ss[i]) / ys[i], m);
  };
  sweep(t_right, s_right);
  sweep(t_left, s_left);

  const C factor = half * C(pi / R(K));
  for (auto& a : acc) a *= factor;
  return acc;
}

// tanh-sinh pass along a path with no endpoint singularity; the fallback for
// legs whose smooth factor has poles near the path. Nodes in the last 1e-13
// sliver at either end are dropped; for a bounded integrand that loss is far
// below the target tolerances.
template <class C>
std::vector<C> tanhsinh_regular(const PolyT<C>& f, const PolyT<C>& df, const C& z1, const C& z2,
                                const C& y_z1, int level, int m) {
  const C mid = (z1 + z2) * C(0.5);
  const C half = (z2 - z1) * C(0.5);
  const double h = std::ldexp(1.0, -level);

  std::vector<double> ts{0.0};
  std::vector<double> ws{h * M_PI_2};
  for (int j = 1;; ++j) {
    const double a = j * h;
    const double q = M_PI_2 * std::sinh(a);
    const double t = std::tanh(q);
    if (1.0 - t < 1e-13) break;
    const double w = h * M_PI_2 * std::cosh(a) / (std::cosh(q) * std::cosh(q));
    ts.push_back(t);
    ws.push_back(w);
  }

  const C y_mid = continue_branch(f, df, z1, y_z1, mid);
  std::vector<C> acc(m, C(0));
  auto sweep = [&](int dir) {
    std::vector<C> xs;
    for (std::size_t i = 1; i < ts.size(); ++i)
      xs.push_back(mid + half * C(dir > 0 ? ts[i] : -ts[i]));
    const std::vector<C> ys = track_values(f, df, mid, y_mid, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
      add_scaled_powers(acc, xs[i], C(ws[i + 1]) / ys[i], m);
  };
  add_scaled_powers(acc, mid, C(ws[0]) / y_mid, m);
  sweep(+1);
  sweep(-1);

  for (auto& a : acc) a *= half;
  return acc;
}

}  // namespace detail

template <class C>
IntegralResult<C> integrate_regular(const PolyT<C>& f, C z1, C z2, C y_z1, int m,
                                    const QuadratureConfig& cfg, int depth = 0);

/// ∫ x^j dx / y from branch point b to regular point z; y(z) = y_z.
/// The substitution x = b + (z-b) tau^2 removes the endpoint singularity.
template <class C>
IntegralResult<C> integrate_from_branch(const PolyT<C>& f, C b, C z, C y_z, int m,
                                        const QuadratureConfig& cfg, int depth = 0) {
  using std::sqrt;
  const PolyT<C> df = f.derivative();
  const C span = z - b;

  auto pass = [&](int K) {
    const auto& nw = gauss_legendre<typename scalar_traits<C>::real_type>(K);
    // tau descending from 1 toward 0, tracking from the regular end inward
    std::vector<C> xs(K);
    std::vector<C> taus(K);
    for (int i = 0; i < K; ++i) {
      const auto tau = (nw[i].first + 1) / 2;  // nodes are descending in i
      taus[i] = C(tau);
      xs[i] = b + span * C(tau) * C(tau);
    }
    const std::vector<C> ys = track_values(f, df, z, y_z, xs);
    std::vector<C> acc(m, C(0));
    for (int i = 0; i < K; ++i) {
      const C w = C(nw[i].second / 2) * C(2) * span * taus[i] / ys[i];
      detail::add_scaled_powers(acc, xs[i], w, m);
    }
    return acc;
  };

  const int K = std::max(cfg.nodes, 16);
  auto lo = pass(K);
  auto hi = pass(2 * K);
  const double err = detail::rel_diff(lo, hi);
  if (err < cfg.refine_tol) return {std::move(hi), err};

  if (depth >= cfg.max_depth)
    fail(errc::quadrature_divergence, "one-sided segment did not converge");
  // Split at the path midpoint tau = 1/2.
  const C xm = b + span * C(0.25);
  const C ym = continue_branch(f, df, z, y_z, xm);
  auto inner = integrate_from_branch(f, b, xm, ym, m, cfg, depth + 1);
  auto outer = integrate_regular(f, xm, z, ym, m, cfg, depth + 1);
  for (int j = 0; j < m; ++j) inner.vals[j] += outer.vals[j];
  inner.err += outer.err;
  return inner;
}

template <class C>
IntegralResult<C> integrate_regular(const PolyT<C>& f, C z1, C z2, C y_z1, int m,
                                    const QuadratureConfig& cfg, int depth) {
  const PolyT<C> df = f.derivative();
  auto pass = [&](int K) {
    const auto& nw = gauss_legendre<typename scalar_traits<C>::real_type>(K);
    std::vector<C> xs(K);
    for (int i = 0; i < K; ++i) xs[i] = z1 + (z2 - z1) * C((nw[K - 1 - i].first + 1) / 2);
    const std::vector<C> ys = track_values(f, df, z1, y_z1, xs);
    std::vector<C> acc(m, C(0));
    for (int i = 0; i < K; ++i)
      detail::add_scaled_powers(acc, xs[i], C(nw[K - 1 - i].second / 2) * (z2 - z1) / ys[i], m);
    return acc;
  };
  const int K = std::max(cfg.nodes, 16);
  auto lo = pass(K);
  auto hi = pass(2 * K);
  double err = detail::rel_diff(lo, hi);
  if (err < cfg.refine_tol) return {std::move(hi), err};

  // clustered nodes cope better with poles of the smooth factor near the path
  auto ts_lo = detail::tanhsinh_regular(f, df, z1, z2, y_z1, 6, m);
  auto ts_hi = detail::tanhsinh_regular(f, df, z1, z2, y_z1, 7, m);
  err = detail::rel_diff(ts_lo, ts_hi);
  if (err < cfg.refine_tol) return {std::move(ts_hi), err};

  if (depth >= cfg.max_depth) fail(errc::quadrature_divergence, "regular segment did not converge");
  const C xm = (z1 + z2) * C(0.5);
  const C ym = continue_branch(f, df, z1, y_z1, xm);
  auto left = integrate_regular(f, z1, xm, y_z1, m, cfg, depth + 1);
  auto right = integrate_regular(f, xm, z2, ym, m, cfg, depth + 1);
  for (int j = 0; j < m; ++j) left.vals[j] += right.vals[j];
  left.err += right.err;
  return left;
}

/// ∫ x^j dx / y between two adjacent branch points u, v with the branch
/// anchored at the segment midpoint. Gauss-Chebyshev absorbs both endpoint
/// singularities; tanh-sinh and bisection are fallbacks.
template <class C>
IntegralResult<C> integrate_branch_segment(const PolyT<C>& f, C u, C v, C y_mid, int m,
                                           const QuadratureConfig& cfg, int depth = 0) {
  const PolyT<C> df = f.derivative();
  const int K = std::max(cfg.nodes, 16) & ~1;  // even count; no node at the anchor

  auto lo = detail::chebyshev_pass(f, df, u, v, y_mid, K, m);
  auto hi = detail::chebyshev_pass(f, df, u, v, y_mid, 2 * K, m);
  const double err = detail::rel_diff(lo, hi);
  if (err < cfg.refine_tol) return {std::move(hi), err};

  if (depth >= cfg.max_depth)
    fail(errc::quadrature_divergence, "branch segment did not converge");
  // split into two one-sided legs; each regularizes its branch endpoint by
  // the tau^2 substitution and recurses independently
  const C mid = (u + v) * C(0.5);
  auto left = integrate_from_branch(f, u, mid, y_mid, m, cfg, depth + 1);
  auto right = integrate_from_branch(f, v, mid, y_mid, m, cfg, depth + 1);
  // from u to v through mid: ∫_u^mid - ∫_v^mid
  IntegralResult<C> out;
  out.vals.resize(m);
  for (int j = 0; j < m; ++j) out.vals[j] = left.vals[j] - right.vals[j];
  out.err = left.err + right.err;
  return out;
}

/// The arc at infinity for even-degree models, in the chart u = 1/x:
/// ∫_{u=0}^{uR} -u^{m-1-j} / w(u) du for j = 0..m-1 (m = genus), where
/// w^2 = frev and w(0) = w0 (+1 or -1 selects the point at infinity).
template <class C>
IntegralResult<C> integrate_infinity_leg(const PolyT<C>& frev, C uR, C w0, int m,
                                         const QuadratureConfig& cfg, int depth = 0) {
  const PolyT<C> dfrev = frev.derivative();
  auto pass = [&](int K) {
    const auto& nw = gauss_legendre<typename scalar_traits<C>::real_type>(K);
    std::vector<C> us(K);
    for (int i = 0; i < K; ++i) us[i] = uR * C((nw[K - 1 - i].first + 1) / 2);
    const std::vector<C> ws = track_values(frev, dfrev, C(0), w0, us);
    std::vector<C> acc(m, C(0));
    for (int i = 0; i < K; ++i) {
      const C base = C(nw[K - 1 - i].second / 2) * uR / ws[i];
      C up = C(1);
      for (int j = m - 1; j >= 0; --j) {
        acc[j] -= base * up;  // exponent g-1-j
        up *= us[i];
      }
    }
    return acc;
  };
  const int K = std::max(cfg.nodes, 16);
  auto lo = pass(K);
  auto hi = pass(2 * K);
  const double err = detail::rel_diff(lo, hi);
  if (err < cfg.refine_tol) return {std::move(hi), err};
  if (depth >= cfg.max_depth) fail(errc::quadrature_divergence, "infinity arc did not converge");
  const C um = uR * C(0.5);
  const C wm = continue_polyline(frev, {C(0), um}, w0);
  auto inner = integrate_infinity_leg(frev, um, w0, m, cfg, depth + 1);
  // outer piece [um, uR] with the same integrand, tracked from um
  auto outer_pass = [&](int K2) {
    const auto& nw = gauss_legendre<typename scalar_traits<C>::real_type>(K2);
    std::vector<C> us(K2);
    for (int i = 0; i < K2; ++i) us[i] = um + (uR - um) * C((nw[K2 - 1 - i].first + 1) / 2);
    const std::vector<C> ws = track_values(frev, dfrev, um, wm, us);
    std::vector<C> acc(m, C(0));
    for (int i = 0; i < K2; ++i) {
      const C base = C(nw[K2 - 1 - i].second / 2) * (uR - um) / ws[i];
      C up = C(1);
      for (int j = m - 1; j >= 0; --j) {
        acc[j] -= base * up;
        up *= us[i];
      }
    }
    return acc;
  };
  auto olo = outer_pass(K);
  auto ohi = outer_pass(2 * K);
  inner.err += detail::rel_diff(olo, ohi);
  for (int j = 0; j < m; ++j) inner.vals[j] += ohi[j];
  return inner;
}

}  // namespace quad
}  // namespace bettilab
