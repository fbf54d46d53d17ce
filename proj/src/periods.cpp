#include "bettilab/periods.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "bettilab/errors.hpp"
#include "bettilab/json_out.hpp"

namespace bettilab {

namespace {

// Direction of the widest angular gap of the branch points as seen from
// their centroid; the escape route to infinity for the abelian-log path.
double escape_angle(const std::vector<Cplx>& roots, const Cplx& centroid) {
  std::vector<double> angles;
  angles.reserve(roots.size());
  for (const auto& r : roots) {
    const Cplx d = r - centroid;
    if (std::abs(d) > 0) angles.push_back(std::arg(d));
  }
  if (angles.empty()) return 0.5;
  std::sort(angles.begin(), angles.end());
  double best_gap = 2 * M_PI - (angles.back() - angles.front());
  double best_mid = angles.back() + best_gap / 2;
  for (std::size_t k = 1; k < angles.size(); ++k) {
    const double gap = angles[k] - angles[k - 1];
    if (gap > best_gap) {
      best_gap = gap;
      best_mid = angles[k - 1] + gap / 2;
    }
  }
  return best_mid;
}

template <class C>
Eigen::MatrixXcd edge_periods_impl(const PeriodContext& ctx, const QuadratureConfig& cfg,
                                   double* err_out) {
  const int ne = static_cast<int>(ctx.basis.edge_cycles.size());
  const int g = ctx.genus;
  const PolyT<C> f = quad::convert_poly<C>(ctx.f);

  Eigen::MatrixXcd P(ne, g);
  double err = 0.0;
  for (int e = 0; e < ne; ++e) {
    const EdgeCycle& ec = ctx.basis.edge_cycles[e];
    const C u = scalar_traits<C>::from_std(ctx.roots[ec.ia]);
    const C v = scalar_traits<C>::from_std(ctx.roots[ec.ib]);
    C y_mid = scalar_traits<C>::from_std(ctx.anchors[e]);
    if constexpr (!std::is_same_v<C, Cplx>) {
      // sharpen the anchor to the working precision
      using std::sqrt;
      C y = sqrt(f.eval((u + v) * C(0.5)));
      using std::abs;
      y_mid = (abs(y - y_mid) <= abs(y + y_mid)) ? y : -y;
    }
    auto res = quad::integrate_branch_segment(f, u, v, y_mid, g, cfg);
    err += res.err;
    for (int j = 0; j < g; ++j)
      P(e, j) = Cplx(2.0 * ec.period_sign) * scalar_traits<C>::to_std(res.vals[j]);
  }
  if (err_out) *err_out = err;
  return P;
}

}  // namespace

Eigen::MatrixXcd edge_periods(const PeriodContext& ctx, const QuadratureConfig& cfg, double* err) {
  if (cfg.precision == Precision::dd) return edge_periods_impl<DDCplx>(ctx, cfg, err);
  return edge_periods_impl<Cplx>(ctx, cfg, err);
}

PeriodContext build_period_context(const FamilyPoint& p, const QuadratureConfig& cfg) {
  (void)cfg;
  PeriodContext ctx;
  ctx.point = p;
  const CurveData c = curve_data(p);
  ctx.f = c.f;
  ctx.fprime = c.fprime;
  ctx.roots = c.branch_points;
  ctx.scale = c.scale;
  ctx.min_separation = c.min_separation;
  ctx.genus = c.genus;
  ctx.basis = build_cycle_basis(c);
  ctx.anchors.resize(ctx.basis.edge_cycles.size());
  for (std::size_t e = 0; e < ctx.anchors.size(); ++e)
    ctx.anchors[e] = ctx.basis.edge_cycles[e].y_mid;

  // Path recipe toward infinity. For configurations with every branch point
  // on the real axis the path runs along the real axis to the left, which
  // keeps the abelian logarithm of [inf+ - inf-] real.
  Cplx centroid = std::accumulate(ctx.roots.begin(), ctx.roots.end(), Cplx(0)) /
                  Cplx(double(ctx.roots.size()));
  double R0 = 1.0;
  for (const auto& r : ctx.roots) R0 = std::max(R0, std::abs(r - centroid));
  bool all_real = true;
  for (const auto& r : ctx.roots)
    if (r.imag() != 0.0) all_real = false;
  const double theta = all_real ? M_PI : escape_angle(ctx.roots, centroid);
  ctx.staging = centroid + std::polar(4.0 * R0 + 2.0, theta);
  ctx.base_root = 0;
  return ctx;
}

PeriodData compute_periods(const PeriodContext& ctx, const QuadratureConfig& cfg) {
  const int g = ctx.genus;
  PeriodData pd;
  pd.genus = g;
  pd.ctx = ctx;

  Eigen::MatrixXcd P = edge_periods(ctx, cfg, &pd.quadrature_error);

  // homologically trivial combinations must integrate to zero
  if (ctx.basis.kernel.rows() > 0) {
    const Eigen::MatrixXcd zero = ctx.basis.kernel.cast<double>() * P;
    const double tol = 1e-6 * (1.0 + P.cwiseAbs().maxCoeff());
    if (zero.cwiseAbs().maxCoeff() > tol)
      fail(errc::basis_degeneracy, "null cycle has a nonzero period");
  }

  const Eigen::MatrixXcd W = ctx.basis.transform.cast<double>() * P;
  pd.omega1 = W.topRows(g);
  pd.omega2 = W.bottomRows(g);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pd.omega1);
  const double cond = svd.singularValues()(0) / svd.singularValues()(g - 1);
  if (!(cond < 1e12)) fail(errc::ill_conditioned, "Omega_1 condition number exceeds 1e12");

  // Z = Omega_2 * Omega_1^{-1}, via the transposed system Omega_1^T Z^T = Omega_2^T
  pd.Z = Eigen::MatrixXcd(pd.omega1.transpose())
             .fullPivLu()
             .solve(Eigen::MatrixXcd(pd.omega2.transpose()))
             .transpose();
  const double sym = (pd.Z - pd.Z.transpose()).cwiseAbs().maxCoeff();
  if (!(sym < 1e-8 * (1.0 + pd.Z.cwiseAbs().maxCoeff())))
    fail(errc::quadrature_divergence, "Z is not symmetric to tolerance");

  Eigen::MatrixXd imZ = pd.Z.imag();
  imZ = ((imZ + imZ.transpose()) / 2).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(imZ);
  if (!(eig.eigenvalues()(0) > 0))
    fail(errc::quadrature_divergence, "Im Z is not positive definite");

  return pd;
}

PeriodContext continue_period_context(const PeriodContext& base, const FamilyPoint& target,
                                      const QuadratureConfig& cfg) {
  (void)cfg;
  if (target.model.kind != base.point.model.kind || target.model.genus != base.point.model.genus)
    fail(errc::monodromy_step, "cannot continue periods across models");

  PeriodContext ctx = base;
  ctx.point = target;
  ctx.f = family_poly(target.model, target.params);
  ctx.fprime = ctx.f.derivative();

  const std::vector<Cplx> raw = find_roots(ctx.f);
  const int n = static_cast<int>(raw.size());
  const double move_cap = 0.35 * base.min_separation;

  std::vector<bool> used(n, false);
  std::vector<Cplx> matched(n);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(raw[j] - base.roots[i]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best < 0 || best_d > move_cap)
      fail(errc::monodromy_step, "branch point moved beyond the tracking radius");
    used[best] = true;
    matched[i] = raw[best];
  }
  ctx.roots = matched;

  ctx.scale = 1.0;
  for (const auto& r : ctx.roots) ctx.scale = std::max(ctx.scale, std::abs(r));
  double min_sep = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) min_sep = std::min(min_sep, std::abs(ctx.roots[i] - ctx.roots[j]));
  ctx.min_separation = min_sep;
  if (!(min_sep > 1e-8 * ctx.scale))
    fail(errc::degenerate_discriminant, "branch points collided during continuation");

  // the tracked tree segments must not be crossed by any other branch point;
  // detect a crossing and report MonodromyStep so the caller can subdivide or
  // re-route. A stationary near-miss is harmless (the quadrature fallbacks
  // absorb it), so the graze test scales with the actual motion of the step.
  for (const EdgeCycle& ec : base.basis.edge_cycles) {
    const Cplx u_old = base.roots[ec.ia], v_old = base.roots[ec.ib];
    const Cplx u_new = ctx.roots[ec.ia], v_new = ctx.roots[ec.ib];
    const double len = std::abs(v_new - u_new);
    for (int j = 0; j < n; ++j) {
      if (j == ec.ia || j == ec.ib) continue;
      if (geom::segments_cross(base.roots[j], ctx.roots[j], u_old, v_old, nullptr, nullptr,
                               nullptr) ||
          geom::segments_cross(base.roots[j], ctx.roots[j], u_new, v_new, nullptr, nullptr,
                               nullptr))
        fail(errc::monodromy_step, "a branch point crossed a tracked segment");
      const double moved = std::abs(ctx.roots[j] - base.roots[j]) +
                           std::abs(u_new - u_old) + std::abs(v_new - v_old);
      if (geom::segment_distance(ctx.roots[j], u_new, v_new) <
          std::min(0.01 * len, 4.0 * moved))
        fail(errc::monodromy_step, "a branch point grazes a tracked segment");
    }
  }

  // transport the anchors: update the branch value at the old midpoint under
  // the new polynomial, then slide along x to the new midpoint
  const Poly df = ctx.fprime;
  for (std::size_t e = 0; e < ctx.anchors.size(); ++e) {
    const EdgeCycle& ec = ctx.basis.edge_cycles[e];
    const Cplx m_old = base.mid(static_cast<int>(e));
    const Cplx m_new = (ctx.roots[ec.ia] + ctx.roots[ec.ib]) * 0.5;
    const Cplx y_old = base.anchors[e];
    Cplx y_upd = std::sqrt(ctx.f.eval(m_old));
    if (std::abs(y_upd - y_old) > std::abs(y_upd + y_old)) y_upd = -y_upd;
    if (!(std::abs(y_upd - y_old) < 0.5 * std::abs(y_old)))
      fail(errc::monodromy_step, "anchor branch became ambiguous during the step");
    for (int j = 0; j < n; ++j) {
      if (j == ec.ia || j == ec.ib) continue;
      if (geom::segments_cross(base.roots[j], ctx.roots[j], m_old, m_new, nullptr, nullptr,
                               nullptr))
        fail(errc::monodromy_step, "a branch point crossed an anchor path");
      const double moved = std::abs(ctx.roots[j] - base.roots[j]) + std::abs(m_new - m_old);
      if (geom::segment_distance(ctx.roots[j], m_old, m_new) <
          std::min(0.25 * ctx.min_separation, 4.0 * moved))
        fail(errc::monodromy_step, "a branch point crossed an anchor path");
    }
    ctx.anchors[e] = quad::continue_branch<Cplx>(ctx.f, df, m_old, y_upd, m_new);
  }
  return ctx;
}

namespace {

// process-wide period memo, single writer / many readers
std::unordered_map<std::string, PeriodData>& period_cache() {
  static std::unordered_map<std::string, PeriodData> cache;
  return cache;
}
std::shared_mutex period_cache_mu;

std::string period_cache_key(const FamilyPoint& p, const QuadratureConfig& cfg) {
  std::ostringstream key;
  key << (p.model.kind == ModelKind::odd_degree ? "o" : "e") << p.model.genus;
  for (const auto& c : p.params)
    key << "," << format_double(c.real()) << "," << format_double(c.imag());
  key << "|" << cfg.nodes << "," << format_double(cfg.refine_tol) << ","
      << (cfg.precision == Precision::dd ? "dd" : "f64");
  return key.str();
}

}  // namespace

PeriodData period_matrix(const FamilyPoint& p, const QuadratureConfig& cfg) {
  const std::string key = period_cache_key(p, cfg);
  {
    std::shared_lock lock(period_cache_mu);
    auto it = period_cache().find(key);
    if (it != period_cache().end()) return it->second;
  }
  PeriodData pd = compute_periods(build_period_context(p, cfg), cfg);
  {
    std::unique_lock lock(period_cache_mu);
    if (period_cache().size() > 4096) period_cache().clear();
    period_cache().emplace(key, pd);
  }
  return pd;
}

PeriodData continue_periods(const PeriodData& pd, const FamilyPoint& target,
                            const QuadratureConfig& cfg) {
  return compute_periods(continue_period_context(pd.ctx, target, cfg), cfg);
}

}  // namespace bettilab
