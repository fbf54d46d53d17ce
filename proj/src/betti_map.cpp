#include "bettilab/betti_map.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "bettilab/errors.hpp"

namespace bettilab {

namespace {

// Uniform double in [0,1) from raw engine output; stable across platforms.
double unit_uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

Poly reversed_poly(const Poly& f) {
  std::vector<Cplx> c(f.coeffs().rbegin(), f.coeffs().rend());
  return Poly(std::move(c));
}

int blocking_root(const PeriodContext& ctx, const Cplx& a, const Cplx& b, double margin,
                  int skip_index) {
  int worst = -1;
  double worst_d = margin;
  for (int j = 0; j < static_cast<int>(ctx.roots.size()); ++j) {
    if (j == skip_index) continue;
    const double d = geom::segment_distance(ctx.roots[j], a, b);
    if (d < worst_d) {
      worst_d = d;
      worst = j;
    }
  }
  return worst;
}

// One deterministic detour around a blocking branch point; a second failure
// raises PathThroughBranchPoint.
std::vector<Cplx> plan_leg(const PeriodContext& ctx, const Cplx& from, int target_root) {
  const Cplx to = ctx.roots[target_root];
  const double margin = std::max(0.05 * ctx.min_separation, 1e-6 * ctx.scale);
  const int bad = blocking_root(ctx, from, to, margin, target_root);
  if (bad < 0) return {};
  const Cplx z = ctx.roots[bad];
  const Cplx dir = (to - from) / std::abs(to - from);
  Cplx away = z - (from + dir * ((z - from) * std::conj(dir)).real());
  if (std::abs(away) < 1e-14 * ctx.scale) away = dir * Cplx(0, 1);
  away /= std::abs(away);
  const Cplx via = z + away * std::max(0.25 * ctx.min_separation, 4e-6 * ctx.scale);

  const double hard = 1e-6 * ctx.scale;
  if (blocking_root(ctx, from, via, hard, -1) >= 0 ||
      blocking_root(ctx, via, to, hard, target_root) >= 0)
    fail(errc::path_through_branch_point,
         "abelian-log path still blocked after one deterministic perturbation");
  return {via};
}

struct LegIntegral {
  Eigen::RowVectorXcd vals;
  double err = 0;
};

// ∫ x^j dx / y from `start` (branch value y_start) to the base branch point,
// through the planned vias.
LegIntegral leg_to_base(const PeriodContext& ctx, const Cplx& start, const Cplx& y_start,
                        const std::vector<Cplx>& vias, const QuadratureConfig& cfg) {
  const int g = ctx.genus;
  const Cplx b0 = ctx.roots[ctx.base_root];
  LegIntegral out;
  out.vals = Eigen::RowVectorXcd::Zero(g);

  Cplx pos = start;
  Cplx y = y_start;
  for (const Cplx& v : vias) {
    auto piece = quad::integrate_regular<Cplx>(ctx.f, pos, v, y, g, cfg);
    for (int j = 0; j < g; ++j) out.vals(j) += piece.vals[j];
    out.err += piece.err;
    y = quad::continue_branch<Cplx>(ctx.f, ctx.fprime, pos, y, v);
    pos = v;
  }
  auto last = quad::integrate_from_branch<Cplx>(ctx.f, b0, pos, y, g, cfg);
  for (int j = 0; j < g; ++j) out.vals(j) -= last.vals[j];  // reverse orientation
  out.err += last.err;
  return out;
}

Cplx deformed_sheet(const PeriodContext& ctx, const Cplx& x, const Cplx& y_ref) {
  Cplx y = std::sqrt(ctx.f.eval(x));
  if (std::abs(y - y_ref) > std::abs(y + y_ref)) y = -y;
  if (!(std::abs(y - y_ref) < 0.5 * std::abs(y_ref) + 1e-12))
    fail(errc::monodromy_step, "divisor point branch became ambiguous");
  return y;
}

}  // namespace

SectionPathPlan plan_section_path(const PeriodContext& ctx, const SectionSpec& sec) {
  SectionPathPlan plan;
  if (sec.kind == SectionKind::infinity_difference) {
    if (ctx.point.model.kind != ModelKind::even_degree)
      fail(errc::invalid_param, "[inf+ - inf-] needs an even-degree model");
    plan.vias_inf = plan_leg(ctx, ctx.staging, ctx.base_root);
  } else {
    const double tol = 1e-10 * (1.0 + std::abs(ctx.f.eval(sec.x1)));
    if (std::abs(sec.y1 * sec.y1 - ctx.f.eval(sec.x1)) > tol ||
        std::abs(sec.y2 * sec.y2 - ctx.f.eval(sec.x2)) >
            1e-10 * (1.0 + std::abs(ctx.f.eval(sec.x2))))
      fail(errc::invalid_param, "divisor points do not lie on the curve");
    plan.vias_p1 = plan_leg(ctx, sec.x1, ctx.base_root);
    plan.vias_p2 = plan_leg(ctx, sec.x2, ctx.base_root);
  }
  return plan;
}

Eigen::RowVectorXcd abelian_log(const PeriodContext& ctx, const SectionSpec& sec,
                                const SectionPathPlan& plan, const QuadratureConfig& cfg,
                                double* err) {
  const int g = ctx.genus;
  if (err) *err = 0;

  if (sec.kind == SectionKind::divisor_pair) {
    if (sec.x1 == sec.x2 && sec.y1 == sec.y2) return Eigen::RowVectorXcd::Zero(g);
    const Cplx y1 = deformed_sheet(ctx, sec.x1, sec.y1);
    const Cplx y2 = deformed_sheet(ctx, sec.x2, sec.y2);
    const LegIntegral l1 = leg_to_base(ctx, sec.x1, y1, plan.vias_p1, cfg);
    const LegIntegral l2 = leg_to_base(ctx, sec.x2, y2, plan.vias_p2, cfg);
    if (err) *err = l1.err + l2.err;
    return l2.vals - l1.vals;  // ∫_{P2}^{P1} through the base branch point
  }

  if (ctx.point.model.kind != ModelKind::even_degree)
    fail(errc::invalid_param, "[inf+ - inf-] needs an even-degree model");

  const Poly frev = reversed_poly(ctx.f);
  const Cplx uR = Cplx(1) / ctx.staging;

  auto arc = quad::integrate_infinity_leg<Cplx>(frev, uR, Cplx(-1), g, cfg);
  const Cplx w_uR = quad::continue_polyline<Cplx>(frev, {Cplx(0), uR}, Cplx(-1));
  const Cplx y_R = w_uR / std::pow(uR, g + 1);

  const LegIntegral fin = leg_to_base(ctx, ctx.staging, y_R, plan.vias_inf, cfg);
  Eigen::RowVectorXcd lambda(g);
  for (int j = 0; j < g; ++j) lambda(j) = 2.0 * (arc.vals[j] + fin.vals(j));
  if (err) *err = 2.0 * (arc.err + fin.err);
  return lambda;
}

BettiEvaluation betti_coords(const Eigen::RowVectorXcd& Lambda, const PeriodData& pd) {
  const int g = pd.genus;
  BettiEvaluation ev;
  ev.Lambda = Lambda;

  const Eigen::MatrixXcd W = pd.omega();  // 2g x g
  Eigen::MatrixXcd M(2 * g, 2 * g);
  M.leftCols(g) = W;
  M.rightCols(g) = W.conjugate();

  Eigen::RowVectorXcd rhs(2 * g);
  rhs.head(g) = Lambda;
  rhs.tail(g) = Lambda.conjugate();

  const Eigen::MatrixXcd Mt = M.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Mt);
  if (svd.singularValues()(0) > 1e12 * svd.singularValues()(2 * g - 1))
    fail(errc::ill_conditioned, "(Omega, conj Omega) is numerically singular");

  const Eigen::VectorXcd beta_c = Mt.fullPivLu().solve(rhs.transpose());
  ev.residual_realness = beta_c.imag().cwiseAbs().maxCoeff();
  ev.beta = beta_c.real().transpose();

  ev.residual_reconstruction = (Lambda - ev.beta.cast<Cplx>() * W).cwiseAbs().maxCoeff();

  // L = Lambda * Omega_1^{-1}
  ev.L = Eigen::MatrixXcd(pd.omega1.transpose())
             .fullPivLu()
             .solve(Lambda.transpose())
             .transpose();

  // independent route: beta_2 = Im L (Im Z)^{-1}
  const Eigen::MatrixXd imZ = pd.Z.imag();
  const Eigen::RowVectorXd beta2_alt = Eigen::MatrixXd(imZ.transpose())
                                           .fullPivLu()
                                           .solve(Eigen::VectorXd(ev.L.imag().transpose()))
                                           .transpose();
  ev.residual_beta2 = (ev.beta.tail(g) - beta2_alt).cwiseAbs().maxCoeff();
  ev.residual_siegel = (ev.beta.head(g).cast<Cplx>() + ev.beta.tail(g).cast<Cplx>() * pd.Z - ev.L)
                           .cwiseAbs()
                           .maxCoeff();

  ev.beta_int.resize(2 * g);
  ev.beta_frac.resize(2 * g);
  for (int k = 0; k < 2 * g; ++k) {
    const double r = std::round(ev.beta(k));
    ev.beta_int(k) = static_cast<int>(r);
    ev.beta_frac(k) = ev.beta(k) - r;
  }
  return ev;
}

BettiEvaluation betti_eval(const FamilyPoint& p, const SectionSpec& sec,
                           const QuadratureConfig& cfg) {
  const PeriodContext ctx = build_period_context(p, cfg);
  const PeriodData pd = compute_periods(ctx, cfg);
  const SectionPathPlan plan = plan_section_path(ctx, sec);
  double lam_err = 0;
  const Eigen::RowVectorXcd lambda = abelian_log(ctx, sec, plan, cfg, &lam_err);
  BettiEvaluation ev = betti_coords(lambda, pd);
  ev.quadrature_error = pd.quadrature_error + lam_err;
  return ev;
}

namespace {

template <class Mat>
RankResult rank_with_gap_impl(const Mat& A, double rel_tol, double gap_req) {
  RankResult out;
  if (A.rows() == 0 || A.cols() == 0) {
    out.certified = true;
    out.gap = std::numeric_limits<double>::infinity();
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(A);
  out.singular_values = svd.singularValues();
  const int n = static_cast<int>(out.singular_values.size());
  const double s0 = out.singular_values(0);
  if (s0 == 0.0) {
    out.certified = true;
    out.gap = std::numeric_limits<double>::infinity();
    return out;
  }
  int r = 0;
  while (r < n && out.singular_values(r) > rel_tol * s0) ++r;
  out.rank = r;
  if (r == 0 || r == n) {
    out.certified = true;
    out.gap = std::numeric_limits<double>::infinity();
  } else {
    out.gap = out.singular_values(r - 1) / out.singular_values(r);
    out.certified = out.gap > gap_req;
  }
  if (!out.certified) {
    int best = 0;
    double best_gap = 0;
    for (int i = 0; i + 1 < n; ++i) {
      const double gp =
          out.singular_values(i + 1) > 0
              ? out.singular_values(i) / out.singular_values(i + 1)
              : std::numeric_limits<double>::infinity();
      if (gp > best_gap) {
        best_gap = gp;
        best = i + 1;
      }
    }
    out.rank_alt = best;
  } else {
    out.rank_alt = out.rank;
  }
  return out;
}

}  // namespace

RankResult rank_with_gap(const Eigen::MatrixXd& A, double rel_tol, double gap_req) {
  return rank_with_gap_impl(A, rel_tol, gap_req);
}
RankResult rank_with_gap(const Eigen::MatrixXcd& A, double rel_tol, double gap_req) {
  return rank_with_gap_impl(A, rel_tol, gap_req);
}

Eigen::MatrixXcd BettiDerivatives::matrix_I(const Eigen::RowVectorXcd& nu) const {
  Eigen::MatrixXcd I(d, g);
  for (int i = 0; i < d; ++i) I.row(i) = dLambda[i] + nu * dOmega[i];
  return I;
}

Eigen::MatrixXcd BettiDerivatives::matrix_H(const Eigen::RowVectorXcd& mu) const {
  Eigen::MatrixXcd H(d, g);
  for (int i = 0; i < d; ++i) H.row(i) = dL[i] + mu * dZ[i];
  return H;
}

BettiDerivatives betti_derivatives(const FamilyView& view, const std::vector<Cplx>& s,
                                   const SectionSpec& sec, double h_rel,
                                   const QuadratureConfig& cfg) {
  const int d = view.arity;
  const FamilyPoint p0 = view.point(s);

  BettiDerivatives out;
  out.d = d;

  const PeriodContext ctx0 = build_period_context(p0, cfg);
  const SectionPathPlan plan = plan_section_path(ctx0, sec);
  const PeriodData pd0 = compute_periods(ctx0, cfg);
  const Eigen::RowVectorXcd lam0 = abelian_log(ctx0, sec, plan, cfg);
  const BettiEvaluation ev0 = betti_coords(lam0, pd0);

  const int g = pd0.genus;
  out.g = g;
  out.Lambda0 = lam0;
  out.L0 = ev0.L;
  out.Omega0 = pd0.omega();
  out.Z0 = pd0.Z;
  out.beta0 = ev0.beta;

  struct Snap {
    Eigen::RowVectorXcd lam, L;
    Eigen::MatrixXcd W, Z;
    Eigen::RowVectorXd beta;
  };
  auto eval_at = [&](const std::vector<Cplx>& sv) -> Snap {
    const FamilyPoint q = view.point(sv);
    const PeriodContext ctx = continue_period_context(ctx0, q, cfg);
    const PeriodData pd = compute_periods(ctx, cfg);
    const Eigen::RowVectorXcd lam = abelian_log(ctx, sec, plan, cfg);
    const BettiEvaluation ev = betti_coords(lam, pd);
    return {lam, ev.L, pd.omega(), pd.Z, ev.beta};
  };

  out.J.resize(2 * d, 2 * g);
  out.dLambda.resize(d);
  out.dOmega.resize(d);
  out.dL.resize(d);
  out.dZ.resize(d);
  out.step = h_rel;

  double cr = 0;
  for (int i = 0; i < d; ++i) {
    const double h = h_rel * (1.0 + std::abs(s[i]));
    std::vector<Cplx> sp = s, sm = s, spi = s, smi = s;
    sp[i] += h;
    sm[i] -= h;
    spi[i] += Cplx(0, h);
    smi[i] -= Cplx(0, h);
    const Snap P = eval_at(sp), M = eval_at(sm), PI = eval_at(spi), MI = eval_at(smi);

    const Eigen::RowVectorXcd dx_lam = (P.lam - M.lam) / (2 * h);
    const Eigen::RowVectorXcd dy_lam = (PI.lam - MI.lam) / (2 * h);
    cr = std::max(cr, ((dx_lam + Cplx(0, 1) * dy_lam) / 2.0).cwiseAbs().maxCoeff());

    out.dLambda[i] = dx_lam;
    out.dOmega[i] = (P.W - M.W) / (2 * h);
    out.dL[i] = (P.L - M.L) / (2 * h);
    out.dZ[i] = (P.Z - M.Z) / (2 * h);

    out.J.row(2 * i) = (P.beta - M.beta) / (2 * h);
    out.J.row(2 * i + 1) = (PI.beta - MI.beta) / (2 * h);
  }
  out.cauchy_riemann_residual = cr;
  return out;
}

BettiJacobian betti_jacobian(const FamilyPoint& p, const SectionSpec& sec, double h_rel,
                             const QuadratureConfig& cfg) {
  const BettiDerivatives drv =
      betti_derivatives(FamilyView::identity(p.model), p.params, sec, h_rel, cfg);
  BettiJacobian out;
  out.J = drv.J;
  out.step = h_rel;
  out.rank = rank_with_gap(out.J);
  return out;
}

RankScanReport rank_scan(const FamilyView& view, const ScanBox& region, int n_samples,
                         const SectionSpec& sec, double h_rel, const QuadratureConfig& cfg,
                         std::uint64_t seed, int threads) {
  RankScanReport report;
  report.samples.resize(n_samples);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= n_samples) return;
      ScanSample& smp = report.samples[idx];
      std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (idx + 1));
      smp.params.resize(view.arity);
      for (int c = 0; c < view.arity; ++c) {
        const Cplx lo = region.lo[c], hi = region.hi[c];
        const double re = lo.real() + (hi.real() - lo.real()) * unit_uniform(rng);
        const double im = lo.imag() + (hi.imag() - lo.imag()) * unit_uniform(rng);
        smp.params[c] = Cplx(re, im);
      }
      try {
        const BettiDerivatives drv = betti_derivatives(view, smp.params, sec, h_rel, cfg);
        const RankResult rk = rank_with_gap(drv.J);
        smp.rank = rk.rank;
        smp.certified = rk.certified;
        smp.singular_values = rk.singular_values;
      } catch (const Error&) {
        smp.skipped = true;
      }
    }
  };

  const int nt = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (int i = 0; i < n_samples; ++i) {
    const ScanSample& smp = report.samples[i];
    if (smp.skipped) {
      ++report.skipped;
      continue;
    }
    ++report.histogram[smp.rank];
    if (smp.rank > report.max_rank) {
      report.max_rank = smp.rank;
      report.argmax = smp.params;
    }
  }
  return report;
}

namespace {

struct NewtonEval {
  PeriodContext ctx;
  Eigen::RowVectorXcd r;  // Lambda - q * Omega
};

Eigen::RowVectorXcd newton_residual(const PeriodContext& ctx, const SectionSpec& sec,
                                    const SectionPathPlan& plan, const Eigen::RowVectorXd& q,
                                    const QuadratureConfig& cfg) {
  const Eigen::MatrixXcd P = edge_periods(ctx, cfg);
  const Eigen::MatrixXcd W = ctx.basis.transform.cast<double>() * P;
  const Eigen::RowVectorXcd lam = abelian_log(ctx, sec, plan, cfg);
  return lam - q.cast<Cplx>() * W;
}

// Continuation with dyadic substepping when a single hop trips the tracker.
PeriodContext continue_with_substeps(const PeriodContext& from, const FamilyPoint& target,
                                     const QuadratureConfig& cfg) {
  for (int pieces = 1; pieces <= 8; pieces *= 2) {
    try {
      PeriodContext cur = from;
      for (int k = 1; k <= pieces; ++k) {
        FamilyPoint mid = target;
        for (std::size_t j = 0; j < target.params.size(); ++j)
          mid.params[j] = from.point.params[j] +
                          (target.params[j] - from.point.params[j]) * (double(k) / pieces);
        cur = continue_period_context(cur, mid, cfg);
      }
      return cur;
    } catch (const Error& e) {
      if (e.code() != errc::monodromy_step || pieces == 8) throw;
    }
  }
  fail(errc::monodromy_step, "unreachable");
}

}  // namespace

TorsionSolveResult torsion_target_solve(const FamilyPoint& p0, const SectionSpec& sec,
                                        const std::vector<Rational>& target,
                                        const QuadratureConfig& cfg, double h_rel, int max_iter) {
  const int d = static_cast<int>(p0.params.size());
  const int g = p0.model.genus;
  TorsionSolveResult res;
  res.point = p0;
  if (static_cast<int>(target.size()) != 2 * g)
    fail(errc::invalid_param, "target must have 2g entries");
  if (d < g) fail(errc::invalid_param, "need at least g free parameters");

  Eigen::RowVectorXd q(2 * g);
  for (int k = 0; k < 2 * g; ++k) q(k) = static_cast<double>(target[k]);

  PeriodContext ctx = build_period_context(p0, cfg);
  SectionPathPlan plan = plan_section_path(ctx, sec);
  std::vector<Cplx> s = p0.params;

  auto lambda_and_periods = [&](const PeriodContext& c, const SectionPathPlan& pl,
                                Eigen::RowVectorXcd* lam, Eigen::MatrixXcd* W) {
    const Eigen::MatrixXcd P = edge_periods(c, cfg);
    *W = c.basis.transform.cast<double>() * P;
    *lam = abelian_log(c, sec, pl, cfg);
  };

  Eigen::RowVectorXcd r = newton_residual(ctx, sec, plan, q, cfg);
  double rn = r.norm();
  if (rn < 1e-10) {
    res.converged = true;
    res.status = errc::invalid_param;  // unused on success
    res.residual = rn;
    return res;
  }

  auto residual_at = [&](const PeriodContext& base, const std::vector<Cplx>& sv,
                         PeriodContext* out_ctx) {
    FamilyPoint fp{p0.model, sv, false};
    PeriodContext c = continue_with_substeps(base, fp, cfg);
    Eigen::RowVectorXcd rr = newton_residual(c, sec, plan, q, cfg);
    if (out_ctx) *out_ctx = std::move(c);
    return rr;
  };

  // Long solves drift away from the combinatorial layout frozen at the start
  // point, at which stage continuation starts reporting MonodromyStep. The
  // cure is to rebuild a fresh sorted basis at the current point and push the
  // rational target through the exact integral basis change; the residual is
  // invariant under the rebase, which doubles as a consistency check.
  int rebases = 0;
  auto rebase = [&]() {
    if (++rebases > 16) fail(errc::monodromy_step, "rebasing did not stabilize the solve");
    Eigen::RowVectorXcd lam_old;
    Eigen::MatrixXcd W_old;
    lambda_and_periods(ctx, plan, &lam_old, &W_old);

    FamilyPoint cur{p0.model, s, false};
    PeriodContext nctx = build_period_context(cur, cfg);
    SectionPathPlan nplan = plan_section_path(nctx, sec);
    Eigen::RowVectorXcd lam_new;
    Eigen::MatrixXcd W_new;
    lambda_and_periods(nctx, nplan, &lam_new, &W_new);

    // W_new = M W_old with M integral; solve through the conjugate blocks
    Eigen::MatrixXcd B(2 * g, 2 * g), R(2 * g, 2 * g);
    B.leftCols(g) = W_old;
    B.rightCols(g) = W_old.conjugate();
    R.leftCols(g) = W_new;
    R.rightCols(g) = W_new.conjugate();
    const Eigen::MatrixXcd Mc =
        Eigen::MatrixXcd(B.transpose()).fullPivLu().solve(R.transpose()).transpose();
    Eigen::MatrixXd M(2 * g, 2 * g);
    for (int i = 0; i < 2 * g; ++i)
      for (int j = 0; j < 2 * g; ++j) {
        M(i, j) = std::round(Mc(i, j).real());
        if (std::abs(Mc(i, j) - Cplx(M(i, j), 0)) > 1e-6)
          fail(errc::monodromy_step, "basis change is not integral");
      }
    // lam_new = lam_old + nu W_old with nu integral
    const Eigen::RowVectorXcd dlam = lam_new - lam_old;
    Eigen::RowVectorXcd rhs(2 * g);
    rhs.head(g) = dlam;
    rhs.tail(g) = dlam.conjugate();
    const Eigen::VectorXcd nu_c = Eigen::MatrixXcd(B.transpose()).fullPivLu().solve(rhs.transpose());
    Eigen::RowVectorXd nu(2 * g);
    for (int k = 0; k < 2 * g; ++k) {
      nu(k) = std::round(nu_c(k).real());
      if (std::abs(nu_c(k) - Cplx(nu(k), 0)) > 1e-6)
        fail(errc::monodromy_step, "branch shift is not integral");
    }
    // q_new solves q_new M = q + nu
    const Eigen::RowVectorXd q_new =
        Eigen::MatrixXd(M.transpose()).fullPivLu().solve((q + nu).transpose()).transpose();
    const Eigen::RowVectorXcd r_check = lam_new - q_new.cast<Cplx>() * W_new;
    if ((r_check - r).cwiseAbs().maxCoeff() > 1e-6 * (1 + rn))
      fail(errc::monodromy_step, "residual not preserved across the rebase");
    q = q_new;
    ctx = std::move(nctx);
    plan = std::move(nplan);
    r = r_check;
    rn = r.norm();
  };

  // select the g parameters with the largest residual-derivative rows
  Eigen::MatrixXcd I_full(d, g);
  for (int attempt = 0;; ++attempt) {
    try {
      for (int i = 0; i < d; ++i) {
        const double h = h_rel * (1.0 + std::abs(s[i]));
        std::vector<Cplx> sp = s, sm = s;
        sp[i] += h;
        sm[i] -= h;
        const Eigen::RowVectorXcd rp = residual_at(ctx, sp, nullptr);
        const Eigen::RowVectorXcd rm = residual_at(ctx, sm, nullptr);
        I_full.row(i) = (rp - rm) / (2 * h);
      }
      break;
    } catch (const Error& e) {
      if (e.code() != errc::monodromy_step || attempt >= 4) throw;
      rebase();
    }
  }
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return I_full.row(a).norm() > I_full.row(b).norm();
  });
  res.active_params.assign(order.begin(), order.begin() + g);
  std::sort(res.active_params.begin(), res.active_params.end());

  for (int it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    Eigen::MatrixXcd Jn(g, g);
    try {
      for (int a = 0; a < g; ++a) {
        const int i = res.active_params[a];
        const double h = h_rel * (1.0 + std::abs(s[i]));
        std::vector<Cplx> sp = s, sm = s;
        sp[i] += h;
        sm[i] -= h;
        Jn.row(a) = (residual_at(ctx, sp, nullptr) - residual_at(ctx, sm, nullptr)) / (2 * h);
      }
    } catch (const Error& e) {
      if (e.code() != errc::monodromy_step) throw;
      rebase();
      --it;  // retry this iteration on the fresh basis
      continue;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Jn);
    if (svd.singularValues()(g - 1) <= 0 ||
        svd.singularValues()(0) / svd.singularValues()(g - 1) > 1e10) {
      res.status = errc::jacobian_singular;
      return res;
    }
    // delta * Jn = -r
    const Eigen::VectorXcd delta =
        Eigen::MatrixXcd(Jn.transpose()).fullPivLu().solve(-r.transpose());

    bool accepted = false;
    bool saw_monodromy = false;
    for (double lambda = 1.0; lambda >= 1.0 / 4096; lambda /= 2) {
      std::vector<Cplx> st = s;
      for (int a = 0; a < g; ++a) st[res.active_params[a]] += lambda * delta(a);
      try {
        PeriodContext ctx_try;
        const Eigen::RowVectorXcd rt = residual_at(ctx, st, &ctx_try);
        if (rt.norm() < rn) {
          s = st;
          ctx = std::move(ctx_try);
          r = rt;
          rn = rt.norm();
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != errc::monodromy_step) throw;
        saw_monodromy = true;  // step left the trust region; damp further
      }
    }
    if (!accepted && saw_monodromy && rebases < 16) {
      try {
        rebase();
        --it;
        continue;
      } catch (const Error&) {
        res.status = errc::newton_diverged;
        res.residual = rn;
        return res;
      }
    }
    if (!accepted) {
      res.status = errc::newton_diverged;
      res.residual = rn;
      return res;
    }
    if (rn < 1e-10) {
      res.converged = true;
      res.residual = rn;
      res.point = FamilyPoint{p0.model, s, false};
      bool real = true;
      for (const auto& v : s)
        if (std::abs(v.imag()) > 1e-12 * (1 + std::abs(v))) real = false;
      res.point.all_real = real;
      return res;
    }
  }
  res.status = errc::newton_diverged;
  res.residual = rn;
  return res;
}

}  // namespace bettilab
