#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "bettilab/periods.hpp"
#include "bettilab/rational.hpp"

namespace bettilab {

enum class SectionKind { infinity_difference, divisor_pair };

struct SectionSpec {
  SectionKind kind = SectionKind::infinity_difference;
  Cplx x1, y1, x2, y2;  // divisor pair P1 - P2; points deform with the fiber

  static SectionSpec infinity() { return {}; }
  static SectionSpec pair(Cplx x1, Cplx y1, Cplx x2, Cplx y2) {
    return {SectionKind::divisor_pair, x1, y1, x2, y2};
  }
};

struct BettiEvaluation {
  Eigen::RowVectorXcd Lambda;     // abelian logarithm, g entries
  Eigen::RowVectorXcd L;          // Lambda * Omega1^{-1}
  Eigen::RowVectorXd beta;        // 2g real coordinates (raw representative)
  Eigen::RowVectorXd beta_frac;   // representative mod Z^{2g}, in [-1/2, 1/2)
  Eigen::VectorXi beta_int;
  double residual_reconstruction = 0;  // |Lambda - beta * Omega|
  double residual_realness = 0;        // max |Im| of the complex solve
  double residual_siegel = 0;          // |beta_1 + beta_2 Z - L|
  double residual_beta2 = 0;           // |beta_2 - Im L (Im Z)^{-1}|
  double quadrature_error = 0;
};

struct RankResult {
  int rank = 0;
  bool certified = false;  // full rank or a 1e3 singular-value gap
  int rank_alt = 0;        // second candidate when not certified
  double gap = 0;
  Eigen::VectorXd singular_values;
};

RankResult rank_with_gap(const Eigen::MatrixXd& A, double rel_tol = 1e-6, double gap_req = 1e3);
RankResult rank_with_gap(const Eigen::MatrixXcd& A, double rel_tol = 1e-6, double gap_req = 1e3);

struct BettiJacobian {
  Eigen::MatrixXd J;  // 2d x 2g; rows d/dRe s_i, d/dIm s_i
  RankResult rank;
  double step = 0;
};

/// Maps view parameters to model parameters: the identity for the plain
/// models, or a wrapper that embeds a slice / adds inert axes in tests.
struct FamilyView {
  FamilyModel model;
  int arity = 0;
  std::function<std::vector<Cplx>(const std::vector<Cplx>&)> lift;

  static FamilyView identity(FamilyModel m) {
    return {m, m.arity(), [](const std::vector<Cplx>& s) { return s; }};
  }
  FamilyPoint point(const std::vector<Cplx>& s) const {
    FamilyPoint p{model, lift(s), false};
    return p;
  }
};

/// Deterministic waypoints for the abelian-log path, planned once per
/// evaluation context so a finite-difference stencil shares one path shape.
struct SectionPathPlan {
  std::vector<Cplx> vias_inf;  // between the staging point and the base branch point
  std::vector<Cplx> vias_p1;
  std::vector<Cplx> vias_p2;
};

SectionPathPlan plan_section_path(const PeriodContext& ctx, const SectionSpec& sec);

Eigen::RowVectorXcd abelian_log(const PeriodContext& ctx, const SectionSpec& sec,
                                const SectionPathPlan& plan, const QuadratureConfig& cfg,
                                double* err = nullptr);

/// Solves Lambda = beta (Omega; conj Omega) for the real row beta and records
/// the residuals, including the independent beta_2 = Im L (Im Z)^{-1} route.
BettiEvaluation betti_coords(const Eigen::RowVectorXcd& Lambda, const PeriodData& pd);

/// One-shot evaluation at a point.
BettiEvaluation betti_eval(const FamilyPoint& p, const SectionSpec& sec, const QuadratureConfig& cfg);

/// Holomorphic and real derivative bundle at one point, all finite
/// differences taken in a single continued cycle basis.
struct BettiDerivatives {
  int d = 0, g = 0;
  double step = 0;
  Eigen::RowVectorXcd Lambda0, L0;
  Eigen::MatrixXcd Omega0;  // 2g x g
  Eigen::MatrixXcd Z0;      // g x g
  Eigen::RowVectorXd beta0;
  std::vector<Eigen::RowVectorXcd> dLambda;
  std::vector<Eigen::MatrixXcd> dOmega;
  std::vector<Eigen::RowVectorXcd> dL;
  std::vector<Eigen::MatrixXcd> dZ;
  Eigen::MatrixXd J;  // 2d x 2g
  double cauchy_riemann_residual = 0;

  /// (I_nu)_{ij} = d_i Lambda_j + sum_k nu_k d_i Omega_{kj}
  Eigen::MatrixXcd matrix_I(const Eigen::RowVectorXcd& nu) const;
  /// (H_mu)_{ij} = d_i L_j + sum_k mu_k d_i Z_{kj}
  Eigen::MatrixXcd matrix_H(const Eigen::RowVectorXcd& mu) const;
};

BettiDerivatives betti_derivatives(const FamilyView& view, const std::vector<Cplx>& s,
                                   const SectionSpec& sec, double h_rel, const QuadratureConfig& cfg);

BettiJacobian betti_jacobian(const FamilyPoint& p, const SectionSpec& sec, double h_rel,
                             const QuadratureConfig& cfg);

struct ScanBox {
  std::vector<Cplx> lo, hi;  // per coordinate: Re and Im ranges
};

struct ScanSample {
  std::vector<Cplx> params;
  int rank = -1;
  bool certified = false;
  Eigen::VectorXd singular_values;
  bool skipped = false;
};

struct RankScanReport {
  int max_rank = 0;
  std::vector<Cplx> argmax;
  std::map<int, int> histogram;
  int skipped = 0;
  std::vector<ScanSample> samples;
};

RankScanReport rank_scan(const FamilyView& view, const ScanBox& region, int n_samples,
                         const SectionSpec& sec, double h_rel, const QuadratureConfig& cfg,
                         std::uint64_t seed, int threads = 1);

struct TorsionSolveResult {
  bool converged = false;
  errc status = errc::newton_diverged;
  FamilyPoint point;
  double residual = 0;
  int iterations = 0;
  std::vector<int> active_params;
};

/// Damped Newton on the g complex equations Lambda(s) - target * Omega(s) = 0
/// in the g best-conditioned parameters (the rest stay frozen). A residual
/// below 1e-10 certifies that beta equals the rational target.
TorsionSolveResult torsion_target_solve(const FamilyPoint& p0, const SectionSpec& sec,
                                        const std::vector<Rational>& target,
                                        const QuadratureConfig& cfg, double h_rel = 1e-5,
                                        int max_iter = 50);

}  // namespace bettilab
