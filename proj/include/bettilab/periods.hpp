#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bettilab/curve_family.hpp"
#include "bettilab/cycles.hpp"
#include "bettilab/quadrature.hpp"

namespace bettilab {

/// Frozen combinatorial skeleton of one family point: tracked branch-point
/// order, tree edges with branch anchors, the integer symplectic transform,
/// and the path recipe for the abelian logarithm. Continuation moves the
/// anchors while keeping the combinatorics fixed, so that finite differences
/// of periods across a stencil live in a single basis.
struct PeriodContext {
  FamilyPoint point;
  Poly f;
  Poly fprime;
  std::vector<Cplx> roots;  // tracked order; sorted lexicographically at build time
  double scale = 1.0;
  double min_separation = 0.0;

  CycleBasis basis;                 // loops/intersection valid at the build point
  std::vector<Cplx> anchors;        // y at each tree-segment midpoint, tracked
  int genus = 0;

  // abelian-log path recipe, frozen at build time
  Cplx staging;                     // finite stand-in for the point at infinity
  int base_root = 0;                // tracked index of the path's base branch point
  std::vector<Cplx> vias;           // detour waypoints between staging and base root

  Cplx mid(int edge) const {
    return (roots[basis.edge_cycles[edge].ia] + roots[basis.edge_cycles[edge].ib]) * 0.5;
  }
};

struct PeriodData {
  Eigen::MatrixXcd omega1, omega2, Z;
  double quadrature_error = 0.0;
  int genus = 0;
  PeriodContext ctx;

  /// (Omega_1; Omega_2) stacked, rows = cycles.
  Eigen::MatrixXcd omega() const {
    Eigen::MatrixXcd W(2 * genus, genus);
    W.topRows(genus) = omega1;
    W.bottomRows(genus) = omega2;
    return W;
  }
};

PeriodContext build_period_context(const FamilyPoint& p, const QuadratureConfig& cfg);

/// Periods at the context's current point. Checks the Riemann relations
/// (Z symmetric, Im Z positive definite) and the null-cycle consistency.
PeriodData compute_periods(const PeriodContext& ctx, const QuadratureConfig& cfg);

/// Transports the context to a nearby parameter point in the same cycle
/// basis. Throws MonodromyStep when branch points move too far relative to
/// their separation for the tracking to be trustworthy.
PeriodContext continue_period_context(const PeriodContext& base, const FamilyPoint& target,
                                      const QuadratureConfig& cfg);

/// Convenience wrappers for one-shot use.
PeriodData period_matrix(const FamilyPoint& p, const QuadratureConfig& cfg);
PeriodData continue_periods(const PeriodData& pd, const FamilyPoint& target,
                            const QuadratureConfig& cfg);

/// Raw edge-cycle periods (rows follow ctx.basis.edge_cycles, columns the
/// forms x^j dx/y); the symplectic rows are transform * edge_periods.
Eigen::MatrixXcd edge_periods(const PeriodContext& ctx, const QuadratureConfig& cfg,
                              double* err = nullptr);

}  // namespace bettilab
