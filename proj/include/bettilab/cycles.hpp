#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "bettilab/curve_family.hpp"

namespace bettilab {

/// A closed polygon in the x-plane with a sheet label per edge. Edge k runs
/// pts[k] -> pts[(k+1) % size]; sheet[k] is 0 for the reference branch of
/// sqrt(f) on the cut complement and 1 for its negative.
struct SheetedPolygon {
  std::vector<Cplx> pts;
  std::vector<int> sheet;
};

/// The lift of a thin loop around one tree segment between adjacent branch
/// points. Periods over this loop equal period_sign * 2 * ∫_{a->b} x^j dx/y
/// with y pinned at (mid, y_mid).
struct EdgeCycle {
  int ia = 0, ib = 0;   // endpoint indices into the tracked branch-point order
  Cplx mid;             // anchor position (segment midpoint)
  Cplx y_mid;           // anchor branch value
  int period_sign = -1; // ccw loop with the anchor on the left of a->b
  SheetedPolygon loop;
};

struct CycleBasis {
  std::vector<EdgeCycle> edge_cycles;  // n-1 loops for n branch points
  Eigen::MatrixXi intersection;        // signed same-sheet crossing counts
  /// rows = 2g symplectic cycles as integer combinations of edge cycles;
  /// transform * intersection * transform^T == standard J exactly.
  Eigen::MatrixXi transform;
  /// integer combinations with vanishing intersection against everything
  /// (even-degree models have one); their periods must vanish.
  Eigen::MatrixXi kernel;
  bool conjugation_adapted = false;
  int genus = 0;
};

/// J_2g in the (a_1..a_g, b_1..b_g) ordering: a_i . b_i = +1.
Eigen::MatrixXi standard_symplectic(int g);

/// Builds the tree loops, their pairwise intersection numbers, and an exact
/// integer congruence to the standard symplectic form. For configurations
/// with every branch point real the basis is conjugation-adapted: a-cycles
/// around the odd (sign-flipping) segments, b-cycles telescoped from the gap
/// segments.
CycleBasis build_cycle_basis(const CurveData& c);

/// Integer congruence U with U M U^T = J ⊕ 0; returns {transform, kernel}.
/// Throws BasisDegeneracy if an elementary divisor exceeds 1.
std::pair<Eigen::MatrixXi, Eigen::MatrixXi> alternating_reduce(Eigen::MatrixXi M);

namespace geom {
double segment_distance(const Cplx& p, const Cplx& a, const Cplx& b);
/// Proper crossing test for open segments; fills s, t in (0,1) and the sign
/// of cross(b-a, d-c) when they intersect transversally.
bool segments_cross(const Cplx& a, const Cplx& b, const Cplx& c, const Cplx& d, double* s, double* t,
                    int* orientation);
}  // namespace geom

}  // namespace bettilab
