#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bettilab/betti_map.hpp"
#include "bettilab/curve_family.hpp"
#include "bettilab/rational.hpp"

namespace bettilab {

/// Explicit deformation data of an odd-degree fiber: row i is the functional
/// theta_{d/ds_i} evaluated on the even quadratic differentials x^j dx^2/y^2,
/// j = 0..2g-2. The rows factor as c_i (1, s_i, s_i^2, ...).
struct KSTensor {
  FamilyPoint point;
  Eigen::MatrixXcd M;                             // (2g-1) x (2g-1)
  Eigen::VectorXcd c;                             // M(i, 0)
  std::vector<Eigen::MatrixXcd> symmetric_forms;  // T_i with (T_i)_{ab} = M(i, a+b), g x g
};

/// Residue at (s_i, 0) of the contraction against x^j dx^2/y^2, computed by a
/// local series in the uniformizer y and cross-checked against a contour
/// integral; ResidueDisagreement if the two routes differ beyond 1e-10.
Cplx ks_residue(const FamilyPoint& p, int i, int j);

Cplx ks_residue_series(const FamilyPoint& p, int i, int j);
Cplx ks_residue_contour(const FamilyPoint& p, int i, int j);

/// Same contraction applied to the odd quadratic differential x^j dx^2/y;
/// vanishes identically, so the returned contour value measures error.
Cplx ks_residue_odd_contour(const FamilyPoint& p, int i, int j);

KSTensor ks_tensor(const FamilyPoint& p);

/// Exact rational route, available when all parameters are rational.
struct KSTensorExact {
  std::vector<std::vector<Rational>> M;
  std::vector<Rational> c;
};
KSTensorExact ks_tensor_exact(const std::vector<Rational>& s, int genus);

/// Rank of the d x g matrix with rows (T_i * omega)^T.
RankResult contracted_rank(const std::vector<Eigen::MatrixXcd>& T, const Eigen::VectorXcd& omega);

struct MaxContractedRank {
  int max_rank = 0;
  Eigen::VectorXcd witness;
};

/// Maximum of contracted_rank over random directions plus the deterministic
/// witness omega = e_1 (which meets every Vandermonde row).
MaxContractedRank max_contracted_rank(const std::vector<Eigen::MatrixXcd>& T, int n_trials,
                                      std::uint64_t seed);

}  // namespace bettilab
