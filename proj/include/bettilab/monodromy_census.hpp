#pragma once

#include <string>
#include <vector>

#include "bettilab/rational.hpp"

namespace bettilab {

enum class CensusSeries { A, B, C, D_real, D_quaternion };

const char* census_series_name(CensusSeries s);

/// One minuscule symplectic candidate: a simple factor series with rank ell,
/// m conjugate tensor slots, the representation dimension 2d, the total
/// symplectic dimension 2g = (2d)^m, and the real dimension of the Hermitian
/// domain. feasible means domain_dim >= 2g.
struct CensusCase {
  CensusSeries series;
  int ell = 0;
  int m = 1;
  int r = 0;  // signature parameter for the A series (best value recorded)
  BigInt rep_dim;     // 2d
  BigInt two_g;       // (2d)^m
  BigInt domain_dim;  // real dimension of the domain
  bool congruence_ok = true;
  bool feasible = false;
};

/// All congruence-admissible cases with odd m <= m_max and ell <= ell_max
/// (ell >= 5 for A and B, >= 6 for D, >= 1 for C).
std::vector<CensusCase> enumerate_cases(int ell_max, int m_max);

struct CensusSummary {
  std::vector<CensusCase> cases;
  bool only_standard_feasible = false;  // feasible set == { C series, m = 1 }
};

/// Runs the enumeration and checks that exactly the C-series m = 1 cases are
/// feasible; any other feasible case raises CensusViolation.
CensusSummary census_report(int ell_max, int m_max);

}  // namespace bettilab
