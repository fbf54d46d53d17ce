#include "bettilab/monodromy_census.hpp"

#include "bettilab/errors.hpp"

namespace bettilab {

const char* census_series_name(CensusSeries s) {
  switch (s) {
    case CensusSeries::A: return "A";
    case CensusSeries::B: return "B";
    case CensusSeries::C: return "C";
    case CensusSeries::D_real: return "D_real";
    case CensusSeries::D_quaternion: return "D_quaternion";
  }
  return "?";
}

namespace {

BigInt binomial(int n, int k) {
  BigInt r = 1;
  for (int i = 0; i < k; ++i) {
    r *= (n - i);
    r /= (i + 1);
  }
  return r;
}

BigInt ipow(const BigInt& b, int e) {
  BigInt r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

CensusCase make_case(CensusSeries series, int ell, int m, int r, const BigInt& rep,
                     const BigInt& dom) {
  CensusCase c;
  c.series = series;
  c.ell = ell;
  c.m = m;
  c.r = r;
  c.rep_dim = rep;
  c.two_g = ipow(rep, m);
  c.domain_dim = dom;
  c.congruence_ok = true;
  c.feasible = c.domain_dim >= c.two_g;
  return c;
}

}  // namespace

std::vector<CensusCase> enumerate_cases(int ell_max, int m_max) {
  if (ell_max < 6) fail(errc::invalid_param, "ell_max must be at least 6");
  if (m_max < 1 || m_max % 2 == 0) fail(errc::invalid_param, "m_max must be odd");

  std::vector<CensusCase> out;
  for (int m = 1; m <= m_max; m += 2) {
    // A_ell: wedge^{(ell+1)/2} of the standard rep, symplectic iff ell = 1 mod 4
    for (int ell = 5; ell <= ell_max; ++ell) {
      if (ell % 4 != 1) continue;
      const int r_best = (ell + 1) / 2;
      out.push_back(make_case(CensusSeries::A, ell, m, r_best,
                              binomial(ell + 1, (ell + 1) / 2),
                              BigInt(2) * r_best * (ell + 1 - r_best)));
    }
    // B_ell: spin rep of dimension 2^ell, symplectic iff ell = 1,2,5,6 mod 8
    for (int ell = 5; ell <= ell_max; ++ell) {
      const int rm = ell % 8;
      if (rm != 1 && rm != 2 && rm != 5 && rm != 6) continue;
      out.push_back(
          make_case(CensusSeries::B, ell, m, 0, ipow(BigInt(2), ell), BigInt(2) * (2 * ell - 1)));
    }
    // C_ell: the standard representation, always symplectic
    for (int ell = 1; ell <= ell_max; ++ell)
      out.push_back(
          make_case(CensusSeries::C, ell, m, 0, BigInt(2) * ell, BigInt(ell) * (ell + 1)));
    // D_ell: half-spin of dimension 2^{ell-1}, symplectic iff ell = 2 mod 4;
    // two Hermitian domains
    for (int ell = 6; ell <= ell_max; ++ell) {
      if (ell % 4 != 2) continue;
      out.push_back(make_case(CensusSeries::D_real, ell, m, 0, ipow(BigInt(2), ell - 1),
                              BigInt(4) * (ell - 1)));
      out.push_back(make_case(CensusSeries::D_quaternion, ell, m, 0, ipow(BigInt(2), ell - 1),
                              BigInt(ell) * (ell - 1)));
    }
  }
  return out;
}

CensusSummary census_report(int ell_max, int m_max) {
  CensusSummary s;
  s.cases = enumerate_cases(ell_max, m_max);
  s.only_standard_feasible = true;
  for (const auto& c : s.cases) {
    const bool is_standard = c.series == CensusSeries::C && c.m == 1;
    if (is_standard && !c.feasible)
      fail(errc::census_violation, "a standard symplectic case came out infeasible");
    if (!is_standard && c.feasible)
      fail(errc::census_violation, "a non-standard case came out feasible");
  }
  return s;
}

}  // namespace bettilab
