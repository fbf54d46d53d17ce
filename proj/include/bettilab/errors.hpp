#pragma once

#include <stdexcept>
#include <string>

namespace bettilab {

enum class errc {
  degenerate_discriminant,
  invalid_param,
  root_finding_failure,
  basis_degeneracy,
  quadrature_divergence,
  ill_conditioned,
  monodromy_step,
  path_through_branch_point,
  newton_diverged,
  jacobian_singular,
  rank_ambiguous,
  odd_degree,
  not_even_degree,
  non_squarefree,
  residue_disagreement,
  census_violation,
  schema_error,
};

/// Stable machine-readable name, e.g. "DegenerateDiscriminant".
const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace bettilab
