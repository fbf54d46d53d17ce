#include "bettilab/errors.hpp"

namespace bettilab {

const char* errc_name(errc c) {
  switch (c) {
    case errc::degenerate_discriminant: return "DegenerateDiscriminant";
    case errc::invalid_param: return "InvalidParam";
    case errc::root_finding_failure: return "RootFindingFailure";
    case errc::basis_degeneracy: return "BasisDegeneracy";
    case errc::quadrature_divergence: return "QuadratureDivergence";
    case errc::ill_conditioned: return "IllConditioned";
    case errc::monodromy_step: return "MonodromyStep";
    case errc::path_through_branch_point: return "PathThroughBranchPoint";
    case errc::newton_diverged: return "NewtonDiverged";
    case errc::jacobian_singular: return "JacobianSingular";
    case errc::rank_ambiguous: return "RankAmbiguous";
    case errc::odd_degree: return "OddDegree";
    case errc::not_even_degree: return "NotEvenDegree";
    case errc::non_squarefree: return "NonSquarefree";
    case errc::residue_disagreement: return "ResidueDisagreement";
    case errc::census_violation: return "CensusViolation";
    case errc::schema_error: return "SchemaError";
  }
  return "UnknownError";
}

}  // namespace bettilab
