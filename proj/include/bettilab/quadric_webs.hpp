#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bettilab/poly.hpp"
#include "bettilab/rational.hpp"

namespace bettilab {

/// A g-dimensional space of quadratic forms on C^g, stored as symmetric
/// matrices. The rational variant enables exact certificates.
struct QuadricWeb {
  int g = 0;
  std::vector<Eigen::MatrixXcd> basis;
};

using QMatrix = std::vector<std::vector<Rational>>;

struct QuadricWebQ {
  int g = 0;
  std::vector<QMatrix> basis;

  QuadricWeb to_complex() const;
};

Rational det_exact(const QMatrix& m);

struct NondegenerateMember {
  bool found = false;
  Eigen::VectorXcd lambda;  // witness combination when found
  int trials_used = 0;
};

/// Random search for a combination with det != 0; a negative answer is a
/// probabilistic certificate (det is a degree-g polynomial sampled well past
/// its degree).
NondegenerateMember has_nondegenerate_member(const QuadricWeb& web, int n_trials,
                                             std::uint64_t seed);

enum class RegularVectorStatus { found, identically_singular, inconclusive };

struct RegularVectorResult {
  RegularVectorStatus status = RegularVectorStatus::inconclusive;
  Eigen::VectorXcd p;       // witness when found
  int samples_used = 0;
};

/// Searches for p with D(p) := det[Q_1 p | ... | Q_g p] != 0. Floating mode:
/// integer vectors first, then complex Gaussians; if everything stays below
/// threshold the result is inconclusive.
RegularVectorResult find_regular_vector(const QuadricWeb& web, int n_trials, std::uint64_t seed);

/// Exact mode: on top of the search, a zero of D on the full deterministic
/// grid {0..g}^g plus a shifted copy certifies D == 0 (IdenticallySingular).
RegularVectorResult find_regular_vector_exact(const QuadricWebQ& web, int n_trials,
                                              std::uint64_t seed);

}  // namespace bettilab
