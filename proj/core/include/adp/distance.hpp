#pragma once

#include "adp/likelihood.hpp"
#include "adp/prior.hpp"

#include <utility>
#include <vector>

namespace adp {

// Pairwise CA distances. Pairs hold residue indices; residue r contributes its CA row 4r + 1.
struct DistanceSet {
  int n_residues = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> measured;  // Angstrom, one per pair

  int count() const { return static_cast<int>(pairs.size()); }
  // Throws ShapeError on i == j, out-of-range indices, duplicate unordered pairs, negative or
  // non-finite lengths, or a length-count mismatch.
  void validate() const;
};

// loglik = -sum_p (y_p - ||x_i - x_j||)^2 and its gradient with respect to x. Pairs closer than
// 1e-8 Angstrom contribute their loss but a zero gradient.
Evaluation distance_loglik_grad_x(const DistanceSet& d, const Coords& x);

// Same loss, gradient in z with x = R z.
Evaluation distance_loglik_grad(const DistanceSet& d, const CorrelatedPrior& prior, const Coords& z);

class DistanceLikelihood final : public Likelihood {
 public:
  DistanceLikelihood(CorrelatedPrior prior, DistanceSet distances);

  Evaluation evaluate(const Coords& z, const EvalContext& ctx = {}) const override;
  int dim() const override { return prior_.dim(); }
  std::string kind() const override { return "distance"; }

  const DistanceSet& distances() const { return distances_; }

 private:
  CorrelatedPrior prior_;
  DistanceSet distances_;
};

}  // namespace adp
