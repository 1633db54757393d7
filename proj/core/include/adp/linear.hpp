#pragma once

#include "adp/likelihood.hpp"
#include "adp/prior.hpp"

#include <Eigen/Core>

#include <vector>

namespace adp {

// y = M x with M selecting atom rows; one 1 per row of M.
struct MaskedLinearMeasurement {
  int dim = 0;               // 4N
  std::vector<int> rows;     // selected atom rows, unique, in [0, dim)
  Coords observed;           // rows.size() x 3
  int subsample_factor = 1;  // metadata only
  double noise_scale = 1.0;  // sigma

  int count() const { return static_cast<int>(rows.size()); }
  // Throws ShapeError on duplicate or out-of-range rows or an observation shape mismatch.
  void validate() const;
  // M x.
  Coords select(const Coords& x) const;
  // M^T y, scattered into a dim x 3 matrix.
  Coords scatter(const Coords& y) const;
};

// Thin SVD M R = U S V^T with the target S^+ U^T y.
struct PreconditionedLinear {
  Eigen::MatrixXd u;   // m x m
  Eigen::VectorXd s;   // m, nonincreasing, all > 0
  Eigen::MatrixXd v;   // dim x m
  Eigen::MatrixXd target;  // m x 3
  double noise_scale = 1.0;
};

// Throws DegenerateMeasurementError when a singular value is below 1e-10 times the largest.
PreconditionedLinear precondition(const CorrelatedPrior& prior, const MaskedLinearMeasurement& meas);

// loglik = -1/(2 sigma^2) || V^T z - S^+ U^T y ||^2 and its gradient in z.
Evaluation linear_loglik_grad(const PreconditionedLinear& p, const Coords& z);

// loglik = -1/(2 sigma^2) || M R z - y ||^2 and its gradient in z.
Evaluation raw_linear_loglik_grad(const CorrelatedPrior& prior, const MaskedLinearMeasurement& meas,
                                  const Coords& z);

enum class LinearRoute {
  // Uses the Markov structure of M R R^T M^T: O(dim) per evaluation.
  structured,
  // Uses the dense SVD factors: O(dim m) per evaluation.
  svd,
};

// Masked linear measurement bound to a prior. The preconditioned form is the weighted least
// squares loss with covariance sigma^2 (M R)(M R)^T; both routes compute it exactly.
class MaskedLinearLikelihood final : public Likelihood {
 public:
  MaskedLinearLikelihood(CorrelatedPrior prior, MaskedLinearMeasurement meas,
                         LinearRoute route = LinearRoute::structured);

  Evaluation evaluate(const Coords& z, const EvalContext& ctx = {}) const override;
  int dim() const override { return prior_.dim(); }
  std::string kind() const override { return "linear"; }

  const MaskedLinearMeasurement& measurement() const { return meas_; }
  const CorrelatedPrior& prior() const { return prior_; }
  LinearRoute route() const { return route_; }
  // Largest singular value of M R, needed to pick a stable raw gradient-descent step.
  double max_singular_value() const;

 private:
  Evaluation structured(const Coords& z) const;

  CorrelatedPrior prior_;
  MaskedLinearMeasurement meas_;
  LinearRoute route_;
  PreconditionedLinear svd_;          // only for LinearRoute::svd
  std::vector<int> order_;            // measurement indices sorted by row
  std::vector<double> phi_;           // b^gap to the previous sorted row
  std::vector<double> innovation_;    // innovation variances of the AR(1) at the sorted rows
};

}  // namespace adp
