#pragma once

#include "adp/chain.hpp"
#include "adp/random.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace adp {

struct PriorParams {
  double radius_coeff = 2.0;     // Rg ~ radius_coeff * N^radius_exponent, in Angstrom
  double radius_exponent = 0.4;
  double scale_a = 1.5;          // innovation scale a, in Angstrom
};

// The "Rg-confined globular polymer" correlation matrix R over the 4N backbone atoms:
//
//   R[i][0] = a * nu * b^i,      R[i][j] = a * b^(i-j)   for 1 <= j <= i,   nu = 1/sqrt(1-b^2).
//
// Equivalently x = R z is the stationary AR(1) chain x_0 = a nu z_0, x_i = b x_{i-1} + a z_i,
// so R, R^T and their inverses are all applied in O(dim) without forming a matrix.
// Instances are immutable and safe to share between threads.
class CorrelatedPrior {
 public:
  // Solves for b so that the expected radius of gyration of R z, z ~ N(0, I), equals
  // radius_coeff * n_residues^radius_exponent. Throws CalibrationError when no b in
  // [0, 1 - 1e-9) brackets the target.
  static CorrelatedPrior calibrated(int n_residues, const PriorParams& params = {});

  // Fixed decay, no calibration.
  static CorrelatedPrior with_decay(int n_residues, double scale_a, double decay_b);

  int n_residues() const { return n_residues_; }
  int dim() const { return kAtomsPerResidue * n_residues_; }
  double scale() const { return a_; }
  double decay() const { return b_; }
  double nu() const { return nu_; }

  // x = R z
  Coords apply(const Coords& z) const;
  // z = R^{-1} x
  Coords apply_inverse(const Coords& x) const;
  // R^T g
  Coords apply_transpose(const Coords& g) const;
  // R^{-T} g
  Coords apply_inverse_transpose(const Coords& g) const;

  // Entry (R R^T)_{ij} = a^2 nu^2 b^|i-j|.
  double covariance(int i, int j) const;
  // Single entry R_{ij}.
  double entry(int i, int j) const;
  Eigen::MatrixXd dense() const;

  // sqrt(E[Rg^2]) of x = R z in closed form, over all 4N atoms.
  double expected_radius_of_gyration() const;

  // sigma_max(R) / sigma_min(R), via the tridiagonal matrix R^{-T} R^{-1}.
  double condition_number() const;

 private:
  CorrelatedPrior(int n_residues, double a, double b);

  int n_residues_;
  double a_;
  double b_;
  double nu_;
};

// sqrt(E[Rg^2]) for the AR(1) chain with `n_atoms` atoms, scale a and decay b.
double expected_radius_of_gyration(int n_atoms, double scale_a, double decay_b);

Coords whiten(const CorrelatedPrior& prior, const Coords& x);
Coords unwhiten(const CorrelatedPrior& prior, const Coords& z);

// Standard normal rows x 3 draw.
template <class G>
Coords standard_normal(int rows, G& gen) {
  Coords w(rows, 3);
  NormalSampler sampler;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < 3; ++c) w(i, c) = sampler(gen);
  return w;
}

}  // namespace adp
