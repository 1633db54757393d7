#include "adp/prior.hpp"

#include "adp/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace adp {

namespace {

constexpr double kMaxDecay = 1.0 - 1e-9;

}  // namespace

CorrelatedPrior::CorrelatedPrior(int n_residues, double a, double b)
    : n_residues_(n_residues), a_(a), b_(b), nu_(1.0 / std::sqrt(1.0 - b * b)) {
  if (n_residues < 1) throw ShapeError("prior needs at least one residue");
  if (!(a > 0.0)) throw CalibrationError("scale a must be positive");
  if (!(b >= 0.0 && b < 1.0)) throw CalibrationError("decay b must lie in [0, 1)");
}

CorrelatedPrior CorrelatedPrior::with_decay(int n_residues, double scale_a, double decay_b) {
  return CorrelatedPrior(n_residues, scale_a, decay_b);
}

double expected_radius_of_gyration(int n_atoms, double a, double b) {
  // E[Rg^2] = 3 a^2 nu^2 (1 - sum_ij b^|i-j| / n^2) and
  // n^2 - sum_ij b^|i-j| = 2 sum_{k=1}^{n-1} (n - k)(1 - b^k).
  if (n_atoms < 2) return 0.0;
  const double n = n_atoms;
  const double log_b = b > 0.0 ? std::log(b) : -INFINITY;
  double sum = 0.0;
  for (int k = 1; k < n_atoms; ++k) sum += (n - k) * -std::expm1(k * log_b);
  const double rg2 = 3.0 * a * a / (1.0 - b * b) * 2.0 * sum / (n * n);
  return std::sqrt(rg2);
}

CorrelatedPrior CorrelatedPrior::calibrated(int n_residues, const PriorParams& params) {
  if (n_residues < 1) throw CalibrationError("n_residues must be >= 1");
  if (!(params.radius_coeff > 0.0)) throw CalibrationError("radius_coeff must be positive");
  if (!(params.radius_exponent > 0.0 && params.radius_exponent < 1.0))
    throw CalibrationError("radius_exponent must lie in (0, 1)");
  if (!(params.scale_a > 0.0)) throw CalibrationError("scale_a must be positive");

  const int n_atoms = kAtomsPerResidue * n_residues;
  const double target = params.radius_coeff * std::pow(n_residues, params.radius_exponent);
  auto residual = [&](double b) {
    return adp::expected_radius_of_gyration(n_atoms, params.scale_a, b) - target;
  };

  // Scan on a grid that is dense near b = 1 (b = 1 - 10^-s), take the first sign change,
  // then bisect to machine precision.
  constexpr int kGrid = 720;
  double lo = 0.0;
  double f_lo = residual(lo);
  double hi = -1.0;
  for (int k = 1; k <= kGrid; ++k) {
    const double s = 9.0 * k / kGrid;
    const double b = k == kGrid ? kMaxDecay : 1.0 - std::pow(10.0, -s);
    const double f = residual(b);
    if (f_lo == 0.0) {
      hi = lo;
      break;
    }
    if ((f_lo < 0.0) != (f < 0.0)) {
      hi = b;
      break;
    }
    lo = b;
    f_lo = f;
  }
  if (hi < 0.0)
    throw CalibrationError("cannot bracket decay b for N=" + std::to_string(n_residues) +
                           ": target Rg " + std::to_string(target) +
                           " A is unreachable with scale a=" + std::to_string(params.scale_a));
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = residual(mid);
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  return CorrelatedPrior(n_residues, params.scale_a, 0.5 * (lo + hi));
}

Coords CorrelatedPrior::apply(const Coords& z) const {
  require_shape(z, dim(), "apply R");
  Coords x(z.rows(), 3);
  x.row(0) = a_ * nu_ * z.row(0);
  for (int i = 1; i < dim(); ++i) x.row(i) = b_ * x.row(i - 1) + a_ * z.row(i);
  return x;
}

Coords CorrelatedPrior::apply_inverse(const Coords& x) const {
  require_shape(x, dim(), "whiten");
  Coords z(x.rows(), 3);
  z.row(0) = x.row(0) / (a_ * nu_);
  for (int i = 1; i < dim(); ++i) z.row(i) = (x.row(i) - b_ * x.row(i - 1)) / a_;
  return z;
}

Coords CorrelatedPrior::apply_transpose(const Coords& g) const {
  require_shape(g, dim(), "apply R^T");
  // (R^T g)_j = a sum_{i>=j} b^{i-j} g_i (times nu for j = 0): a reverse recursion.
  Coords out(g.rows(), 3);
  Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
  for (int j = dim() - 1; j >= 0; --j) {
    acc = g.row(j) + b_ * acc;
    out.row(j) = a_ * acc;
  }
  out.row(0) *= nu_;
  return out;
}

Coords CorrelatedPrior::apply_inverse_transpose(const Coords& g) const {
  require_shape(g, dim(), "apply R^-T");
  // R^{-1} = W / a with W lower bidiagonal (diag 1/nu, 1, ..., subdiag -b), so R^{-T} = W^T / a.
  const int n = dim();
  Coords out(g.rows(), 3);
  for (int j = 0; j < n; ++j) {
    Eigen::RowVector3d v = (j == 0 ? 1.0 / nu_ : 1.0) * g.row(j);
    if (j + 1 < n) v -= b_ * g.row(j + 1);
    out.row(j) = v / a_;
  }
  return out;
}

double CorrelatedPrior::covariance(int i, int j) const {
  return a_ * a_ * nu_ * nu_ * std::pow(b_, std::abs(i - j));
}

double CorrelatedPrior::entry(int i, int j) const {
  if (j > i) return 0.0;
  const double v = a_ * std::pow(b_, i - j);
  return j == 0 ? nu_ * v : v;
}

Eigen::MatrixXd CorrelatedPrior::dense() const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j <= i; ++j) r(i, j) = entry(i, j);
  return r;
}

double CorrelatedPrior::expected_radius_of_gyration() const {
  return adp::expected_radius_of_gyration(dim(), a_, b_);
}

double CorrelatedPrior::condition_number() const {
  const int n = dim();
  if (n == 1) return 1.0;
  // a^2 R^{-T} R^{-1} = W^T W is tridiagonal: diagonal (1, 1+b^2, ..., 1+b^2, 1), off-diagonal -b.
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 1.0 + b_ * b_);
  diag(0) = 1.0 / (nu_ * nu_) + b_ * b_;
  diag(n - 1) = 1.0;
  Eigen::VectorXd off = Eigen::VectorXd::Constant(n - 1, -b_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("tridiagonal eigensolver failed");
  const auto& ev = solver.eigenvalues();
  return std::sqrt(ev.maxCoeff() / ev.minCoeff());
}

Coords whiten(const CorrelatedPrior& prior, const Coords& x) { return prior.apply_inverse(x); }

Coords unwhiten(const CorrelatedPrior& prior, const Coords& z) { return prior.apply(z); }

}  // namespace adp
