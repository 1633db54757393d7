#include "adp/linear.hpp"

#include "adp/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace adp {

void MaskedLinearMeasurement::validate() const {
  if (dim <= 0 || dim % kAtomsPerResidue != 0)
    throw ShapeError("measurement dim must be a positive multiple of 4");
  if (rows.empty()) throw DegenerateMeasurementError("masked measurement selects no rows");
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(dim), 0);
  for (int r : rows) {
    if (r < 0 || r >= dim)
      throw ShapeError("measurement row " + std::to_string(r) + " outside [0, " +
                       std::to_string(dim) + ")");
    if (seen[static_cast<std::size_t>(r)]++)
      throw ShapeError("duplicate measurement row " + std::to_string(r));
  }
  require_shape(observed, count(), "observed coordinates");
  if (!(noise_scale > 0.0)) throw ShapeError("noise scale must be positive");
}

Coords MaskedLinearMeasurement::select(const Coords& x) const {
  Coords out(count(), 3);
  for (int p = 0; p < count(); ++p) out.row(p) = x.row(rows[static_cast<std::size_t>(p)]);
  return out;
}

Coords MaskedLinearMeasurement::scatter(const Coords& y) const {
  Coords out = Coords::Zero(dim, 3);
  for (int p = 0; p < count(); ++p) out.row(rows[static_cast<std::size_t>(p)]) = y.row(p);
  return out;
}

PreconditionedLinear precondition(const CorrelatedPrior& prior, const MaskedLinearMeasurement& meas) {
  meas.validate();
  if (meas.dim != prior.dim()) throw ShapeError("measurement and prior dimensions differ");
  const int m = meas.count();
  const int n = prior.dim();
  if (m > n) throw ShapeError("more measurement rows than atom rows");

  Eigen::MatrixXd mr(m, n);
  for (int p = 0; p < m; ++p) {
    const int row = meas.rows[static_cast<std::size_t>(p)];
    for (int j = 0; j < n; ++j) mr(p, j) = prior.entry(row, j);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(mr, Eigen::ComputeThinU | Eigen::ComputeThinV);
  PreconditionedLinear out;
  out.s = svd.singularValues();
  if (out.s.size() != m || out.s(m - 1) < 1e-10 * out.s(0))
    throw DegenerateMeasurementError("masked measurement is rank deficient");
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.target = out.s.cwiseInverse().asDiagonal() * (out.u.transpose() * meas.observed);
  out.noise_scale = meas.noise_scale;
  return out;
}

Evaluation linear_loglik_grad(const PreconditionedLinear& p, const Coords& z) {
  require_shape(z, static_cast<int>(p.v.rows()), "linear likelihood input");
  const Eigen::MatrixXd residual = p.v.transpose() * z - p.target;
  const double inv_var = 1.0 / (p.noise_scale * p.noise_scale);
  Evaluation ev;
  ev.loglik = -0.5 * inv_var * residual.squaredNorm();
  ev.grad = -inv_var * (p.v * residual);
  return ev;
}

Evaluation raw_linear_loglik_grad(const CorrelatedPrior& prior, const MaskedLinearMeasurement& meas,
                                  const Coords& z) {
  const Coords residual = meas.select(prior.apply(z)) - meas.observed;
  const double inv_var = 1.0 / (meas.noise_scale * meas.noise_scale);
  Evaluation ev;
  ev.loglik = -0.5 * inv_var * residual.squaredNorm();
  ev.grad = -inv_var * prior.apply_transpose(meas.scatter(residual));
  return ev;
}

MaskedLinearLikelihood::MaskedLinearLikelihood(CorrelatedPrior prior, MaskedLinearMeasurement meas,
                                               LinearRoute route)
    : prior_(std::move(prior)), meas_(std::move(meas)), route_(route) {
  meas_.validate();
  if (meas_.dim != prior_.dim()) throw ShapeError("measurement and prior dimensions differ");
  if (route_ == LinearRoute::svd) {
    svd_ = precondition(prior_, meas_);
    return;
  }
  // Rows of x = R z form a stationary AR(1) process with variance c0 and lag-k correlation b^k.
  // Restricted to the sorted measured rows it is still Markov, with per-step coefficient
  // b^gap, so (M R R^T M^T)^{-1} = W^T D^{-1} W for a bidiagonal W.
  const int m = meas_.count();
  order_.resize(static_cast<std::size_t>(m));
  std::iota(order_.begin(), order_.end(), 0);
  std::sort(order_.begin(), order_.end(), [&](int l, int r) {
    return meas_.rows[static_cast<std::size_t>(l)] < meas_.rows[static_cast<std::size_t>(r)];
  });
  const double c0 = prior_.covariance(0, 0);
  const double log_b = prior_.decay() > 0.0 ? std::log(prior_.decay()) : -INFINITY;
  phi_.assign(static_cast<std::size_t>(m), 0.0);
  innovation_.assign(static_cast<std::size_t>(m), c0);
  for (int p = 1; p < m; ++p) {
    const int gap = meas_.rows[static_cast<std::size_t>(order_[static_cast<std::size_t>(p)])] -
                    meas_.rows[static_cast<std::size_t>(order_[static_cast<std::size_t>(p - 1)])];
    const double phi = std::exp(gap * log_b);
    const double one_minus = -std::expm1(2.0 * gap * log_b);
    if (!(one_minus > 1e-20)) throw DegenerateMeasurementError("masked measurement is rank deficient");
    phi_[static_cast<std::size_t>(p)] = phi;
    innovation_[static_cast<std::size_t>(p)] = c0 * one_minus;
  }
}

Evaluation MaskedLinearLikelihood::structured(const Coords& z) const {
  const int m = meas_.count();
  const Coords x = prior_.apply(z);
  Coords r(m, 3);  // residual in sorted order
  for (int p = 0; p < m; ++p) {
    const int k = order_[static_cast<std::size_t>(p)];
    r.row(p) = x.row(meas_.rows[static_cast<std::size_t>(k)]) - meas_.observed.row(k);
  }
  Coords q(m, 3);  // D^{-1} W r
  double quad = 0.0;
  for (int p = 0; p < m; ++p) {
    Eigen::RowVector3d e = r.row(p);
    if (p > 0) e -= phi_[static_cast<std::size_t>(p)] * r.row(p - 1);
    const double d = innovation_[static_cast<std::size_t>(p)];
    quad += e.squaredNorm() / d;
    q.row(p) = e / d;
  }
  Coords scattered = Coords::Zero(prior_.dim(), 3);  // M^T W^T q
  for (int p = 0; p < m; ++p) {
    Eigen::RowVector3d u = q.row(p);
    if (p + 1 < m) u -= phi_[static_cast<std::size_t>(p + 1)] * q.row(p + 1);
    scattered.row(meas_.rows[static_cast<std::size_t>(order_[static_cast<std::size_t>(p)])]) = u;
  }
  const double inv_var = 1.0 / (meas_.noise_scale * meas_.noise_scale);
  Evaluation ev;
  ev.loglik = -0.5 * inv_var * quad;
  ev.grad = -inv_var * prior_.apply_transpose(scattered);
  return ev;
}

Evaluation MaskedLinearLikelihood::evaluate(const Coords& z, const EvalContext& ctx) const {
  require_shape(z, prior_.dim(), "linear likelihood input");
  if (!ctx.preconditioned) return raw_linear_loglik_grad(prior_, meas_, z);
  if (route_ == LinearRoute::svd) return linear_loglik_grad(svd_, z);
  return structured(z);
}

double MaskedLinearLikelihood::max_singular_value() const {
  if (route_ == LinearRoute::svd) return svd_.s(0);
  const int m = meas_.count();
  Eigen::MatrixXd c(m, m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      c(p, q) = prior_.covariance(meas_.rows[static_cast<std::size_t>(p)],
                                  meas_.rows[static_cast<std::size_t>(q)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  return std::sqrt(eig.eigenvalues().maxCoeff());
}

}  // namespace adp
