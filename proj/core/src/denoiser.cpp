#include "adp/denoiser.hpp"

#include "adp/error.hpp"
#include "adp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace adp {

Coords Denoiser::jvp(const Coords& x, double t, const Coords& direction) const {
  const double scale = direction.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Coords::Zero(x.rows(), 3);
  const double h = 1e-4 * (1.0 + x.cwiseAbs().maxCoeff());
  const Coords unit = direction / scale;
  const Coords plus = denoise(x + h * unit, t);
  const Coords minus = denoise(x - h * unit, t);
  return (plus - minus) * (scale / (2.0 * h));
}

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("denoiser: t must lie in [0, 1], got " + std::to_string(t));
}

}  // namespace

GaussianLibraryDenoiser::GaussianLibraryDenoiser(CorrelatedPrior prior, NoiseSchedule schedule,
                                                 std::vector<Coords> components,
                                                 std::vector<double> weights, double spread)
    : prior_(std::move(prior)), schedule_(schedule), spread_(spread) {
  if (components.empty()) throw Error("gaussian library needs at least one component");
  if (weights.size() != components.size())
    throw Error("gaussian library: one weight per component required");
  if (!(spread >= 0.0)) throw Error("gaussian library: spread must be >= 0");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double w : weights)
    if (!(w > 0.0)) throw Error("gaussian library: weights must be positive");
  whitened_means_.reserve(components.size());
  for (const auto& mu : components) whitened_means_.push_back(prior_.apply_inverse(mu));
  for (double w : weights) log_weights_.push_back(std::log(w / total));
}

GaussianLibraryDenoiser::GaussianLibraryDenoiser(CorrelatedPrior prior, NoiseSchedule schedule,
                                                 std::vector<Coords> components, double spread)
    : GaussianLibraryDenoiser(std::move(prior), schedule, components,
                              std::vector<double>(components.size(), 1.0), spread) {}

GaussianLibraryDenoiser::Posterior GaussianLibraryDenoiser::posterior(const Coords& x,
                                                                      double t) const {
  check_time(t);
  Posterior p;
  p.alpha = schedule_.alpha(t);
  const double sigma = schedule_.sigma(t);
  p.variance = p.alpha * p.alpha * spread_ * spread_ + sigma * sigma;
  if (!(p.variance > 0.0))
    throw Error("gaussian library: degenerate posterior (spread 0 at t = 0)");
  p.gain = p.alpha * spread_ * spread_ / p.variance;
  p.z = prior_.apply_inverse(x);

  const std::size_t k = whitened_means_.size();
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < k; ++i)
    logits[i] = log_weights_[i] -
                (p.z - p.alpha * whitened_means_[i]).squaredNorm() / (2.0 * p.variance);
  // log-sum-exp; the max is the first maximal logit.
  const double top = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  p.resp.resize(k);
  for (std::size_t i = 0; i < k; ++i) norm += (p.resp[i] = std::exp(logits[i] - top));
  for (double& r : p.resp) r /= norm;
  return p;
}

std::vector<double> GaussianLibraryDenoiser::responsibilities(const Coords& x, double t) const {
  return posterior(x, t).resp;
}

Coords GaussianLibraryDenoiser::denoise(const Coords& x, double t) const {
  require_shape(x, prior_.dim(), "gaussian library input");
  const Posterior p = posterior(x, t);
  Coords mean = Coords::Zero(x.rows(), 3);
  for (std::size_t i = 0; i < whitened_means_.size(); ++i) {
    if (p.resp[i] == 0.0) continue;
    const Coords& m = whitened_means_[i];
    mean += p.resp[i] * (m + p.gain * (p.z - p.alpha * m));
  }
  return prior_.apply(mean);
}

Coords GaussianLibraryDenoiser::jvp(const Coords& x, double t, const Coords& direction) const {
  require_shape(x, prior_.dim(), "gaussian library input");
  require_shape(direction, prior_.dim(), "gaussian library jvp direction");
  // In whitened space D(z) = sum_k r_k mhat_k with mhat_k = m_k + g (z - alpha m_k) and
  // dr_k = r_k (e_k - sum_j r_j e_j), e_k = -<z - alpha m_k, d> / s^2.
  const Posterior p = posterior(x, t);
  const Coords d = prior_.apply_inverse(direction);
  const std::size_t k = whitened_means_.size();
  std::vector<double> e(k);
  double e_bar = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    e[i] = -(p.z - p.alpha * whitened_means_[i]).cwiseProduct(d).sum() / p.variance;
    e_bar += p.resp[i] * e[i];
  }
  Coords out = p.gain * d;
  for (std::size_t i = 0; i < k; ++i) {
    const double dr = p.resp[i] * (e[i] - e_bar);
    if (dr == 0.0) continue;
    const Coords& m = whitened_means_[i];
    out += dr * (m + p.gain * (p.z - p.alpha * m));
  }
  return prior_.apply(out);
}

AlignedLibraryDenoiser::AlignedLibraryDenoiser(CorrelatedPrior prior, NoiseSchedule schedule,
                                               std::vector<Coords> components, double spread)
    : prior_(std::move(prior)), schedule_(schedule), components_(std::move(components)), spread_(spread) {
  if (components_.empty()) throw Error("aligned library needs at least one component");
  if (!(spread >= 0.0)) throw Error("aligned library: spread must be >= 0");
  for (const auto& mu : components_) require_shape(mu, prior_.dim(), "aligned library component");
}

std::vector<Coords> AlignedLibraryDenoiser::aligned_components(const Coords& x, double t) const {
  check_time(t);
  require_shape(x, prior_.dim(), "aligned library input");
  const Coords reference = x / schedule_.alpha(t);
  std::vector<Coords> out;
  out.reserve(components_.size());
  for (const auto& mu : components_) out.push_back(kabsch(mu, reference).apply(mu));
  return out;
}

Coords AlignedLibraryDenoiser::denoise(const Coords& x, double t) const {
  return GaussianLibraryDenoiser(prior_, schedule_, aligned_components(x, t), spread_).denoise(x, t);
}

double GaussianLibraryDenoiser::log_marginal(const Coords& x, double t) const {
  const Posterior p = posterior(x, t);
  // log sum_k w_k N(z; alpha m_k, s^2 I), dropping the x-independent Jacobian of z = R^{-1} x.
  const std::size_t k = whitened_means_.size();
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < k; ++i)
    logits[i] = log_weights_[i] -
                (p.z - p.alpha * whitened_means_[i]).squaredNorm() / (2.0 * p.variance);
  const double top = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double l : logits) s += std::exp(l - top);
  const double n = static_cast<double>(p.z.size());
  return top + std::log(s) - 0.5 * n * std::log(2.0 * M_PI * p.variance);
}

OracleDenoiser::OracleDenoiser(Coords target, double blend, NoiseSchedule schedule)
    : target_(std::move(target)), blend_(blend), schedule_(schedule) {
  if (!(blend >= 0.0 && blend <= 1.0)) throw Error("oracle denoiser: blend must lie in [0, 1]");
}

Coords OracleDenoiser::denoise(const Coords& x, double t) const {
  check_time(t);
  require_shape(x, static_cast<int>(target_.rows()), "oracle denoiser input");
  if (blend_ == 1.0) return target_;
  const double alpha = schedule_.alpha(t);
  if (alpha == 0.0) throw Error("oracle denoiser: alpha_t = 0");
  return blend_ * target_ + (1.0 - blend_) * (x / alpha);
}

Coords OracleDenoiser::jvp(const Coords& x, double t, const Coords& direction) const {
  check_time(t);
  require_shape(x, static_cast<int>(target_.rows()), "oracle denoiser input");
  const double alpha = schedule_.alpha(t);
  if (alpha == 0.0) throw Error("oracle denoiser: alpha_t = 0");
  return (1.0 - blend_) / alpha * direction;
}

Coords tweedie_score(const CorrelatedPrior& prior, const NoiseSchedule& schedule, const Coords& x,
                     const Coords& x_hat, double t) {
  const double alpha = schedule.alpha(t);
  const double var = 1.0 - alpha * alpha;
  const Coords r = (alpha * x_hat - x) / var;
  // (R R^T)^{-1} r = R^{-T} R^{-1} r
  return prior.apply_inverse_transpose(prior.apply_inverse(r));
}

}  // namespace adp
