#pragma once

#include "adp/chain.hpp"
#include "adp/prior.hpp"
#include "adp/schedule.hpp"

#include <string>
#include <vector>

namespace adp {

// x_hat(x, t) ~ E[x_0 | x_t = x]. Implementations must be callable concurrently from several
// replicas (or document otherwise); outputs keep the input shape.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual Coords denoise(const Coords& x, double t) const = 0;

  // Jacobian-vector product d x_hat / dx (x, t) . direction. The default is a central
  // finite difference with step 1e-4 (1 + max|x|) along the normalized direction.
  virtual Coords jvp(const Coords& x, double t, const Coords& direction) const;
  virtual bool has_analytic_jvp() const { return false; }

  virtual std::string name() const = 0;
};

// Exact posterior mean under the mixture prior sum_k w_k N(mu_k, c^2 R R^T) with the forward
// process x_t = alpha_t x_0 + sigma_t R w. The mixture component is shared by all three
// coordinate columns, so responsibilities use the full 4N x 3 residual.
class GaussianLibraryDenoiser final : public Denoiser {
 public:
  GaussianLibraryDenoiser(CorrelatedPrior prior, NoiseSchedule schedule,
                          std::vector<Coords> components, std::vector<double> weights,
                          double spread);
  // Uniform weights.
  GaussianLibraryDenoiser(CorrelatedPrior prior, NoiseSchedule schedule,
                          std::vector<Coords> components, double spread);

  Coords denoise(const Coords& x, double t) const override;
  Coords jvp(const Coords& x, double t, const Coords& direction) const override;
  bool has_analytic_jvp() const override { return true; }
  std::string name() const override { return "gaussian-library"; }

  // Posterior component probabilities r_k for x at time t.
  std::vector<double> responsibilities(const Coords& x, double t) const;
  // log p_t(x) up to an x-independent constant.
  double log_marginal(const Coords& x, double t) const;

  int components() const { return static_cast<int>(whitened_means_.size()); }
  double spread() const { return spread_; }
  const CorrelatedPrior& prior() const { return prior_; }
  const NoiseSchedule& schedule() const { return schedule_; }

 private:
  struct Posterior {
    Coords z;
    std::vector<double> resp;
    double gain;      // alpha c^2 / s^2
    double variance;  // s^2 = alpha^2 c^2 + sigma^2
    double alpha;
  };
  Posterior posterior(const Coords& x, double t) const;

  CorrelatedPrior prior_;
  NoiseSchedule schedule_;
  std::vector<Coords> whitened_means_;  // m_k = R^{-1} mu_k
  std::vector<double> log_weights_;
  double spread_;
};

// Gaussian library whose components are first superposed (proper rotation plus translation) onto
// x / alpha_t, so the prior is blind to the global frame. Meant for rigid-invariant likelihoods
// such as distances. The Jacobian uses the finite-difference fallback.
class AlignedLibraryDenoiser final : public Denoiser {
 public:
  AlignedLibraryDenoiser(CorrelatedPrior prior, NoiseSchedule schedule, std::vector<Coords> components,
                         double spread);

  Coords denoise(const Coords& x, double t) const override;
  std::string name() const override { return "aligned-library"; }

  // The components superposed onto x / alpha_t.
  std::vector<Coords> aligned_components(const Coords& x, double t) const;

 private:
  CorrelatedPrior prior_;
  NoiseSchedule schedule_;
  std::vector<Coords> components_;
  double spread_;
};

// blend * target + (1 - blend) * x / alpha_t. A test harness for an idealized prior.
class OracleDenoiser final : public Denoiser {
 public:
  OracleDenoiser(Coords target, double blend, NoiseSchedule schedule);

  Coords denoise(const Coords& x, double t) const override;
  Coords jvp(const Coords& x, double t, const Coords& direction) const override;
  bool has_analytic_jvp() const override { return true; }
  std::string name() const override { return "oracle"; }

 private:
  Coords target_;
  double blend_;
  NoiseSchedule schedule_;
};

// Returns its input. Used by the echo server.
class EchoDenoiser final : public Denoiser {
 public:
  Coords denoise(const Coords& x, double) const override { return x; }
  std::string name() const override { return "echo"; }
};

// Returns zeros of the input shape.
class ZeroDenoiser final : public Denoiser {
 public:
  Coords denoise(const Coords& x, double) const override { return Coords::Zero(x.rows(), 3); }
  std::string name() const override { return "zeros"; }
};

// Tweedie score grad_x log p_t(x) = (R R^T)^{-1} (alpha_t x_hat - x) / (1 - alpha_t^2).
Coords tweedie_score(const CorrelatedPrior& prior, const NoiseSchedule& schedule,
                     const Coords& x, const Coords& x_hat, double t);

}  // namespace adp
