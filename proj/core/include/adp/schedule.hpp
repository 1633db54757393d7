#pragma once

#include "adp/chain.hpp"
#include "adp/prior.hpp"

#include <cstdint>

namespace adp {

enum class TimeSpacing { linear_time, sqrt_time };

// Variance-preserving schedule with beta_t linear in t on [0, 1]:
//   alpha_t = exp(-1/2 int_0^t beta_s ds),  sigma_t = sqrt(1 - alpha_t^2).
struct NoiseSchedule {
  TimeSpacing spacing = TimeSpacing::linear_time;
  int total_steps = 1000;
  double beta_min = 0.2;
  double beta_max = 20.0;

  double integrated_beta(double t) const;
  double alpha(double t) const;
  double sigma(double t) const;

  // Diffusion time used at optimizer step `step` in [0, total_steps]:
  // linear_time gives 1 - step/T, sqrt_time gives 1 - sqrt(step/T).
  double time_at(int step) const;

  void validate() const;
};

const char* to_string(TimeSpacing spacing);
TimeSpacing time_spacing_from_string(const char* name);

// One draw of x_t ~ N(alpha_t x0, sigma_t^2 R R^T), i.e. alpha_t x0 + sigma_t R w.
Coords forward_noise(const CorrelatedPrior& prior, const NoiseSchedule& schedule, const Coords& x0,
                     double t, std::uint64_t seed);

}  // namespace adp
