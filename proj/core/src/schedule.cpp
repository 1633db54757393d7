#include "adp/schedule.hpp"

#include "adp/error.hpp"
#include "adp/random.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace adp {

double NoiseSchedule::integrated_beta(double t) const {
  return beta_min * t + 0.5 * (beta_max - beta_min) * t * t;
}

double NoiseSchedule::alpha(double t) const { return std::exp(-0.5 * integrated_beta(t)); }

double NoiseSchedule::sigma(double t) const {
  // sigma^2 = 1 - exp(-B) computed with expm1 so that alpha^2 + sigma^2 = 1 to rounding.
  return std::sqrt(-std::expm1(-integrated_beta(t)));
}

double NoiseSchedule::time_at(int step) const {
  const double frac = static_cast<double>(step) / total_steps;
  return spacing == TimeSpacing::linear_time ? 1.0 - frac : 1.0 - std::sqrt(frac);
}

void NoiseSchedule::validate() const {
  if (total_steps < 1) throw ConfigError("schedule needs total_steps >= 1");
  if (!(beta_min > 0.0) || !(beta_max > 0.0) || beta_max < beta_min)
    throw ConfigError("schedule needs 0 < beta_min <= beta_max");
}

const char* to_string(TimeSpacing spacing) {
  return spacing == TimeSpacing::linear_time ? "linear" : "sqrt";
}

TimeSpacing time_spacing_from_string(const char* name) {
  if (std::strcmp(name, "linear") == 0) return TimeSpacing::linear_time;
  if (std::strcmp(name, "sqrt") == 0) return TimeSpacing::sqrt_time;
  throw ConfigError(std::string("unknown time schedule '") + name + "' (expected linear|sqrt)");
}

Coords forward_noise(const CorrelatedPrior& prior, const NoiseSchedule& schedule, const Coords& x0,
                     double t, std::uint64_t seed) {
  require_shape(x0, prior.dim(), "forward_noise x0");
  if (!(t >= 0.0 && t <= 1.0)) throw ShapeError("forward_noise: t must lie in [0, 1]");
  const double alpha = schedule.alpha(t);
  const double sigma = schedule.sigma(t);
  if (sigma == 0.0) return x0;
  Rng gen(seed);
  const Coords w = standard_normal(prior.dim(), gen);
  return alpha * x0 + sigma * prior.apply(w);
}

}  // namespace adp
