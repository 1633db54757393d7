#include "adp/error.hpp"
#include "adp/random.hpp"
#include "adp/solver.hpp"

#include <chrono>
#include <cmath>

namespace adp {

namespace {

using Clock = std::chrono::steady_clock;

// g = d/dx_hat ||y - M x_hat||^2 and the loss itself.
Coords measurement_gradient(const MaskedLinearMeasurement& meas, const Coords& x_hat, double* loss) {
  const Coords residual = meas.observed - meas.select(x_hat);
  if (loss) *loss = residual.squaredNorm();
  return -2.0 * meas.scatter(residual);
}

Coords guidance_from(const CorrelatedPrior& prior, const Denoiser& denoiser, const Coords& x_t,
                     double t, const Coords& g) {
  // J^T g = (R R^T)^{-1} J (R R^T g).
  const Coords cov_g = prior.apply(prior.apply_transpose(g));
  const Coords jv = denoiser.jvp(x_t, t, cov_g);
  return prior.apply_inverse_transpose(prior.apply_inverse(jv));
}

struct AncestralCoefficients {
  double keep;   // multiplies z_t
  double pull;   // multiplies z_hat0
  double noise;  // standard deviation
};

// Posterior q(z_s | z_t, z_0) for the variance-preserving process, s < t.
AncestralCoefficients ancestral(const NoiseSchedule& sched, double t, double s) {
  const double a_t = sched.alpha(t);
  const double a_s = sched.alpha(s);
  const double var_t = -std::expm1(-sched.integrated_beta(t));
  const double var_s = -std::expm1(-sched.integrated_beta(s));
  const double var_ts = -std::expm1(-(sched.integrated_beta(t) - sched.integrated_beta(s)));
  const double a_ts = a_t / a_s;
  AncestralCoefficients c;
  c.keep = a_ts * var_s / var_t;
  c.pull = a_s * var_ts / var_t;
  c.noise = std::sqrt(var_ts * var_s / var_t);
  return c;
}

RunReport ancestral_run(const SolverConfig& config, const CorrelatedPrior& prior,
                        const Denoiser& denoiser, const MaskedLinearLikelihood* guidance, double zeta) {
  config.validate();
  const int dim = prior.dim();
  const NoiseSchedule& sched = config.schedule;
  const int steps = sched.total_steps;
  const auto start = Clock::now();

  RunReport report;
  report.method = guidance ? "dps" : "unconditional";
  report.prior_scale = prior.scale();
  report.prior_decay = prior.decay();
  report.n_residues = prior.n_residues();
  report.schedule = sched;
  report.seed = config.seed;
  report.denoiser = denoiser.name();
  report.zeta = zeta;
  if (guidance) {
    require_shape(Coords::Zero(guidance->dim(), 3), dim, "DPS measurement");
    report.bindings.push_back({"linear", guidance->kind(), zeta, 0.0, 0, -1, std::nullopt});
  }

  report.replicas.resize(static_cast<std::size_t>(config.replicas));
  // Replicas run sequentially here; the per-iteration timing comparison wants them unshared.
  for (int r = 0; r < config.replicas; ++r) {
    ReplicaResult& res = report.replicas[static_cast<std::size_t>(r)];
    res.replica = r;
    const auto rep_start = Clock::now();
    try {
      Rng gen = make_stream(config.seed, static_cast<std::uint64_t>(r));
      Coords z = standard_normal(dim, gen);
      for (int epoch = 0; epoch < steps; ++epoch) {
        const double t = sched.time_at(epoch);
        const double s = sched.time_at(epoch + 1);
        const Coords x_t = prior.apply(z);
        const Coords x_hat = denoiser.denoise(x_t, t);
        if (x_hat.rows() != dim) throw ShapeError("denoiser returned the wrong number of rows");
        if (!x_hat.allFinite()) throw Error("non-finite denoiser output at epoch " + std::to_string(epoch));
        const Coords z_hat = prior.apply_inverse(x_hat);
        const AncestralCoefficients c = ancestral(sched, t, s);
        Coords z_next = c.keep * z + c.pull * z_hat;
        if (c.noise > 0.0) z_next += c.noise * standard_normal(dim, gen);
        if (guidance) {
          double loss = 0.0;
          const Coords g = measurement_gradient(guidance->measurement(), x_hat, &loss);
          const Coords grad_x = guidance_from(prior, denoiser, x_t, t, g);
          z_next -= zeta * prior.apply_inverse(grad_x);
          if (config.record_traces) res.trace.push_back({loss});
        }
        if (!z_next.allFinite()) throw Error("non-finite state at epoch " + std::to_string(epoch));
        z = std::move(z_next);
        res.iterations = epoch + 1;
      }
      res.z = z;
      res.x = prior.apply(z);
      if (guidance) {
        double loss = 0.0;
        measurement_gradient(guidance->measurement(), res.x, &loss);
        res.final_losses = {loss};
      }
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
    res.wall_seconds = std::chrono::duration<double>(Clock::now() - rep_start).count();
  }
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace

Coords dps_guidance_gradient(const CorrelatedPrior& prior, const Denoiser& denoiser,
                             const MaskedLinearMeasurement& meas, const Coords& x_t, double t) {
  require_shape(x_t, prior.dim(), "DPS iterate");
  const Coords g = measurement_gradient(meas, denoiser.denoise(x_t, t), nullptr);
  return guidance_from(prior, denoiser, x_t, t, g);
}

RunReport run_dps(const SolverConfig& config, const CorrelatedPrior& prior, const Denoiser& denoiser,
                  const MaskedLinearLikelihood& measurement, double zeta) {
  if (!std::isfinite(zeta) || zeta < 0.0) throw ConfigError("DPS step size must be finite and >= 0");
  return ancestral_run(config, prior, denoiser, &measurement, zeta);
}

RunReport sample_unconditional(const SolverConfig& config, const CorrelatedPrior& prior,
                               const Denoiser& denoiser) {
  return ancestral_run(config, prior, denoiser, nullptr, 0.0);
}

}  // namespace adp
