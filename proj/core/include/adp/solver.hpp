#pragma once

#include "adp/chain.hpp"
#include "adp/denoiser.hpp"
#include "adp/likelihood.hpp"
#include "adp/linear.hpp"
#include "adp/prior.hpp"
#include "adp/schedule.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace adp {

// Resolution cutoff held at `start` and then moved linearly to `end` over the last `epochs`
// epochs of the run.
struct ResolutionAnneal {
  double start = 5.0;
  double end = 1.5;
  int epochs = 1000;

  double at(int epoch, int total_steps) const;
};

// One likelihood term of the objective with its optimizer state parameters.
struct LikelihoodBinding {
  std::string name;
  std::shared_ptr<const Likelihood> likelihood;
  double learning_rate = 0.3;
  double momentum = 0.9;
  int epoch_start = 0;
  int epoch_end = -1;  // exclusive; -1 means the end of the run
  std::optional<ResolutionAnneal> anneal;

  bool active(int epoch, int total_steps) const;
  EvalContext context(int epoch, int total_steps) const;
  void validate(int dim) const;
};

struct SolverConfig {
  NoiseSchedule schedule;
  std::uint64_t seed = 0;
  int replicas = 1;
  int jobs = 0;  // 0 = hardware concurrency
  bool record_traces = true;

  void validate() const;
};

struct ReplicaResult {
  int replica = 0;
  bool ok = true;
  std::string error;       // diagnostic when !ok
  Coords z;                // final whitened state
  Coords x;                // final coordinates R z
  std::vector<double> final_losses;        // misfit (-loglik) per binding at the final state
  std::vector<std::vector<double>> trace;  // trace[epoch][binding] misfit
  int iterations = 0;
  double wall_seconds = 0.0;

  double total_final_loss() const;
};

struct BindingMetadata {
  std::string name;
  std::string kind;
  double learning_rate = 0.0;
  double momentum = 0.0;
  int epoch_start = 0;
  int epoch_end = -1;
  std::optional<ResolutionAnneal> anneal;
};

struct RunReport {
  std::string method;  // "adp", "dps", "unconditional" or a no-prior variant
  std::vector<ReplicaResult> replicas;
  std::vector<BindingMetadata> bindings;
  double prior_scale = 0.0;
  double prior_decay = 0.0;
  int n_residues = 0;
  NoiseSchedule schedule;
  std::uint64_t seed = 0;
  std::string denoiser;
  double wall_seconds = 0.0;
  double zeta = 0.0;  // DPS step size

  std::vector<std::string> binding_names() const;
  // Mean wall time per iteration across successful replicas.
  double seconds_per_iteration() const;
};

// Plug-and-play loop: per epoch, denoise at t, take one momentum step per active binding on
// the denoised iterate, renoise to the next time. z_init, when given, replaces the draw of
// z_T ~ N(0, I) for every replica; `z_inits` supplies one start per replica.
RunReport run_adp(const SolverConfig& config, const CorrelatedPrior& prior, const Denoiser& denoiser,
                  const std::vector<LikelihoodBinding>& bindings,
                  const std::optional<Coords>& z_init = std::nullopt);
RunReport run_adp(const SolverConfig& config, const CorrelatedPrior& prior, const Denoiser& denoiser,
                  const std::vector<LikelihoodBinding>& bindings, const std::vector<Coords>& z_inits);

// z_s = alpha_s z_hat + sigma_s w; returns z_hat unchanged when sigma_s = 0.
Coords renoise(const Coords& z_hat, double alpha, double sigma, Rng& gen);

enum class NoPriorVariant {
  plain_gd,                 // raw loss, no momentum
  momentum,                 // raw loss with momentum
  preconditioned,           // whitened loss, no momentum
  preconditioned_momentum,  // whitened loss with momentum
};

const char* to_string(NoPriorVariant v);
NoPriorVariant no_prior_variant_from_string(const std::string& name);

struct NoPriorOptions {
  NoPriorVariant variant = NoPriorVariant::preconditioned_momentum;
  int max_iterations = 1000;
  // Stop once the raw misfit falls to this fraction of its initial value (0 = never).
  double stop_relative_loss = 0.0;
  // Abort when the raw misfit exceeds this multiple of its initial value.
  double divergence_factor = 1e6;
};

// Gradient ascent on the summed log-likelihoods in z with no denoiser. Momentum variants use
// each binding's momentum; the others force it to zero. Traces record the raw misfit.
RunReport run_no_prior(const std::vector<LikelihoodBinding>& bindings, const CorrelatedPrior& prior,
                       const SolverConfig& config, const NoPriorOptions& options,
                       const std::optional<Coords>& z_init = std::nullopt);

// First iteration whose total misfit is <= fraction * initial, or -1.
int iterations_to_relative_loss(const ReplicaResult& replica, double fraction);

// Diffusion posterior sampling: ancestral reverse steps driven by the denoiser, each followed by
// x_s -= zeta * grad_{x_t} ||y - M x_hat(x_t)||^2 with the gradient taken through the denoiser.
RunReport run_dps(const SolverConfig& config, const CorrelatedPrior& prior, const Denoiser& denoiser,
                  const MaskedLinearLikelihood& measurement, double zeta);

// Ancestral reverse sampling with the same random stream as run_dps and no guidance.
RunReport sample_unconditional(const SolverConfig& config, const CorrelatedPrior& prior,
                               const Denoiser& denoiser);

// grad_{x_t} ||y - M x_hat(x_t, t)||^2, using x_hat's Jacobian Tweedie symmetry
// J^T = (R R^T)^{-1} J (R R^T) so that one JVP replaces a VJP.
Coords dps_guidance_gradient(const CorrelatedPrior& prior, const Denoiser& denoiser,
                             const MaskedLinearMeasurement& meas, const Coords& x_t, double t);

// Keeps the ceil(keep_fraction * n) replicas with the smallest data-fit misfit at their final
// state; ties go to the lower replica index; failed replicas rank last. Kept replicas stay in
// their original order.
RunReport filter_replicas(const RunReport& report, const Likelihood& data_fit, double keep_fraction,
                          const EvalContext& ctx = {});

void write_report_json(const RunReport& report, std::ostream& out, bool include_coords = false);
// Columns: replica,epoch,<binding misfits...>,total. Values printed with 17 significant digits.
void write_trace_csv(const RunReport& report, std::ostream& out);

}  // namespace adp
