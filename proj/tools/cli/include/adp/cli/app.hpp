#pragma once

#include "adp/cli/config.hpp"

#include <adp/chain.hpp>
#include <adp/denoiser.hpp>
#include <adp/prior.hpp>
#include <adp/solver.hpp>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace adp::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kRuntimeError = 2 };

// Entry point shared by the adp binary and in-process tests. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Builds the stand-in or remote denoiser named by `spec.denoiser`. `target` is required for every
// kind except remote.
std::shared_ptr<const Denoiser> make_denoiser(const ExperimentSpec& spec, const CorrelatedPrior& prior,
                                              const BackboneChain* target);

// Subcommands. They throw ConfigError for invalid input and other adp::Error for runtime
// failures; the return value is the exit code when the run itself completes.
int cmd_complete(const ExperimentSpec& spec, std::ostream& out);
int cmd_distances(const ExperimentSpec& spec, std::ostream& out);
int cmd_refine(const ExperimentSpec& spec, std::ostream& out);
int cmd_simulate_map(const ExperimentSpec& spec, std::ostream& out);
int cmd_bench(const ExperimentSpec& spec, std::ostream& out);

struct ServeOptions {
  std::string model = "echo";  // echo | zeros | gaussian
  std::string mu_path;         // gaussian: the single component
  double spread = 0.0;
  std::string listen;          // empty: stdio; "tcp:PORT" (0 picks a free port)
  std::string port_file;       // tcp: write the bound port here
  int max_connections = 0;     // tcp: stop after this many connections (0 = forever)
};
int cmd_serve_echo(const ServeOptions& options, std::istream& in, std::ostream& out);

// No-prior convergence on a masked completion problem, one entry per optimizer variant.
struct ConvergenceResult {
  NoPriorVariant variant = NoPriorVariant::plain_gd;
  double learning_rate = 0.0;
  double momentum = 0.0;
  int iterations_to_threshold = -1;  // -1: not reached within the cap
  int iterations_run = 0;
  std::vector<double> relative_loss;  // raw misfit over its initial value, per iteration
};
std::vector<ConvergenceResult> preconditioning_study(const BackboneChain& target, const PriorParams& params,
                                                     int k, int max_iterations, double threshold,
                                                     double preconditioned_rate, double momentum);

// ADP and DPS on the same completion problem with the library denoiser.
struct DpsComparison {
  RunReport adp;
  RunReport dps;
  std::vector<double> adp_rmsd;
  std::vector<double> dps_rmsd;
};
DpsComparison adp_vs_dps(const BackboneChain& target, const PriorParams& params, int k, int steps,
                         int replicas, double zeta, int decoys, std::uint64_t seed);


}  // namespace adp::cli
