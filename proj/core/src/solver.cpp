#include "adp/solver.hpp"

#include "adp/error.hpp"
#include "adp/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace adp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_finite(const Coords& m, const char* what, int epoch) {
  if (!m.allFinite())
    throw Error(std::string("non-finite ") + what + " at epoch " + std::to_string(epoch));
}

int resolve_jobs(int jobs, int work) {
  int n = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, work));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  const int workers = resolve_jobs(jobs, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

// Runs `body` for each replica, turning exceptions into failed replicas.
std::vector<ReplicaResult> run_replicas(const SolverConfig& config,
                                        const std::function<void(ReplicaResult&)>& body) {
  std::vector<ReplicaResult> results(static_cast<std::size_t>(config.replicas));
  parallel_for(config.replicas, config.jobs, [&](int r) {
    ReplicaResult& res = results[static_cast<std::size_t>(r)];
    res.replica = r;
    const auto start = Clock::now();
    try {
      body(res);
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
    res.wall_seconds = seconds_since(start);
  });
  return results;
}

RunReport make_report(const std::string& method, const SolverConfig& config,
                      const CorrelatedPrior& prior, const std::vector<LikelihoodBinding>& bindings,
                      const std::string& denoiser) {
  RunReport report;
  report.method = method;
  report.prior_scale = prior.scale();
  report.prior_decay = prior.decay();
  report.n_residues = prior.n_residues();
  report.schedule = config.schedule;
  report.seed = config.seed;
  report.denoiser = denoiser;
  for (const auto& b : bindings)
    report.bindings.push_back({b.name, b.likelihood->kind(), b.learning_rate, b.momentum,
                               b.epoch_start, b.epoch_end, b.anneal});
  return report;
}

std::vector<double> final_misfits(const std::vector<LikelihoodBinding>& bindings, const Coords& z,
                                  int total_steps) {
  std::vector<double> out;
  for (const auto& b : bindings)
    out.push_back(-b.likelihood->evaluate(z, b.context(std::max(0, total_steps - 1), total_steps)).loglik);
  return out;
}

}  // namespace

double ResolutionAnneal::at(int epoch, int total_steps) const {
  const int begin = total_steps - epochs;
  if (epochs <= 0 || epoch >= total_steps) return end;
  if (epoch < begin) return start;
  const double frac = static_cast<double>(epoch - begin) / std::max(1, epochs - 1);
  return start + (end - start) * std::min(1.0, frac);
}

bool LikelihoodBinding::active(int epoch, int total_steps) const {
  const int stop = epoch_end < 0 ? total_steps : epoch_end;
  return epoch >= epoch_start && epoch < stop;
}

EvalContext LikelihoodBinding::context(int epoch, int total_steps) const {
  EvalContext ctx;
  if (anneal) ctx.resolution = anneal->at(epoch, total_steps);
  return ctx;
}

void LikelihoodBinding::validate(int dim) const {
  if (!likelihood) throw ConfigError("binding '" + name + "' has no likelihood");
  if (likelihood->dim() != dim)
    throw ShapeError("binding '" + name + "' has dim " + std::to_string(likelihood->dim()) +
                     ", prior has " + std::to_string(dim));
  if (!(learning_rate >= 0.0)) throw ConfigError("binding '" + name + "': learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ConfigError("binding '" + name + "': momentum must lie in [0, 1)");
  if (epoch_end >= 0 && epoch_end < epoch_start)
    throw ConfigError("binding '" + name + "': activation window is empty");
}

void SolverConfig::validate() const {
  schedule.validate();
  if (replicas < 1) throw ConfigError("replica count must be >= 1");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
}

double ReplicaResult::total_final_loss() const {
  return std::accumulate(final_losses.begin(), final_losses.end(), 0.0);
}

std::vector<std::string> RunReport::binding_names() const {
  std::vector<std::string> out;
  for (const auto& b : bindings) out.push_back(b.name);
  return out;
}

double RunReport::seconds_per_iteration() const {
  double seconds = 0.0;
  long iterations = 0;
  for (const auto& r : replicas) {
    if (!r.ok) continue;
    seconds += r.wall_seconds;
    iterations += r.iterations;
  }
  return iterations > 0 ? seconds / static_cast<double>(iterations) : 0.0;
}

Coords renoise(const Coords& z_hat, double alpha, double sigma, Rng& gen) {
  if (sigma == 0.0) return alpha == 1.0 ? z_hat : Coords(alpha * z_hat);
  return alpha * z_hat + sigma * standard_normal(static_cast<int>(z_hat.rows()), gen);
}

RunReport run_adp(const SolverConfig& config, const CorrelatedPrior& prior, const Denoiser& denoiser,
                  const std::vector<LikelihoodBinding>& bindings, const std::optional<Coords>& z_init) {
  std::vector<Coords> inits;
  if (z_init) inits.assign(static_cast<std::size_t>(std::max(1, config.replicas)), *z_init);
  return run_adp(config, prior, denoiser, bindings, inits);
}

RunReport run_adp(const SolverConfig& config, const CorrelatedPrior& prior, const Denoiser& denoiser,
                  const std::vector<LikelihoodBinding>& bindings, const std::vector<Coords>& z_inits) {
  config.validate();
  const int dim = prior.dim();
  for (const auto& b : bindings) b.validate(dim);
  if (!z_inits.empty() && static_cast<int>(z_inits.size()) != config.replicas)
    throw ConfigError("need one initial state per replica");
  for (const auto& z : z_inits) require_shape(z, dim, "initial state");

  const auto start = Clock::now();
  RunReport report = make_report("adp", config, prior, bindings, denoiser.name());
  const NoiseSchedule& sched = config.schedule;
  const int steps = sched.total_steps;
  const std::size_t nb = bindings.size();

  report.replicas = run_replicas(config, [&](ReplicaResult& res) {
    Rng gen = make_stream(config.seed, static_cast<std::uint64_t>(res.replica));
    Coords z = z_inits.empty() ? standard_normal(dim, gen) : z_inits[static_cast<std::size_t>(res.replica)];
    std::vector<Coords> velocity(nb, Coords::Zero(dim, 3));
    if (config.record_traces) res.trace.reserve(static_cast<std::size_t>(steps));
    for (int epoch = 0; epoch < steps; ++epoch) {
      const double t = sched.time_at(epoch);
      const Coords x_hat = denoiser.denoise(prior.apply(z), t);
      if (x_hat.rows() != dim) throw ShapeError("denoiser returned the wrong number of rows");
      require_finite(x_hat, "denoiser output", epoch);
      const Coords z_tilde = prior.apply_inverse(x_hat);
      Coords z_hat = z_tilde;
      std::vector<double> row(nb, 0.0);
      for (std::size_t i = 0; i < nb; ++i) {
        const auto& b = bindings[i];
        const bool active = b.active(epoch, steps);
        if (!active && !config.record_traces) continue;
        const Evaluation ev = b.likelihood->evaluate(z_tilde, b.context(epoch, steps));
        if (!std::isfinite(ev.loglik)) throw Error("non-finite loss in '" + b.name + "' at epoch " + std::to_string(epoch));
        row[i] = -ev.loglik;
        if (!active) continue;
        require_finite(ev.grad, "likelihood gradient", epoch);
        velocity[i] = b.momentum * velocity[i] + b.learning_rate * ev.grad;
        z_hat += velocity[i];
      }
      if (config.record_traces) res.trace.push_back(std::move(row));
      const double t_next = sched.time_at(epoch + 1);
      z = renoise(z_hat, sched.alpha(t_next), sched.sigma(t_next), gen);
      require_finite(z, "state", epoch);
      res.iterations = epoch + 1;
    }
    res.z = z;
    res.x = prior.apply(z);
    res.final_losses = final_misfits(bindings, z, steps);
  });
  report.wall_seconds = seconds_since(start);
  return report;
}

const char* to_string(NoPriorVariant v) {
  switch (v) {
    case NoPriorVariant::plain_gd: return "plain_gd";
    case NoPriorVariant::momentum: return "momentum";
    case NoPriorVariant::preconditioned: return "preconditioned";
    case NoPriorVariant::preconditioned_momentum: return "preconditioned_momentum";
  }
  return "?";
}

NoPriorVariant no_prior_variant_from_string(const std::string& name) {
  for (auto v : {NoPriorVariant::plain_gd, NoPriorVariant::momentum, NoPriorVariant::preconditioned,
                 NoPriorVariant::preconditioned_momentum})
    if (name == to_string(v)) return v;
  throw ConfigError("unknown no-prior variant '" + name + "'");
}

RunReport run_no_prior(const std::vector<LikelihoodBinding>& bindings, const CorrelatedPrior& prior,
                       const SolverConfig& config, const NoPriorOptions& options,
                       const std::optional<Coords>& z_init) {
  config.validate();
  if (bindings.empty()) throw ConfigError("run_no_prior needs at least one binding");
  const int dim = prior.dim();
  for (const auto& b : bindings) b.validate(dim);
  if (z_init) require_shape(*z_init, dim, "initial state");
  if (options.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");

  const bool use_momentum = options.variant == NoPriorVariant::momentum ||
                            options.variant == NoPriorVariant::preconditioned_momentum;
  const bool preconditioned = options.variant == NoPriorVariant::preconditioned ||
                              options.variant == NoPriorVariant::preconditioned_momentum;
  const auto start = Clock::now();
  RunReport report = make_report(to_string(options.variant), config, prior, bindings, "none");
  const int iters = options.max_iterations;
  const std::size_t nb = bindings.size();

  report.replicas = run_replicas(config, [&](ReplicaResult& res) {
    Rng gen = make_stream(config.seed, static_cast<std::uint64_t>(res.replica));
    Coords z = z_init ? *z_init : standard_normal(dim, gen);
    std::vector<Coords> velocity(nb, Coords::Zero(dim, 3));
    double initial = -1.0;
    if (iters == 0) {
      res.z = z;
      res.x = prior.apply(z);
      res.final_losses = final_misfits(bindings, z, 1);
      return;
    }
    for (int it = 0; it <= iters; ++it) {
      std::vector<Evaluation> evals(nb);
      std::vector<double> row(nb, 0.0);
      double total = 0.0;
      for (std::size_t i = 0; i < nb; ++i) {
        EvalContext ctx = bindings[i].context(std::min(it, std::max(0, iters - 1)), std::max(1, iters));
        ctx.preconditioned = false;
        Evaluation raw = bindings[i].likelihood->evaluate(z, ctx);
        row[i] = -raw.loglik;
        total += row[i];
        if (preconditioned) {
          ctx.preconditioned = true;
          evals[i] = bindings[i].likelihood->evaluate(z, ctx);
        } else {
          evals[i] = std::move(raw);
        }
      }
      if (!std::isfinite(total)) throw Error("non-finite loss at iteration " + std::to_string(it));
      res.trace.push_back(row);
      if (initial < 0.0) initial = total;
      res.iterations = it;
      if (total > options.divergence_factor * std::max(initial, std::numeric_limits<double>::min()))
        throw DivergenceError("diverged at iteration " + std::to_string(it) + ": loss " +
                              std::to_string(total) + " vs initial " + std::to_string(initial));
      if (options.stop_relative_loss > 0.0 && total <= options.stop_relative_loss * initial) break;
      if (it == iters) break;
      for (std::size_t i = 0; i < nb; ++i) {
        const auto& b = bindings[i];
        if (!b.active(it, iters)) continue;
        require_finite(evals[i].grad, "likelihood gradient", it);
        const double rho = use_momentum ? b.momentum : 0.0;
        velocity[i] = rho * velocity[i] + b.learning_rate * evals[i].grad;
        z += velocity[i];
      }
    }
    res.z = z;
    res.x = prior.apply(z);
    res.final_losses = res.trace.back();
  });
  report.wall_seconds = seconds_since(start);
  return report;
}

int iterations_to_relative_loss(const ReplicaResult& replica, double fraction) {
  if (replica.trace.empty()) return -1;
  auto total = [](const std::vector<double>& row) { return std::accumulate(row.begin(), row.end(), 0.0); };
  const double initial = total(replica.trace.front());
  for (std::size_t e = 0; e < replica.trace.size(); ++e)
    if (total(replica.trace[e]) <= fraction * initial) return static_cast<int>(e);
  return -1;
}

RunReport filter_replicas(const RunReport& report, const Likelihood& data_fit, double keep_fraction,
                          const EvalContext& ctx) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw ConfigError("keep_fraction must lie in (0, 1]");
  const std::size_t n = report.replicas.size();
  std::vector<double> misfit(n, std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rep = report.replicas[r];
    if (!rep.ok) continue;
    const double m = -data_fit.evaluate(rep.z, ctx).loglik;
    if (std::isfinite(m)) misfit[r] = m;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return misfit[a] < misfit[b]; });
  const auto keep = static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(n) - 1e-9));
  order.resize(std::min(n, keep));
  std::sort(order.begin(), order.end());
  RunReport out = report;
  out.replicas.clear();
  for (std::size_t r : order) out.replicas.push_back(report.replicas[r]);
  return out;
}

namespace {

nlohmann::json coords_json(const Coords& x) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < x.rows(); ++i) rows.push_back({x(i, 0), x(i, 1), x(i, 2)});
  return rows;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_report_json(const RunReport& report, std::ostream& out, bool include_coords) {
  nlohmann::json j;
  j["method"] = report.method;
  j["denoiser"] = report.denoiser;
  j["seed"] = report.seed;
  j["n_residues"] = report.n_residues;
  j["prior"] = {{"a", report.prior_scale}, {"b", report.prior_decay}};
  j["schedule"] = {{"spacing", to_string(report.schedule.spacing)},
                   {"total_steps", report.schedule.total_steps},
                   {"beta_min", report.schedule.beta_min},
                   {"beta_max", report.schedule.beta_max}};
  if (report.method == "dps") j["zeta"] = report.zeta;
  nlohmann::json bindings = nlohmann::json::array();
  for (const auto& b : report.bindings) {
    nlohmann::json jb = {{"name", b.name},          {"kind", b.kind},
                         {"learning_rate", b.learning_rate}, {"momentum", b.momentum},
                         {"epoch_start", b.epoch_start}, {"epoch_end", b.epoch_end}};
    if (b.anneal)
      jb["anneal"] = {{"start", b.anneal->start}, {"end", b.anneal->end}, {"epochs", b.anneal->epochs}};
    bindings.push_back(jb);
  }
  j["bindings"] = bindings;
  j["wall_seconds"] = report.wall_seconds;
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : report.replicas) {
    nlohmann::json jr = {{"replica", r.replica},
                         {"ok", r.ok},
                         {"iterations", r.iterations},
                         {"wall_seconds", r.wall_seconds},
                         {"final_losses", r.final_losses}};
    if (!r.ok) jr["error"] = r.error;
    if (include_coords && r.ok) jr["x"] = coords_json(r.x);
    reps.push_back(jr);
  }
  j["replicas"] = reps;
  out << j.dump(2) << '\n';
}

void write_trace_csv(const RunReport& report, std::ostream& out) {
  out << "replica,epoch";
  for (const auto& b : report.bindings) out << ',' << b.name;
  out << ",total\n";
  for (const auto& r : report.replicas) {
    for (std::size_t e = 0; e < r.trace.size(); ++e) {
      out << r.replica << ',' << e;
      double total = 0.0;
      for (double v : r.trace[e]) {
        out << ',' << format_double(v);
        total += v;
      }
      out << ',' << format_double(total) << '\n';
    }
  }
}

}  // namespace adp
