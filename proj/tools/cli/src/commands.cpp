#include "adp/cli/app.hpp"

#include <adp/density.hpp>
#include <adp/distance.hpp>
#include <adp/error.hpp>
#include <adp/linear.hpp>
#include <adp/metrics.hpp>
#include <adp/mrc.hpp>
#include <adp/pdb.hpp>
#include <adp/remote.hpp>
#include <adp/sampling.hpp>
#include <adp/solver.hpp>
#include <adp/synthetic.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace adp::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path prepare_output(const ExperimentSpec& spec) {
  const fs::path dir(spec.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

BackboneChain load_chain(const std::string& path, const char* key) {
  if (path.empty()) throw ConfigError(std::string("missing required key '") + key + "'");
  if (!fs::exists(path)) throw ConfigError(std::string(key) + ": file not found: " + path);
  return read_backbone(path);
}

SolverConfig solver_config(const ExperimentSpec& spec) {
  SolverConfig cfg;
  cfg.schedule = spec.schedule;
  cfg.seed = spec.seed;
  cfg.replicas = spec.replicas;
  cfg.jobs = spec.jobs;
  return cfg;
}

template <class Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_file_atomic(path.string(), ss.str());
}

// Full chain carrying the target's residue metadata and the solver's coordinates.
BackboneChain solved_chain(const BackboneChain& like, const Coords& x) {
  BackboneChain out = like;
  out.coords = x;
  std::fill(out.present.begin(), out.present.end(), std::uint8_t{1});
  return out;
}

void write_common(const fs::path& dir, const RunReport& report) {
  write_stream(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(report, o); });
  write_stream(dir / "report.json", [&](std::ostream& o) { write_report_json(report, o); });
}

int exit_for(const RunReport& report) {
  int failed = 0;
  for (const auto& r : report.replicas)
    if (!r.ok) {
      ++failed;
      spdlog::error("replica {} failed: {}", r.replica, r.error);
    }
  return failed > 0 ? kRuntimeError : kSuccess;
}

void add_best(std::vector<MetricRecord>& records, const std::string& task) {
  const MetricRecord* best = nullptr;
  for (const auto& r : records)
    if (!best || r.rmsd < best->rmsd) best = &r;
  if (best) {
    MetricRecord b = *best;
    b.replica = "best";
    b.task = task;
    records.push_back(b);
  }
}

DistanceSet read_pairs(const std::string& path, int n_residues) {
  std::ifstream in(path);
  if (!in) throw ConfigError("distances.pairs: cannot read " + path);
  DistanceSet d;
  d.n_residues = n_residues;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("i,", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    int i = 0;
    int j = 0;
    double len = 0.0;
    if (!(ls >> i >> j >> len)) throw ConfigError("distances.pairs line " + std::to_string(line_no) + " is malformed");
    d.pairs.emplace_back(i, j);
    d.measured.push_back(len);
  }
  try {
    d.validate();
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("distances.pairs: ") + e.what());
  }
  return d;
}

// Re-expresses `chain` on the residue numbering of `like`; residues it lacks become absent.
BackboneChain renumber_onto(const BackboneChain& chain, const BackboneChain& like) {
  BackboneChain out = like;
  out.coords.setZero();
  std::fill(out.present.begin(), out.present.end(), std::uint8_t{0});
  for (int r = 0; r < chain.n_residues; ++r) {
    const int number = chain.residue_numbers[static_cast<std::size_t>(r)];
    const auto it = std::find(like.residue_numbers.begin(), like.residue_numbers.end(), number);
    if (it == like.residue_numbers.end()) {
      if (chain.residue_present(r))
        throw ConfigError("partial model residue " + std::to_string(number) + " is not in the target");
      continue;
    }
    const int dst = static_cast<int>(it - like.residue_numbers.begin());
    for (int a = 0; a < kAtomsPerResidue; ++a) {
      out.coords.row(kAtomsPerResidue * dst + a) = chain.coords.row(kAtomsPerResidue * r + a);
      out.present[static_cast<std::size_t>(kAtomsPerResidue * dst + a)] =
          chain.present[static_cast<std::size_t>(kAtomsPerResidue * r + a)];
    }
  }
  return out;
}

DensityMap fitted_grid(const BackboneChain& chain, double voxel, double padding, int size) {
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (int row = 0; row < chain.dim(); ++row) {
    if (!chain.present[static_cast<std::size_t>(row)]) continue;
    lo = lo.cwiseMin(chain.coords.row(row).transpose());
    hi = hi.cwiseMax(chain.coords.row(row).transpose());
  }
  if (!lo.allFinite()) throw ConfigError("chain has no present atoms to render");
  const double extent = (hi - lo).maxCoeff() + 2.0 * padding;
  const int d = size > 0 ? size : fft_friendly_size(std::max(2, static_cast<int>(std::ceil(extent / voxel)) + 1));
  const Eigen::Vector3d centre = 0.5 * (lo + hi);
  const Eigen::Vector3d origin = centre - 0.5 * (d - 1) * voxel * Eigen::Vector3d::Ones();
  return DensityMap::zeros(d, voxel, origin);
}

}  // namespace

std::shared_ptr<const Denoiser> make_denoiser(const ExperimentSpec& spec, const CorrelatedPrior& prior,
                                              const BackboneChain* target) {
  const auto& d = spec.denoiser;
  if (d.kind == "remote")
    return connect_remote_denoiser(d.address, prior.dim(), std::chrono::milliseconds(d.timeout_ms));
  if (!target) throw ConfigError("the " + d.kind + " denoiser needs 'target'");
  if (target->dim() != prior.dim()) throw ConfigError("target length does not match the prior");
  if (d.kind == "oracle") return std::make_shared<OracleDenoiser>(target->coords, d.blend, spec.schedule);
  std::vector<Coords> components{target->coords};
  if (d.kind == "library") {
    for (const auto& decoy : decoy_library(*target, d.decoys, spec.seed ^ 0xd1b54a32d192ed03ULL))
      components.push_back(decoy.coords);
    for (const auto& path : d.library) {
      const BackboneChain extra = load_chain(path, "denoiser.library");
      if (extra.dim() != prior.dim())
        throw ConfigError("denoiser.library: " + path + " has a different residue count");
      components.push_back(extra.coords);
    }
  } else if (d.kind != "gaussian") {
    throw ConfigError("unknown denoiser kind '" + d.kind + "'");
  }
  if (d.align == "rigid") return std::make_shared<AlignedLibraryDenoiser>(prior, spec.schedule, std::move(components), d.spread);
  return std::make_shared<GaussianLibraryDenoiser>(prior, spec.schedule, std::move(components), d.spread);
}

int cmd_complete(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const BackboneChain target = load_chain(spec.target_path, "target");
  const fs::path dir = prepare_output(spec);
  const CorrelatedPrior prior = CorrelatedPrior::calibrated(target.n_residues, spec.prior);
  const MaskedLinearMeasurement meas =
      observe(target, sample_mask(target.n_residues, spec.complete.k), spec.complete.k);
  auto lik = std::make_shared<MaskedLinearLikelihood>(prior, meas);
  const std::vector<LikelihoodBinding> bindings{
      {"linear", lik, spec.complete.learning_rate, spec.complete.momentum, 0, -1, std::nullopt}};
  const auto denoiser = make_denoiser(spec, prior, &target);
  const RunReport report = run_adp(solver_config(spec), prior, *denoiser, bindings);

  // RMSD over residues that were not observed, when any remain.
  BackboneChain scored = target;
  for (int r = 0; r < target.n_residues; r += spec.complete.k)
    for (int a = 0; a < kAtomsPerResidue; ++a) scored.present[static_cast<std::size_t>(kAtomsPerResidue * r + a)] = 0;
  if (scored.count_present_residues() == 0) scored = target;
  int target_ca = 0;
  int scored_ca = 0;
  for (int r = 0; r < target.n_residues; ++r) {
    target_ca += target.present[static_cast<std::size_t>(atom_row(r, BackboneAtom::CA))];
    scored_ca += scored.present[static_cast<std::size_t>(atom_row(r, BackboneAtom::CA))];
  }
  std::vector<MetricRecord> records;
  for (const auto& r : report.replicas) {
    if (!r.ok) continue;
    const BackboneChain pred = solved_chain(target, r.x);
    write_backbone(pred, (dir / ("replica_" + std::to_string(r.replica) + ".pdb")).string());
    records.push_back({std::to_string(r.replica), "complete", rmsd(pred, scored), static_cast<double>(scored_ca) / target_ca,
                       r.total_final_loss()});
  }
  add_best(records, "complete");
  write_stream(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(records, o); });
  write_common(dir, report);
  if (!records.empty()) out << "best rmsd " << num(records.back().rmsd) << " A over " << report.replicas.size() << " replicas\n";
  return exit_for(report);
}

int cmd_distances(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const BackboneChain target = load_chain(spec.target_path, "target");
  const fs::path dir = prepare_output(spec);
  const CorrelatedPrior prior = CorrelatedPrior::calibrated(target.n_residues, spec.prior);
  DistanceSet distances = spec.distances.pairs_path.empty()
                              ? sample_distances(target, spec.distances.m, spec.seed)
                              : read_pairs(spec.distances.pairs_path, target.n_residues);
  std::vector<LikelihoodBinding> bindings;
  if (distances.count() > 0) {
    const double lr = spec.distances.learning_rate.value_or(200.0 / distances.count());
    bindings.push_back({"distance", std::make_shared<DistanceLikelihood>(prior, distances), lr,
                        spec.distances.momentum, 0, -1, std::nullopt});
  }
  write_stream(dir / "pairs.csv", [&](std::ostream& o) {
    o << "i,j,distance\n";
    for (int p = 0; p < distances.count(); ++p)
      o << distances.pairs[static_cast<std::size_t>(p)].first << ',' << distances.pairs[static_cast<std::size_t>(p)].second
        << ',' << num(distances.measured[static_cast<std::size_t>(p)]) << '\n';
  });
  const auto denoiser = make_denoiser(spec, prior, &target);
  const RunReport report = run_adp(solver_config(spec), prior, *denoiser, bindings);

  std::vector<MetricRecord> records;
  Json mirror = Json::array();
  for (const auto& r : report.replicas) {
    if (!r.ok) continue;
    const BackboneChain pred = solved_chain(target, r.x);
    write_backbone(pred, (dir / ("replica_" + std::to_string(r.replica) + ".pdb")).string());
    const RmsdResult res = rmsd_detail(pred, target, AtomSelection::ca_only, Alignment::rigid);
    if (res.mirror_better)
      spdlog::warn("replica {}: the mirror image fits better ({:.3f} vs {:.3f} A)", r.replica, res.mirror_rmsd, res.rmsd);
    mirror.push_back({{"replica", r.replica}, {"rmsd", res.rmsd}, {"mirror_rmsd", res.mirror_rmsd},
                      {"mirror_better", res.mirror_better}});
    records.push_back({std::to_string(r.replica), "distances", res.rmsd, 1.0, r.total_final_loss()});
  }
  add_best(records, "distances");
  write_stream(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(records, o); });
  write_stream(dir / "chirality.json", [&](std::ostream& o) { o << mirror.dump(2) << '\n'; });
  write_common(dir, report);
  if (!records.empty()) out << "best rigid rmsd " << num(records.back().rmsd) << " A over " << report.replicas.size() << " replicas\n";
  return exit_for(report);
}

int cmd_refine(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const auto& rs = spec.refine;
  if (!fs::exists(rs.map_path)) throw ConfigError("refine.map: file not found: " + rs.map_path);
  DensityMap map;
  try {
    map = read_mrc(rs.map_path);
  } catch (const FormatError& e) {
    throw ConfigError(std::string("refine.map: ") + e.what());
  }
  if (rs.grid_size && *rs.grid_size != map.size)
    throw ConfigError("refine.grid.size " + std::to_string(*rs.grid_size) + " does not match the map (" +
                      std::to_string(map.size) + ")");
  if (rs.grid_voxel && std::abs(*rs.grid_voxel - map.voxel_size) > 1e-4)
    throw ConfigError("refine.grid.voxel does not match the map voxel size " + num(map.voxel_size));
  if (rs.grid_origin) {
    const Eigen::Vector3d o((*rs.grid_origin)[0], (*rs.grid_origin)[1], (*rs.grid_origin)[2]);
    if ((o - map.origin).cwiseAbs().maxCoeff() > 1e-3) throw ConfigError("refine.grid.origin does not match the map origin");
  }
  BackboneChain partial = load_chain(rs.partial_path, "refine.partial");
  std::optional<BackboneChain> target;
  if (!spec.target_path.empty()) {
    target = load_chain(spec.target_path, "target");
    partial = renumber_onto(partial, *target);
  }
  const double resolution = map.resolution > 0.0 ? map.resolution : rs.anneal_end;
  const AtomSpec atoms = AtomSpec::backbone(std::vector<std::uint8_t>(static_cast<std::size_t>(partial.dim()), 1),
                                            resolution, rs.blur);
  {
    // The partial model must sit inside the map box.
    const double margin = atoms.cutoff();
    const double extent = (map.size - 1) * map.voxel_size;
    for (int row = 0; row < partial.dim(); ++row) {
      if (!partial.present[static_cast<std::size_t>(row)]) continue;
      const Eigen::Vector3d rel = partial.coords.row(row).transpose() - map.origin;
      if ((rel.array() < -margin).any() || (rel.array() > extent + margin).any())
        throw ConfigError("partial model atom row " + std::to_string(row) + " lies outside the map grid");
    }
  }
  const fs::path dir = prepare_output(spec);
  const CorrelatedPrior prior = CorrelatedPrior::calibrated(partial.n_residues, spec.prior);
  const BandFilter filter = rs.filter == "smooth" ? BandFilter::smooth : BandFilter::sharp;
  auto density = std::make_shared<DensityLikelihood>(prior, map, atoms, filter);
  const std::vector<LikelihoodBinding> bindings{
      {"model", std::make_shared<MaskedLinearLikelihood>(prior, observe_present(partial)), rs.learning_rate_map,
       rs.momentum, 0, -1, std::nullopt},
      {"density", density, rs.learning_rate_density, rs.momentum, 0, -1,
       ResolutionAnneal{rs.anneal_start, rs.anneal_end, rs.anneal_epochs}}};
  const auto denoiser = make_denoiser(spec, prior, target ? &*target : nullptr);
  const RunReport full = run_adp(solver_config(spec), prior, *denoiser, bindings);
  EvalContext final_ctx;
  final_ctx.resolution = rs.anneal_end;
  const RunReport report = filter_replicas(full, *density, rs.keep_fraction, final_ctx);

  std::vector<MetricRecord> records;
  std::vector<std::pair<std::string, std::vector<CompletenessPoint>>> curves;
  if (target) curves.emplace_back("input", rmsd_vs_completeness(partial, *target));
  for (const auto& r : report.replicas) {
    if (!r.ok) continue;
    const BackboneChain pred = solved_chain(target ? *target : partial, r.x);
    write_backbone(pred, (dir / ("replica_" + std::to_string(r.replica) + ".pdb")).string());
    const double misfit = -density->evaluate(r.z, final_ctx).loglik;
    if (target) {
      records.push_back({std::to_string(r.replica), "refine", rmsd(pred, *target), 1.0, misfit});
      curves.emplace_back("replica_" + std::to_string(r.replica), rmsd_vs_completeness(pred, *target));
    } else {
      records.push_back({std::to_string(r.replica), "refine", std::nan(""), 1.0, misfit});
    }
  }
  if (target) add_best(records, "refine");
  write_stream(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(records, o); });
  if (target) write_stream(dir / "completeness.csv", [&](std::ostream& o) { write_completeness_csv(curves, o); });
  write_common(dir, report);
  out << "kept " << report.replicas.size() << " of " << full.replicas.size() << " replicas\n";
  return exit_for(full);
}

int cmd_simulate_map(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const BackboneChain chain = load_chain(spec.target_path, "target");
  const fs::path dir = prepare_output(spec);
  const auto& ss = spec.simulate;
  const DensityMap grid = fitted_grid(chain, ss.voxel, ss.padding, ss.size);
  DensityMap map = render_density(chain.coords, AtomSpec::backbone(chain.present, ss.resolution, ss.blur), grid);
  if (ss.noise > 0.0) {
    Rng gen = make_stream(spec.seed, 0);
    NormalSampler normal;
    for (double& v : map.values) v += ss.noise * normal(gen);
  }
  const fs::path target = fs::path(ss.output).is_absolute() ? fs::path(ss.output) : dir / ss.output;
  write_mrc(map, target.string());
  out << "wrote " << target.string() << " (" << map.size << "^3 voxels of " << num(map.voxel_size) << " A)\n";
  return kSuccess;
}

std::vector<ConvergenceResult> preconditioning_study(const BackboneChain& target, const PriorParams& params,
                                                     int k, int max_iterations, double threshold,
                                                     double preconditioned_rate, double momentum) {
  const CorrelatedPrior prior = CorrelatedPrior::calibrated(target.n_residues, params);
  const MaskedLinearMeasurement meas = observe(target, sample_mask(target.n_residues, k), k);
  auto lik = std::make_shared<MaskedLinearLikelihood>(prior, meas);
  const double s_max = lik->max_singular_value();
  const double raw_rate = 1.0 / (s_max * s_max);
  SolverConfig cfg;
  cfg.replicas = 1;
  cfg.jobs = 1;
  const Coords z0 = Coords::Zero(prior.dim(), 3);
  std::vector<ConvergenceResult> out;
  for (auto variant : {NoPriorVariant::plain_gd, NoPriorVariant::momentum, NoPriorVariant::preconditioned,
                       NoPriorVariant::preconditioned_momentum}) {
    const bool pre = variant == NoPriorVariant::preconditioned || variant == NoPriorVariant::preconditioned_momentum;
    const bool mom = variant == NoPriorVariant::momentum || variant == NoPriorVariant::preconditioned_momentum;
    ConvergenceResult res;
    res.variant = variant;
    res.learning_rate = pre ? preconditioned_rate : raw_rate;
    res.momentum = mom ? momentum : 0.0;
    const std::vector<LikelihoodBinding> bindings{{"linear", lik, res.learning_rate, res.momentum, 0, -1, std::nullopt}};
    NoPriorOptions opts;
    opts.variant = variant;
    opts.max_iterations = max_iterations;
    opts.stop_relative_loss = threshold;
    const RunReport report = run_no_prior(bindings, prior, cfg, opts, z0);
    const ReplicaResult& rep = report.replicas.front();
    if (!rep.ok) spdlog::warn("{} stopped early: {}", to_string(variant), rep.error);
    res.iterations_to_threshold = iterations_to_relative_loss(rep, threshold);
    res.iterations_run = rep.iterations;
    const double initial = rep.trace.empty() ? 0.0 : rep.trace.front().front();
    for (const auto& row : rep.trace) res.relative_loss.push_back(initial > 0.0 ? row.front() / initial : 0.0);
    out.push_back(std::move(res));
  }
  return out;
}

DpsComparison adp_vs_dps(const BackboneChain& target, const PriorParams& params, int k, int steps,
                         int replicas, double zeta, int decoys, std::uint64_t seed) {
  const CorrelatedPrior prior = CorrelatedPrior::calibrated(target.n_residues, params);
  const MaskedLinearMeasurement meas = observe(target, sample_mask(target.n_residues, k), k);
  const MaskedLinearLikelihood lik(prior, meas);
  ExperimentSpec spec;
  spec.seed = seed;
  spec.denoiser.kind = "library";
  spec.denoiser.decoys = decoys;
  spec.schedule.total_steps = std::max(1, steps);
  const auto denoiser = make_denoiser(spec, prior, &target);
  SolverConfig cfg;
  cfg.schedule = spec.schedule;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.jobs = 1;
  DpsComparison out;
  const std::vector<LikelihoodBinding> bindings{
      {"linear", std::make_shared<MaskedLinearLikelihood>(prior, meas), 0.3, 0.9, 0, -1, std::nullopt}};
  out.adp = run_adp(cfg, prior, *denoiser, bindings);
  out.dps = run_dps(cfg, prior, *denoiser, lik, zeta);
  for (const auto& r : out.adp.replicas) out.adp_rmsd.push_back(r.ok ? rmsd(solved_chain(target, r.x), target) : NAN);
  for (const auto& r : out.dps.replicas) out.dps_rmsd.push_back(r.ok ? rmsd(solved_chain(target, r.x), target) : NAN);
  return out;
}

int cmd_bench(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const auto& b = spec.bench;
  const fs::path dir = prepare_output(spec);
  const BackboneChain target = spec.target_path.empty() ? synthetic_backbone(b.n_residues, spec.seed)
                                                        : load_chain(spec.target_path, "target");
  const auto study = preconditioning_study(target, spec.prior, b.k, b.steps, b.stop_relative_loss,
                                           b.preconditioned_rate, b.momentum);
  write_stream(dir / "convergence.csv", [&](std::ostream& o) {
    o << "variant,iteration,relative_loss\n";
    for (const auto& r : study)
      for (std::size_t i = 0; i < r.relative_loss.size(); ++i)
        if (i < 200 || i % 100 == 0 || i + 1 == r.relative_loss.size())
          o << to_string(r.variant) << ',' << i << ',' << num(r.relative_loss[i]) << '\n';
  });
  write_stream(dir / "convergence_summary.csv", [&](std::ostream& o) {
    o << "variant,learning_rate,momentum,iterations_to_threshold,iterations_run\n";
    for (const auto& r : study)
      o << to_string(r.variant) << ',' << num(r.learning_rate) << ',' << num(r.momentum) << ','
        << r.iterations_to_threshold << ',' << r.iterations_run << '\n';
  });
  for (const auto& r : study)
    out << to_string(r.variant) << ": " << (r.iterations_to_threshold < 0 ? std::string("not reached")
                                                                          : std::to_string(r.iterations_to_threshold))
        << " iterations to " << num(b.stop_relative_loss) << '\n';

  Json timing = Json::object();
  if (b.dps_steps > 0) {
    const BackboneChain dps_target = synthetic_backbone(b.dps_residues, spec.seed + 1);
    const DpsComparison cmp = adp_vs_dps(dps_target, spec.prior, b.k, b.dps_steps, b.dps_replicas, b.zeta,
                                         spec.denoiser.decoys, spec.seed);
    write_stream(dir / "dps.csv", [&](std::ostream& o) {
      o << "method,replica,rmsd\n";
      for (std::size_t r = 0; r < cmp.adp_rmsd.size(); ++r) o << "adp," << r << ',' << num(cmp.adp_rmsd[r]) << '\n';
      for (std::size_t r = 0; r < cmp.dps_rmsd.size(); ++r) o << "dps," << r << ',' << num(cmp.dps_rmsd[r]) << '\n';
    });
    timing["adp_seconds_per_iteration"] = cmp.adp.seconds_per_iteration();
    timing["dps_seconds_per_iteration"] = cmp.dps.seconds_per_iteration();
    out << "seconds per iteration: adp " << num(cmp.adp.seconds_per_iteration()) << ", dps "
        << num(cmp.dps.seconds_per_iteration()) << '\n';
  }
  write_stream(dir / "timing.json", [&](std::ostream& o) { o << timing.dump(2) << '\n'; });
  return kSuccess;
}

}  // namespace adp::cli
