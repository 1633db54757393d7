#include "../support/oracles.hpp"

#include <adp/error.hpp>
#include <adp/linear.hpp>
#include <adp/metrics.hpp>
#include <adp/sampling.hpp>
#include <adp/solver.hpp>
#include <adp/synthetic.hpp>

#include <gtest/gtest.h>
#include <json.hpp>

#include <memory>
#include <sstream>

namespace adp {
namespace {

using testing::random_coords;

NoiseSchedule schedule_with(int steps) {
  NoiseSchedule s;
  s.total_steps = steps;
  return s;
}

SolverConfig config_with(int steps, int replicas = 1, std::uint64_t seed = 7) {
  SolverConfig c;
  c.schedule = schedule_with(steps);
  c.replicas = replicas;
  c.seed = seed;
  c.jobs = 1;
  return c;
}

LikelihoodBinding binding(std::shared_ptr<const Likelihood> lik, double lr = 0.3, double rho = 0.9) {
  LikelihoodBinding b;
  b.name = "linear";
  b.likelihood = std::move(lik);
  b.learning_rate = lr;
  b.momentum = rho;
  return b;
}

std::shared_ptr<MaskedLinearLikelihood> masked(const CorrelatedPrior& prior, const BackboneChain& target, int k) {
  return std::make_shared<MaskedLinearLikelihood>(prior, observe(target, sample_mask(target.n_residues, k)));
}

BackboneChain with_coords(const BackboneChain& like, const Coords& x) {
  BackboneChain out = like;
  out.coords = x;
  return out;
}

class ThrowingLikelihood final : public Likelihood {
 public:
  explicit ThrowingLikelihood(int dim) : dim_(dim) {}
  Evaluation evaluate(const Coords&, const EvalContext&) const override { throw Error("boom"); }
  int dim() const override { return dim_; }
  std::string kind() const override { return "throwing"; }

 private:
  int dim_;
};

TEST(Anneal, HoldsThenRampsToEnd) {
  const ResolutionAnneal a{5.0, 1.5, 11};
  EXPECT_DOUBLE_EQ(a.at(0, 100), 5.0);
  EXPECT_DOUBLE_EQ(a.at(88, 100), 5.0);
  EXPECT_DOUBLE_EQ(a.at(89, 100), 5.0);
  EXPECT_DOUBLE_EQ(a.at(94, 100), 3.25);
  EXPECT_DOUBLE_EQ(a.at(99, 100), 1.5);
  EXPECT_DOUBLE_EQ(a.at(100, 100), 1.5);
  const ResolutionAnneal whole{4.0, 2.0, 200};
  EXPECT_NEAR(whole.at(0, 100), 4.0 - 2.0 * 100.0 / 199.0, 1e-12);
}

TEST(Binding, ActivationWindowAndContext) {
  const auto prior = CorrelatedPrior::calibrated(4);
  LikelihoodBinding b = binding(std::make_shared<ThrowingLikelihood>(prior.dim()));
  EXPECT_TRUE(b.active(0, 10));
  EXPECT_TRUE(b.active(9, 10));
  EXPECT_FALSE(b.active(10, 10));
  b.epoch_start = 3;
  b.epoch_end = 5;
  EXPECT_FALSE(b.active(2, 10));
  EXPECT_TRUE(b.active(3, 10));
  EXPECT_TRUE(b.active(4, 10));
  EXPECT_FALSE(b.active(5, 10));
  EXPECT_TRUE(std::isinf(b.context(0, 10).resolution));
  b.anneal = ResolutionAnneal{5.0, 1.5, 2};
  EXPECT_DOUBLE_EQ(b.context(0, 10).resolution, 5.0);
  EXPECT_DOUBLE_EQ(b.context(9, 10).resolution, 1.5);
}

TEST(Binding, ValidateRejectsBadParameters) {
  const auto prior = CorrelatedPrior::calibrated(4);
  const auto lik = std::make_shared<ThrowingLikelihood>(prior.dim());
  EXPECT_NO_THROW(binding(lik).validate(prior.dim()));
  EXPECT_THROW(binding(lik).validate(prior.dim() + 4), ShapeError);
  EXPECT_THROW(binding(nullptr).validate(prior.dim()), ConfigError);
  EXPECT_THROW(binding(lik, -1.0).validate(prior.dim()), ConfigError);
  EXPECT_THROW(binding(lik, 0.1, 1.0).validate(prior.dim()), ConfigError);
  auto empty = binding(lik);
  empty.epoch_start = 5;
  empty.epoch_end = 4;
  EXPECT_THROW(empty.validate(prior.dim()), ConfigError);
  SolverConfig c = config_with(10);
  c.replicas = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Renoise, ZeroSigmaScalesOnly) {
  Rng gen = make_stream(1, 0);
  const Coords z = random_coords(8, 1);
  EXPECT_EQ(renoise(z, 1.0, 0.0, gen), z);
  EXPECT_EQ(renoise(z, 0.5, 0.0, gen), Coords(0.5 * z));
}

TEST(Renoise, MonteCarloMomentsMatch) {
  Rng gen = make_stream(2, 0);
  const Coords z = random_coords(4, 2);
  const double alpha = 0.6;
  const double sigma = 0.8;
  const int draws = 20000;
  Coords sum = Coords::Zero(4, 3);
  Coords sq = Coords::Zero(4, 3);
  for (int d = 0; d < draws; ++d) {
    const Coords s = renoise(z, alpha, sigma, gen) - alpha * z;
    sum += s;
    sq += s.cwiseAbs2();
  }
  const Coords mean = sum / draws;
  const Coords var = sq / draws - mean.cwiseAbs2();
  const double se_mean = sigma / std::sqrt(draws);
  const double se_var = sigma * sigma * std::sqrt(2.0 / draws);
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 4.0 * se_mean);
  EXPECT_LT((var.array() - sigma * sigma).abs().maxCoeff(), 4.0 * se_var);
}

TEST(RunAdp, OracleDenoiserReturnsTarget) {
  const BackboneChain target = synthetic_backbone(12, 3);
  const auto prior = CorrelatedPrior::calibrated(12);
  const NoiseSchedule sched = schedule_with(10);
  const OracleDenoiser oracle(target.coords, 1.0, sched);
  const RunReport report = run_adp(config_with(10, 2), prior, oracle, {});
  ASSERT_EQ(report.replicas.size(), 2u);
  for (const auto& r : report.replicas) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.iterations, 10);
    EXPECT_LT(rmsd(with_coords(target, r.x), target, AtomSelection::backbone), 1e-6);
  }
}

TEST(RunAdp, PointMassLibraryWithMaskedDataRecoversTarget) {
  const BackboneChain target = synthetic_backbone(16, 4);
  const auto prior = CorrelatedPrior::calibrated(16);
  const NoiseSchedule sched;
  const GaussianLibraryDenoiser den(prior, sched, {target.coords}, 0.0);
  const RunReport report = run_adp(config_with(sched.total_steps), prior, den, {binding(masked(prior, target, 2))});
  ASSERT_TRUE(report.replicas[0].ok);
  EXPECT_LT(rmsd(with_coords(target, report.replicas[0].x), target, AtomSelection::backbone), 1e-3);
  EXPECT_LT(report.replicas[0].total_final_loss(), 1e-6);
  EXPECT_EQ(report.replicas[0].trace.size(), static_cast<std::size_t>(sched.total_steps));
}

TEST(RunAdp, UnconditionalMeanMatchesComponent) {
  const int n = 4;
  const auto prior = CorrelatedPrior::calibrated(n);
  const Coords mu = random_coords(prior.dim(), 5, 3.0);
  const GaussianLibraryDenoiser den(prior, schedule_with(100), {mu}, 0.4);
  const int replicas = 64;
  const RunReport report = run_adp(config_with(100, replicas), prior, den, {});
  Coords sum = Coords::Zero(prior.dim(), 3);
  Coords sq = Coords::Zero(prior.dim(), 3);
  for (const auto& r : report.replicas) {
    ASSERT_TRUE(r.ok);
    sum += r.z;
    sq += r.z.cwiseAbs2();
  }
  const Coords mean = sum / replicas;
  const double count = replicas;
  const Coords se = ((sq / count - mean.cwiseAbs2()) / (count - 1.0)).cwiseSqrt();
  const Coords m = prior.apply_inverse(mu);
  int outside = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int c = 0; c < 3; ++c)
      if (std::abs(mean(i, c) - m(i, c)) > 3.0 * se(i, c)) ++outside;
  EXPECT_LE(outside, 2) << "of " << m.size();
}

TEST(RunAdp, DeterministicAcrossRunsAndThreadCounts) {
  const BackboneChain target = synthetic_backbone(10, 6);
  const auto prior = CorrelatedPrior::calibrated(10);
  const GaussianLibraryDenoiser den(prior, schedule_with(50), {target.coords, random_coords(prior.dim(), 6, 4.0)},
                                    0.3);
  const std::vector<LikelihoodBinding> bindings{binding(masked(prior, target, 3))};
  SolverConfig one = config_with(50, 4);
  SolverConfig many = one;
  many.jobs = 4;
  const RunReport a = run_adp(one, prior, den, bindings);
  const RunReport b = run_adp(one, prior, den, bindings);
  const RunReport c = run_adp(many, prior, den, bindings);
  for (std::size_t r = 0; r < a.replicas.size(); ++r) {
    EXPECT_EQ(a.replicas[r].x, b.replicas[r].x);
    EXPECT_EQ(a.replicas[r].x, c.replicas[r].x);
    EXPECT_EQ(a.replicas[r].trace, c.replicas[r].trace);
  }
  EXPECT_NE(a.replicas[0].x, a.replicas[1].x);
}

TEST(RunAdp, NoMomentumMatchesDirectLoop) {
  const BackboneChain target = synthetic_backbone(8, 8);
  const auto prior = CorrelatedPrior::calibrated(8);
  const NoiseSchedule sched = schedule_with(40);
  const GaussianLibraryDenoiser den(prior, sched, {random_coords(prior.dim(), 8, 3.0)}, 0.5);
  const auto lik = masked(prior, target, 2);
  const SolverConfig cfg = config_with(40, 1, 11);
  const RunReport report = run_adp(cfg, prior, den, {binding(lik, 0.3, 0.0)});

  Rng gen = make_stream(11, 0);
  Coords z = standard_normal(prior.dim(), gen);
  for (int e = 0; e < sched.total_steps; ++e) {
    const Coords z_tilde = prior.apply_inverse(den.denoise(prior.apply(z), sched.time_at(e)));
    const Coords z_hat = z_tilde + 0.3 * lik->evaluate(z_tilde).grad;
    const double t_next = sched.time_at(e + 1);
    z = renoise(z_hat, sched.alpha(t_next), sched.sigma(t_next), gen);
  }
  EXPECT_LT((report.replicas[0].z - z).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RunAdp, InactiveBindingIsTracedButDoesNotMove) {
  const BackboneChain target = synthetic_backbone(8, 9);
  const auto prior = CorrelatedPrior::calibrated(8);
  const GaussianLibraryDenoiser den(prior, schedule_with(20), {random_coords(prior.dim(), 9, 3.0)}, 0.5);
  auto off = binding(masked(prior, target, 2));
  off.epoch_start = 20;
  off.epoch_end = 20;
  const RunReport without = run_adp(config_with(20), prior, den, {});
  const RunReport with = run_adp(config_with(20), prior, den, {off});
  EXPECT_EQ(without.replicas[0].z, with.replicas[0].z);
  EXPECT_EQ(with.replicas[0].trace.size(), 20u);
  EXPECT_GT(with.replicas[0].trace[0][0], 0.0);
}

TEST(RunAdp, FailingReplicaIsReportedNotThrown) {
  const auto prior = CorrelatedPrior::calibrated(4);
  const ZeroDenoiser den;
  auto b = binding(std::make_shared<ThrowingLikelihood>(prior.dim()));
  const RunReport report = run_adp(config_with(5, 2), prior, den, {b});
  for (const auto& r : report.replicas) {
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.error, "boom");
  }
}

TEST(RunAdp, InitialStatesAreChecked) {
  const auto prior = CorrelatedPrior::calibrated(4);
  const ZeroDenoiser den;
  EXPECT_THROW(run_adp(config_with(5, 2), prior, den, {}, std::vector<Coords>{Coords::Zero(16, 3)}), ConfigError);
  EXPECT_THROW(run_adp(config_with(5, 1), prior, den, {}, std::vector<Coords>{Coords::Zero(12, 3)}), ShapeError);
  const Coords z0 = random_coords(16, 3);
  const EchoDenoiser echo;
  // Echo with a single step at t = 1 keeps alpha_0 z0 = z0 at the final sigma = 0 step.
  const RunReport r = run_adp(config_with(1), prior, echo, {}, z0);
  EXPECT_LT((r.replicas[0].z - z0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RunNoPrior, FullObservationConverges) {
  const BackboneChain target = synthetic_backbone(10, 12);
  const auto prior = CorrelatedPrior::calibrated(10);
  const auto lik = masked(prior, target, 1);
  NoPriorOptions opt;
  opt.max_iterations = 1000;
  const RunReport report = run_no_prior({binding(lik)}, prior, config_with(10), opt);
  ASSERT_TRUE(report.replicas[0].ok) << report.replicas[0].error;
  EXPECT_LT((report.replicas[0].x - target.coords).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(report.method, "preconditioned_momentum");
  EXPECT_EQ(report.replicas[0].trace.size(), 1001u);
}

TEST(RunNoPrior, PreconditionedReachesThresholdFaster) {
  const BackboneChain target = synthetic_backbone(40, 13);
  const auto prior = CorrelatedPrior::calibrated(40);
  const auto lik = masked(prior, target, 2);
  const Coords z0 = random_coords(prior.dim(), 13);
  NoPriorOptions pre;
  pre.max_iterations = 3000;
  pre.stop_relative_loss = 1e-6;
  NoPriorOptions raw = pre;
  raw.variant = NoPriorVariant::momentum;
  const double smax = lik->max_singular_value();
  const RunReport a = run_no_prior({binding(lik, 0.3, 0.9)}, prior, config_with(10), pre, z0);
  const RunReport b = run_no_prior({binding(lik, 1.0 / (smax * smax), 0.9)}, prior, config_with(10), raw, z0);
  const int fast = iterations_to_relative_loss(a.replicas[0], 1e-6);
  const int slow = iterations_to_relative_loss(b.replicas[0], 1e-6);
  ASSERT_GT(fast, 0);
  EXPECT_TRUE(slow < 0 || slow >= 5 * fast) << fast << " vs " << slow;
}

TEST(RunNoPrior, DivergenceMarksReplicaFailed) {
  const BackboneChain target = synthetic_backbone(10, 14);
  const auto prior = CorrelatedPrior::calibrated(10);
  NoPriorOptions opt;
  opt.variant = NoPriorVariant::plain_gd;
  opt.max_iterations = 200;
  const RunReport r = run_no_prior({binding(masked(prior, target, 2), 100.0)}, prior, config_with(10), opt);
  EXPECT_FALSE(r.replicas[0].ok);
  EXPECT_NE(r.replicas[0].error.find("diverged"), std::string::npos);
}

TEST(RunNoPrior, ZeroIterationsLeavesStateAndEmptyTrace) {
  const BackboneChain target = synthetic_backbone(6, 15);
  const auto prior = CorrelatedPrior::calibrated(6);
  NoPriorOptions opt;
  opt.max_iterations = 0;
  const Coords z0 = random_coords(prior.dim(), 15);
  const RunReport r = run_no_prior({binding(masked(prior, target, 2))}, prior, config_with(10), opt, z0);
  ASSERT_TRUE(r.replicas[0].ok);
  EXPECT_TRUE(r.replicas[0].trace.empty());
  EXPECT_EQ(r.replicas[0].z, z0);
  EXPECT_EQ(iterations_to_relative_loss(r.replicas[0], 0.5), -1);
  EXPECT_THROW(run_no_prior({}, prior, config_with(10), opt), ConfigError);
  EXPECT_EQ(no_prior_variant_from_string("plain_gd"), NoPriorVariant::plain_gd);
  EXPECT_THROW(no_prior_variant_from_string("adam"), ConfigError);
}

TEST(Dps, ZeroStepMatchesUnconditionalBitwise) {
  const BackboneChain target = synthetic_backbone(8, 16);
  const auto prior = CorrelatedPrior::calibrated(8);
  const GaussianLibraryDenoiser den(prior, schedule_with(30), {target.coords, random_coords(prior.dim(), 16, 4.0)},
                                    0.3);
  const auto lik = masked(prior, target, 2);
  const RunReport guided = run_dps(config_with(30, 3), prior, den, *lik, 0.0);
  const RunReport plain = sample_unconditional(config_with(30, 3), prior, den);
  ASSERT_EQ(guided.replicas.size(), plain.replicas.size());
  for (std::size_t r = 0; r < plain.replicas.size(); ++r) {
    ASSERT_TRUE(plain.replicas[r].ok);
    EXPECT_EQ(guided.replicas[r].x, plain.replicas[r].x);
  }
  EXPECT_EQ(guided.method, "dps");
  EXPECT_EQ(plain.method, "unconditional");
  EXPECT_THROW(run_dps(config_with(30), prior, den, *lik, -1.0), ConfigError);
}

TEST(Dps, GuidanceGradientMatchesFiniteDifferences) {
  const BackboneChain target = synthetic_backbone(4, 17);
  const auto prior = CorrelatedPrior::calibrated(4);
  const NoiseSchedule sched;
  const GaussianLibraryDenoiser den(prior, sched, {target.coords, random_coords(prior.dim(), 17, 3.0)}, 0.5);
  const auto meas = observe(target, sample_mask(4, 2));
  for (double t : {0.2, 0.5, 0.8}) {
    const Coords x_t = forward_noise(prior, sched, target.coords, t, 17);
    const Coords g = dps_guidance_gradient(prior, den, meas, x_t, t);
    const auto loss = [&](const Coords& x) { return (meas.observed - meas.select(den.denoise(x, t))).squaredNorm(); };
    const Coords fd = testing::numeric_gradient(loss, x_t, 1e-5);
    EXPECT_LT(testing::relative_error(g, fd), 1e-4) << "t = " << t;
  }
}

RunReport report_with(const std::vector<Coords>& zs) {
  RunReport report;
  for (std::size_t r = 0; r < zs.size(); ++r) {
    ReplicaResult res;
    res.replica = static_cast<int>(r);
    res.z = zs[r];
    report.replicas.push_back(res);
  }
  return report;
}

TEST(FilterReplicas, KeepsBestAndDropsCorrupted) {
  const BackboneChain target = synthetic_backbone(8, 18);
  const auto prior = CorrelatedPrior::calibrated(8);
  const auto lik = masked(prior, target, 2);
  const Coords good = prior.apply_inverse(target.coords);
  std::vector<Coords> zs;
  for (int r = 0; r < 8; ++r) zs.push_back(good + random_coords(prior.dim(), 100 + r, 0.01));
  zs[5] = random_coords(prior.dim(), 5, 50.0);
  const RunReport report = report_with(zs);

  const RunReport all = filter_replicas(report, *lik, 1.0);
  ASSERT_EQ(all.replicas.size(), 8u);
  for (int r = 0; r < 8; ++r) EXPECT_EQ(all.replicas[static_cast<std::size_t>(r)].replica, r);

  const RunReport kept = filter_replicas(report, *lik, 7.0 / 8.0);
  ASSERT_EQ(kept.replicas.size(), 7u);
  for (const auto& r : kept.replicas) EXPECT_NE(r.replica, 5);
  EXPECT_EQ(filter_replicas(report, *lik, 0.01).replicas.size(), 1u);
  EXPECT_THROW(filter_replicas(report, *lik, 0.0), ConfigError);
  EXPECT_THROW(filter_replicas(report, *lik, 1.5), ConfigError);
}

TEST(FilterReplicas, TiesGoToLowerIndexAndFailuresRankLast) {
  const BackboneChain target = synthetic_backbone(6, 19);
  const auto prior = CorrelatedPrior::calibrated(6);
  const auto lik = masked(prior, target, 2);
  const Coords same = random_coords(prior.dim(), 19);
  RunReport report = report_with({same, same, same, prior.apply_inverse(target.coords)});
  report.replicas[3].ok = false;
  const RunReport kept = filter_replicas(report, *lik, 0.5);
  ASSERT_EQ(kept.replicas.size(), 2u);
  EXPECT_EQ(kept.replicas[0].replica, 0);
  EXPECT_EQ(kept.replicas[1].replica, 1);
}

TEST(Reports, TraceCsvAndJson) {
  RunReport report;
  report.method = "adp";
  report.bindings.push_back({"linear", "linear", 0.3, 0.9, 0, -1, std::nullopt});
  report.bindings.push_back({"density", "density", 0.01, 0.9, 0, -1, ResolutionAnneal{}});
  ReplicaResult r;
  r.replica = 2;
  r.trace = {{0.5, 0.25}, {0.1, 0.2}};
  r.final_losses = {0.1, 0.2};
  r.x = Coords::Zero(4, 3);
  report.replicas.push_back(r);
  std::ostringstream csv;
  write_trace_csv(report, csv);
  EXPECT_EQ(csv.str(),
            "replica,epoch,linear,density,total\n"
            "2,0,0.5,0.25,0.75\n"
            "2,1,0.10000000000000001,0.20000000000000001,0.30000000000000004\n");
  std::ostringstream js;
  write_report_json(report, js, true);
  const auto j = nlohmann::json::parse(js.str());
  EXPECT_EQ(j["method"], "adp");
  EXPECT_EQ(j["bindings"].size(), 2u);
  EXPECT_FALSE(j["bindings"][0].contains("anneal"));
  EXPECT_DOUBLE_EQ(j["bindings"][1]["anneal"]["end"].get<double>(), 1.5);
  EXPECT_EQ(j["replicas"][0]["x"].size(), 4u);
  EXPECT_FALSE(j.contains("zeta"));
}

}  // namespace
}  // namespace adp
