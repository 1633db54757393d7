#include <adp/cli/app.hpp>

#include <adp/density.hpp>
#include <adp/mrc.hpp>
#include <adp/pdb.hpp>
#include <adp/synthetic.hpp>

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace adp::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"adp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / "adp_cli_tests" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  std::string target(int n, std::uint64_t seed = 1) {
    const std::string path = (dir_ / ("target_" + std::to_string(n) + ".pdb")).string();
    if (!fs::exists(path)) write_backbone(synthetic_backbone(n, seed), path);
    return path;
  }

  std::string out(const std::string& name) const { return (dir_ / name).string(); }

  static double best_rmsd(const fs::path& metrics) {
    std::istringstream in(slurp(metrics));
    std::string line;
    double best = -1.0;
    while (std::getline(in, line))
      if (line.rfind("best,", 0) == 0) best = std::stod(line.substr(line.find(',', 5) + 1));
    return best;
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndMissingSubcommand) {
  EXPECT_EQ(run_cli({"--help"}).code, kSuccess);
  EXPECT_EQ(run_cli({}).code, kConfigError);
  EXPECT_EQ(run_cli({"complete", "--no-such-flag"}).code, kConfigError);
}

TEST_F(CliTest, MissingTargetIsConfigError) {
  const auto o = run_cli({"complete", "--set", "target=" + out("absent.pdb"), "--out", out("o")});
  EXPECT_EQ(o.code, kConfigError);
  EXPECT_NE(o.err.find("config error"), std::string::npos);
}

TEST_F(CliTest, InvalidValuesAreConfigErrors) {
  const std::string t = target(8);
  EXPECT_EQ(run_cli({"complete", "--set", "target=" + t, "--set", "complete.k=0", "--dry-run"}).code, kConfigError);
  EXPECT_EQ(run_cli({"complete", "--set", "target=" + t, "--set", "complete.kk=2", "--dry-run"}).code, kConfigError);
  EXPECT_EQ(run_cli({"distances", "--set", "target=" + t, "--set", "distances.m=-1", "--dry-run"}).code,
            kConfigError);
  EXPECT_EQ(run_cli({"distances", "--set", "target=" + t, "--set", "distances.m=1000", "--replicas", "1", "--steps",
                     "2", "--out", out("o")})
                .code,
            kConfigError);
  EXPECT_EQ(run_cli({"complete", "--set", "target=" + t, "--replicas", "0", "--dry-run"}).code, kConfigError);
}

TEST_F(CliTest, DryRunAppliesPrecedence) {
  const std::string t = target(8);
  const std::string cfg = out("cfg.json");
  std::ofstream(cfg) << R"({"seed": 1, "replicas": 3, "complete": {"k": 3}, "target": ")" << t << "\"}";
  auto resolved = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"complete", "--config", cfg, "--dry-run"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto o = run_cli(args);
    EXPECT_EQ(o.code, kSuccess) << o.err;
    return nlohmann::json::parse(o.out);
  };
  EXPECT_EQ(resolved({})["seed"], 1);
  EXPECT_EQ(resolved({})["complete"]["k"], 3);
  ::setenv("ADP_SEED", "2", 1);
  ::setenv("ADP_COMPLETE__K", "4", 1);
  EXPECT_EQ(resolved({})["seed"], 2);
  EXPECT_EQ(resolved({})["complete"]["k"], 4);
  EXPECT_EQ(resolved({"--set", "seed=3"})["seed"], 3);
  EXPECT_EQ(resolved({"--set", "seed=3", "--seed", "4"})["seed"], 4);
  ::unsetenv("ADP_SEED");
  ::unsetenv("ADP_COMPLETE__K");
  const auto j = resolved({"--replicas", "5", "--steps", "7", "--denoiser", "oracle"});
  EXPECT_EQ(j["replicas"], 5);
  EXPECT_EQ(j["schedule"]["steps"], 7);
  EXPECT_EQ(j["denoiser"]["kind"], "oracle");
  EXPECT_EQ(j["denoiser"]["align"], "none");
  EXPECT_EQ(run_cli({"complete", "--config", out("none.json"), "--dry-run"}).code, kConfigError);
}

TEST_F(CliTest, DryRunOutputIsAValidConfig) {
  const auto first = run_cli({"refine", "--set", "target=" + target(8), "--set", "refine.map=" + target(8), "--set",
                              "refine.partial=" + target(8), "--dry-run"});
  ASSERT_EQ(first.code, kSuccess) << first.err;
  std::ofstream(out("resolved.json")) << first.out;
  const auto second = run_cli({"refine", "--config", out("resolved.json"), "--dry-run"});
  ASSERT_EQ(second.code, kSuccess) << second.err;
  EXPECT_EQ(nlohmann::json::parse(second.out), nlohmann::json::parse(first.out));
}

TEST_F(CliTest, DistancesResolvesRigidAlignment) {
  const auto o = run_cli({"distances", "--set", "target=" + target(8), "--dry-run"});
  ASSERT_EQ(o.code, kSuccess) << o.err;
  EXPECT_EQ(nlohmann::json::parse(o.out)["denoiser"]["align"], "rigid");
}

TEST_F(CliTest, CompleteIsReproducible) {
  const std::string t = target(12);
  const std::vector<std::string> common{"complete", "--set", "target=" + t, "--replicas", "2", "--steps", "60",
                                        "--seed", "5"};
  auto a_args = common;
  a_args.insert(a_args.end(), {"--out", out("a")});
  auto b_args = common;
  b_args.insert(b_args.end(), {"--out", out("b"), "--jobs", "2"});
  ASSERT_EQ(run_cli(a_args).code, kSuccess);
  ASSERT_EQ(run_cli(b_args).code, kSuccess);
  for (const char* f : {"trace.csv", "metrics.csv", "replica_0.pdb", "replica_1.pdb"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  EXPECT_FALSE(slurp(dir_ / "a" / "trace.csv").empty());
}

TEST_F(CliTest, FullObservationLibraryRecoversTarget) {
  const auto o = run_cli({"complete", "--set", "target=" + target(16), "--set", "complete.k=1", "--replicas", "1",
                          "--steps", "300", "--out", out("o")});
  ASSERT_EQ(o.code, kSuccess) << o.err;
  const double best = best_rmsd(dir_ / "o" / "metrics.csv");
  EXPECT_GE(best, 0.0);
  EXPECT_LT(best, 1e-3);
}

TEST_F(CliTest, OracleCompletionAtK2) {
  const auto o = run_cli({"complete", "--set", "target=" + target(16), "--denoiser", "oracle", "--replicas", "2",
                          "--steps", "50", "--out", out("o")});
  ASSERT_EQ(o.code, kSuccess) << o.err;
  EXPECT_LT(best_rmsd(dir_ / "o" / "metrics.csv"), 1e-3);
}

TEST_F(CliTest, DistancesWithAllPairsAndOracle) {
  const int n = 10;
  const auto o = run_cli({"distances", "--set", "target=" + target(n), "--set",
                          "distances.m=" + std::to_string(n * (n - 1) / 2), "--denoiser", "oracle", "--replicas", "1",
                          "--steps", "50", "--out", out("o")});
  ASSERT_EQ(o.code, kSuccess) << o.err;
  EXPECT_LT(best_rmsd(dir_ / "o" / "metrics.csv"), 1e-3);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "chirality.json"));
}

TEST_F(CliTest, DistancesWithNoPairsRuns) {
  const auto o = run_cli({"distances", "--set", "target=" + target(8), "--set", "distances.m=0", "--replicas", "1",
                          "--steps", "20", "--out", out("o")});
  EXPECT_EQ(o.code, kSuccess) << o.err;
  EXPECT_EQ(slurp(dir_ / "o" / "pairs.csv"), "i,j,distance\n");
}

TEST_F(CliTest, FailingReplicaGivesRuntimeExit) {
  const auto o = run_cli({"complete", "--set", "target=" + target(8), "--set", "complete.learning_rate=1e300",
                          "--replicas", "1", "--steps", "20", "--out", out("o")});
  EXPECT_EQ(o.code, kRuntimeError);
}

double high_frequency_fraction(const DensityMap& m, double cutoff) {
  const FourierBand band(m.size);
  const double total = band.energy(m.values, m.voxel_size, std::numeric_limits<double>::infinity(), BandFilter::sharp);
  const double low = band.energy(m.values, m.voxel_size, cutoff, BandFilter::sharp);
  return (total - low) / total;
}

TEST_F(CliTest, SimulateMap) {
  const std::string t = target(10);
  auto simulate = [&](const std::string& name, const std::string& resolution, const std::string& noise) {
    const auto o = run_cli({"simulate-map", "--set", "target=" + t, "--set", "simulate.resolution=" + resolution,
                            "--set", "simulate.noise=" + noise, "--set", "simulate.output=" + name, "--out",
                            out("maps")});
    EXPECT_EQ(o.code, kSuccess) << o.err;
    return read_mrc(out("maps/" + name));
  };
  const DensityMap sharp = simulate("a.mrc", "2.0", "0");
  const std::string bytes = slurp(out("maps/a.mrc"));
  simulate("a.mrc", "2.0", "0");
  EXPECT_EQ(slurp(out("maps/a.mrc")), bytes);
  EXPECT_DOUBLE_EQ(sharp.resolution, 2.0);

  const DensityMap blurred = simulate("b.mrc", "4.0", "0");
  ASSERT_TRUE(sharp.same_grid(blurred));
  EXPECT_GT(high_frequency_fraction(sharp, 4.0), high_frequency_fraction(blurred, 4.0));

  const DensityMap noisy = simulate("c.mrc", "2.0", "0.1");
  ASSERT_TRUE(noisy.same_grid(sharp));
  EXPECT_NE(noisy.values, sharp.values);
  EXPECT_DOUBLE_EQ(noisy.resolution, sharp.resolution);
}

TEST_F(CliTest, RefineChecksGridAndKeepsAll) {
  const std::string t = target(10);
  ASSERT_EQ(run_cli({"simulate-map", "--set", "target=" + t, "--out", out("maps")}).code, kSuccess);
  const std::string partial = out("partial.pdb");
  write_backbone(partial_model(read_backbone(t), 0.2, 0.3, 3), partial);
  const std::vector<std::string> base{"refine", "--set", "target=" + t, "--set", "refine.map=" + out("maps/map.mrc"),
                                      "--set", "refine.partial=" + partial, "--replicas", "2", "--steps", "30",
                                      "--set", "refine.anneal_epochs=10"};
  auto bad = base;
  bad.insert(bad.end(), {"--set", "refine.grid.size=7", "--out", out("bad")});
  EXPECT_EQ(run_cli(bad).code, kConfigError);
  auto good = base;
  good.insert(good.end(), {"--set", "refine.keep_fraction=1", "--out", out("good")});
  const auto o = run_cli(good);
  ASSERT_EQ(o.code, kSuccess) << o.err;
  EXPECT_NE(o.out.find("kept 2 of 2"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "good" / "completeness.csv"));
}

TEST_F(CliTest, BenchWithZeroSteps) {
  const auto o = run_cli({"bench", "--steps", "0", "--set", "bench.n_residues=8", "--out", out("o")});
  ASSERT_EQ(o.code, kSuccess) << o.err;
  const std::string summary = slurp(dir_ / "o" / "convergence_summary.csv");
  EXPECT_EQ(summary.rfind("variant,learning_rate,momentum,iterations_to_threshold,iterations_run\n", 0), 0u);
  std::istringstream in(summary);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0") << line;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "o" / "timing.json")), nlohmann::json::object());
}

}  // namespace
}  // namespace adp::cli
