#include "../support/oracles.hpp"

#include <adp/error.hpp>
#include <adp/metrics.hpp>
#include <adp/sampling.hpp>
#include <adp/synthetic.hpp>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace adp {
namespace {

TEST(SampleMask, Examples) {
  std::vector<int> all(32);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(sample_mask(8, 1), all);
  EXPECT_EQ(sample_mask(8, 4), (std::vector<int>{0, 1, 2, 3, 16, 17, 18, 19}));
  EXPECT_EQ(sample_mask(3, 10), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_THROW(sample_mask(4, 0), Error);
}

TEST(SampleMask, RowCountSweep) {
  for (int n = 1; n <= 64; ++n)
    for (int k = 1; k <= 64; ++k) {
      const int expected = k > n ? 4 : 4 * ((n + k - 1) / k);
      ASSERT_EQ(static_cast<int>(sample_mask(n, k).size()), expected) << n << " " << k;
    }
}

TEST(Observe, DropsAbsentRows) {
  BackboneChain c = synthetic_backbone(4, 1);
  c.present[4] = c.present[5] = c.present[6] = c.present[7] = 0;
  const auto m = observe(c, sample_mask(4, 1), 1, 0.5);
  EXPECT_EQ(m.count(), 12);
  EXPECT_EQ(m.noise_scale, 0.5);
  EXPECT_EQ(m.observed.row(4), c.coords.row(8));
  EXPECT_EQ(observe_present(c).count(), 12);
}

TEST(SampleDistances, ExhaustiveAndValues) {
  const BackboneChain c = synthetic_backbone(6, 2);
  const DistanceSet all = sample_distances(c, 15, 4);
  std::set<std::pair<int, int>> seen;
  for (auto [i, j] : all.pairs) seen.insert({std::min(i, j), std::max(i, j)});
  EXPECT_EQ(seen.size(), 15u);
  EXPECT_THROW(sample_distances(c, 16, 4), ConfigError);
  EXPECT_TRUE(sample_distances(c, 0, 4).pairs.empty());
}

TEST(SampleDistances, DeterministicHandComputed) {
  Coords x = Coords::Zero(16, 3);
  for (int r = 0; r < 4; ++r) x.row(atom_row(r, BackboneAtom::CA)) << 3.0 * r, r * r, 0.0;
  const BackboneChain c(x, std::vector<std::uint8_t>(16, 1));
  const DistanceSet a = sample_distances(c, 3, 11);
  const DistanceSet b = sample_distances(c, 3, 11);
  EXPECT_EQ(a.pairs, b.pairs);
  for (int p = 0; p < 3; ++p) {
    const auto [i, j] = a.pairs[static_cast<std::size_t>(p)];
    const double dx = 3.0 * (i - j);
    const double dy = i * i - j * j;
    EXPECT_NEAR(a.measured[static_cast<std::size_t>(p)], std::sqrt(dx * dx + dy * dy), 1e-12);
  }
  const DistanceSet zeros = sample_distances(c, 3, 11, false);
  for (double v : zeros.measured) EXPECT_EQ(v, 0.0);
}

TEST(SampleDistances, NoDuplicatesAcrossDraws) {
  const BackboneChain c = synthetic_backbone(12, 5);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const DistanceSet d = sample_distances(c, 20, seed);
    std::set<std::pair<int, int>> seen;
    for (auto [i, j] : d.pairs) {
      ASSERT_NE(i, j);
      ASSERT_TRUE(seen.insert({std::min(i, j), std::max(i, j)}).second) << seed;
    }
  }
}

TEST(Rmsd, Examples) {
  const BackboneChain t = synthetic_backbone(10, 1);
  EXPECT_EQ(rmsd(t, t), 0.0);
  BackboneChain shifted = t;
  shifted.coords.rowwise() += Eigen::RowVector3d(1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0));
  EXPECT_NEAR(rmsd(shifted, t), 1.0, 1e-12);
  EXPECT_NEAR(rmsd(shifted, t, AtomSelection::backbone), 1.0, 1e-12);
  Rng gen = make_stream(2, 0);
  BackboneChain moved = t;
  moved.coords = t.coords * random_rotation(gen).transpose();
  moved.coords.rowwise() += Eigen::RowVector3d(5.0, -3.0, 2.0);
  EXPECT_LT(rmsd(moved, t, AtomSelection::ca_only, Alignment::rigid), 1e-8);
  EXPECT_LT(rmsd(moved, t, AtomSelection::backbone, Alignment::rigid), 1e-8);
}

TEST(Rmsd, PseudometricProperties) {
  const BackboneChain t = synthetic_backbone(12, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    BackboneChain p = t;
    p.coords += testing::random_coords(t.dim(), seed, 0.8);
    EXPECT_DOUBLE_EQ(rmsd(p, t, AtomSelection::backbone), rmsd(t, p, AtomSelection::backbone));
    EXPECT_LE(rmsd(p, t, AtomSelection::ca_only, Alignment::rigid), rmsd(p, t) + 1e-12);
  }
}

TEST(Rmsd, MirrorFlagged) {
  const BackboneChain t = synthetic_backbone(12, 4);
  BackboneChain mirrored = t;
  mirrored.coords.col(0) *= -1.0;
  const RmsdResult r = rmsd_detail(mirrored, t, AtomSelection::ca_only, Alignment::rigid);
  EXPECT_TRUE(r.mirror_better);
  EXPECT_LT(r.mirror_rmsd, 1e-8);
  EXPECT_GT(r.rmsd, 0.1);
}

TEST(Rmsd, MaskAndErrors) {
  BackboneChain t = synthetic_backbone(5, 6);
  BackboneChain p = t;
  p.coords.row(atom_row(2, BackboneAtom::CA)) += Eigen::RowVector3d(100.0, 0.0, 0.0);
  for (int a = 0; a < 4; ++a) t.present[static_cast<std::size_t>(atom_row(2, static_cast<BackboneAtom>(a)))] = 0;
  EXPECT_NEAR(rmsd(p, t), 0.0, 1e-12);
  EXPECT_THROW(rmsd(synthetic_backbone(4, 1), t), ShapeError);
  BackboneChain empty = t;
  std::fill(empty.present.begin(), empty.present.end(), 0);
  EXPECT_THROW(rmsd(p, empty), ShapeError);
}

TEST(Kabsch, ProperRotationEnforced) {
  Rng gen = make_stream(8, 0);
  const Coords a = testing::random_coords(10, 1);
  Coords b = a;
  b.col(2) *= -1.0;
  const Superposition proper = kabsch(a, b);
  EXPECT_NEAR(proper.rotation.determinant(), 1.0, 1e-12);
  const Superposition improper = kabsch(a, b, true);
  EXPECT_NEAR(improper.rotation.determinant(), -1.0, 1e-12);
  EXPECT_LT((improper.apply(a) - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Completeness, FlatForIdenticalAndOneOutlier) {
  const BackboneChain t = synthetic_backbone(10, 7);
  for (const auto& p : rmsd_vs_completeness(t, t)) EXPECT_EQ(p.rmsd, 0.0);
  BackboneChain p = t;
  p.coords.row(atom_row(6, BackboneAtom::CA)) += Eigen::RowVector3d(3.0, 0.0, 0.0);
  const auto curve = rmsd_vs_completeness(p, t);
  ASSERT_EQ(curve.size(), 10u);
  for (int k = 0; k < 9; ++k) EXPECT_EQ(curve[static_cast<std::size_t>(k)].rmsd, 0.0);
  EXPECT_NEAR(curve[9].completeness, 1.0, 1e-15);
  EXPECT_NEAR(curve[9].rmsd, std::sqrt(9.0 / 10.0), 1e-12);
}

TEST(Completeness, MatchesBruteForceSubsets) {
  const BackboneChain t = synthetic_backbone(8, 8);
  BackboneChain p = t;
  p.coords += testing::random_coords(t.dim(), 3, 0.7);
  const auto curve = rmsd_vs_completeness(p, t);
  std::vector<double> sq;
  for (int r = 0; r < 8; ++r) sq.push_back((p.coords.row(atom_row(r, BackboneAtom::CA)) - t.coords.row(atom_row(r, BackboneAtom::CA))).squaredNorm());
  for (int k = 1; k <= 8; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < 256; ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      double s = 0.0;
      for (int r = 0; r < 8; ++r)
        if (mask & (1 << r)) s += sq[static_cast<std::size_t>(r)];
      best = std::min(best, std::sqrt(s / k));
    }
    EXPECT_NEAR(curve[static_cast<std::size_t>(k - 1)].rmsd, best, 1e-12);
    EXPECT_NEAR(curve[static_cast<std::size_t>(k - 1)].completeness, k / 8.0, 1e-15);
    if (k > 1) EXPECT_GE(curve[static_cast<std::size_t>(k - 1)].rmsd, curve[static_cast<std::size_t>(k - 2)].rmsd);
  }
}

TEST(Completeness, PartialPredictionCountsAgainstTarget) {
  const BackboneChain t = synthetic_backbone(10, 9);
  BackboneChain p = t;
  for (int a = 0; a < 8; ++a) p.present[static_cast<std::size_t>(a)] = 0;
  const auto curve = rmsd_vs_completeness(p, t);
  ASSERT_EQ(curve.size(), 8u);
  EXPECT_NEAR(curve.back().completeness, 0.8, 1e-15);
}

TEST(MetricsCsv, HeaderAndPrecision) {
  std::ostringstream out;
  write_metrics_csv({{"0", "complete", 0.1, 1.0, 2.0}, {"best", "complete", 1.0 / 3.0, 0.5, 4.0}}, out);
  EXPECT_EQ(out.str(),
            "replica,task,rmsd,completeness,loss\n"
            "0,complete,0.10000000000000001,1,2\n"
            "best,complete,0.33333333333333331,0.5,4\n");
  std::ostringstream curve;
  write_completeness_csv({{"input", {{0.5, 0.25}}}}, curve);
  EXPECT_EQ(curve.str(), "model,completeness,rmsd\ninput,0.5,0.25\n");
}

TEST(Synthetic, IdealGeometry) {
  const BackboneChain c = synthetic_backbone(20, 11);
  EXPECT_EQ(c.n_residues, 20);
  EXPECT_NO_THROW(c.validate());
  for (int r = 0; r < 20; ++r) {
    const auto n = c.coords.row(atom_row(r, BackboneAtom::N));
    const auto ca = c.coords.row(atom_row(r, BackboneAtom::CA));
    const auto cc = c.coords.row(atom_row(r, BackboneAtom::C));
    EXPECT_NEAR((ca - n).norm(), 1.458, 0.01);
    EXPECT_NEAR((cc - ca).norm(), 1.525, 0.01);
    if (r + 1 < 20) EXPECT_NEAR((c.coords.row(atom_row(r + 1, BackboneAtom::N)) - cc).norm(), 1.329, 0.01);
  }
  EXPECT_LT(c.coords.colwise().mean().norm(), 1e-9);
  EXPECT_EQ(synthetic_backbone(20, 11).coords, c.coords);
}

TEST(Synthetic, DecoysAndPartialModel) {
  const BackboneChain t = synthetic_backbone(16, 2);
  const auto decoys = decoy_library(t, 5, 3);
  ASSERT_EQ(decoys.size(), 5u);
  for (const auto& d : decoys) {
    EXPECT_EQ(d.n_residues, 16);
    EXPECT_LT((d.coords.colwise().mean() - t.coords.colwise().mean()).norm(), 1e-9);
    EXPECT_GT(rmsd(d, t, AtomSelection::ca_only, Alignment::rigid), 1.0);
  }
  const BackboneChain p = partial_model(t, 0.25, 0.0, 4);
  EXPECT_EQ(p.count_present_residues(), 12);
  const BackboneChain noisy = partial_model(t, 0.25, 0.5, 4);
  EXPECT_EQ(noisy.present, p.present);
  const double r = rmsd(noisy, t, AtomSelection::backbone);
  EXPECT_NEAR(r, 0.5 * std::sqrt(3.0), 0.2);
  EXPECT_THROW(partial_model(t, 1.0, 0.0, 1), ShapeError);
}

TEST(Synthetic, RandomRotationIsProper) {
  Rng gen = make_stream(1, 2);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d q = random_rotation(gen);
    EXPECT_LT((q * q.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(q.determinant(), 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace adp
