#include "adp/synthetic.hpp"

#include "adp/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace adp {

namespace {

constexpr double kBondNCa = 1.458;
constexpr double kBondCaC = 1.525;
constexpr double kBondCN = 1.329;
constexpr double kBondCO = 1.231;
constexpr double kAngleNCaC = 111.2;
constexpr double kAngleCaCN = 116.2;
constexpr double kAngleCNCa = 121.7;
constexpr double kAngleCaCO = 120.5;

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Places D with |CD| = bond, angle BCD = angle, dihedral ABCD = torsion.
Eigen::Vector3d place(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                      double bond, double angle_deg, double torsion_deg) {
  const Eigen::Vector3d bc = (c - b).normalized();
  const Eigen::Vector3d n = (b - a).cross(bc).normalized();
  const Eigen::Vector3d m = n.cross(bc);
  const double theta = rad(angle_deg);
  const double phi = rad(torsion_deg);
  const Eigen::Vector3d d(-bond * std::cos(theta), bond * std::sin(theta) * std::cos(phi),
                          bond * std::sin(theta) * std::sin(phi));
  return c + d.x() * bc + d.y() * m + d.z() * n;
}

double jitter(NormalSampler& normal, Rng& gen, double sd) { return sd * normal(gen); }

}  // namespace

BackboneChain build_backbone(const std::vector<double>& phi, const std::vector<double>& psi,
                             const std::vector<double>& omega) {
  const int n = static_cast<int>(phi.size());
  if (n < 1 || psi.size() != phi.size() || (!omega.empty() && omega.size() != phi.size()))
    throw ShapeError("build_backbone needs equal-length, nonempty dihedral lists");
  BackboneChain chain(n);
  auto set = [&](int r, BackboneAtom a, const Eigen::Vector3d& p) { chain.coords.row(atom_row(r, a)) = p.transpose(); };
  auto get = [&](int r, BackboneAtom a) -> Eigen::Vector3d { return chain.coords.row(atom_row(r, a)).transpose(); };

  set(0, BackboneAtom::N, Eigen::Vector3d::Zero());
  set(0, BackboneAtom::CA, Eigen::Vector3d(kBondNCa, 0.0, 0.0));
  const double t = rad(180.0 - kAngleNCaC);
  set(0, BackboneAtom::C, get(0, BackboneAtom::CA) + kBondCaC * Eigen::Vector3d(std::cos(t), std::sin(t), 0.0));
  for (int r = 0; r < n; ++r) {
    const auto& s = static_cast<std::size_t>(r);
    const Eigen::Vector3d nr = get(r, BackboneAtom::N);
    const Eigen::Vector3d car = get(r, BackboneAtom::CA);
    const Eigen::Vector3d cr = get(r, BackboneAtom::C);
    set(r, BackboneAtom::O, place(nr, car, cr, kBondCO, kAngleCaCO, psi[s] + 180.0));
    if (r + 1 == n) break;
    const double w = omega.empty() ? 180.0 : omega[s];
    const Eigen::Vector3d nn = place(nr, car, cr, kBondCN, kAngleCaCN, psi[s]);
    const Eigen::Vector3d can = place(car, cr, nn, kBondNCa, kAngleCNCa, w);
    const Eigen::Vector3d cn = place(cr, nn, can, kBondCaC, kAngleNCaC, phi[s + 1]);
    set(r + 1, BackboneAtom::N, nn);
    set(r + 1, BackboneAtom::CA, can);
    set(r + 1, BackboneAtom::C, cn);
  }
  chain.validate();
  return chain;
}

BackboneChain synthetic_backbone(int n_residues, std::uint64_t seed) {
  if (n_residues < 1) throw ShapeError("synthetic_backbone needs at least one residue");
  Rng gen = make_stream(seed, 0x5eedULL);
  NormalSampler normal;
  std::vector<double> phi;
  std::vector<double> psi;
  while (static_cast<int>(phi.size()) < n_residues) {
    const auto kind = uniform_index(gen, 3);
    int len = 0;
    double p0 = 0.0;
    double s0 = 0.0;
    double sd = 0.0;
    if (kind == 0) {  // helix
      len = 6 + static_cast<int>(uniform_index(gen, 9));
      p0 = -57.0, s0 = -47.0, sd = 4.0;
    } else if (kind == 1) {  // strand
      len = 4 + static_cast<int>(uniform_index(gen, 6));
      p0 = -120.0, s0 = 130.0, sd = 6.0;
    } else {  // loop
      len = 2 + static_cast<int>(uniform_index(gen, 5));
      sd = 25.0;
    }
    for (int i = 0; i < len && static_cast<int>(phi.size()) < n_residues; ++i) {
      if (kind == 2) {
        const bool turn = uniform_index(gen, 2) == 0;
        p0 = turn ? -80.0 : -70.0;
        s0 = turn ? -10.0 : 150.0;
      }
      phi.push_back(p0 + jitter(normal, gen, sd));
      psi.push_back(s0 + jitter(normal, gen, sd));
    }
  }
  BackboneChain chain = build_backbone(phi, psi);
  const Eigen::RowVector3d centroid = chain.coords.colwise().mean();
  chain.coords.rowwise() -= centroid;
  return chain;
}

Eigen::Matrix3d random_rotation(Rng& gen) {
  NormalSampler normal;
  Eigen::Quaterniond q(normal(gen), normal(gen), normal(gen), normal(gen));
  q.normalize();
  return q.toRotationMatrix();
}

std::vector<BackboneChain> decoy_library(const BackboneChain& target, int count, std::uint64_t seed) {
  target.validate();
  if (count < 0) throw ShapeError("decoy count must be >= 0");
  Eigen::RowVector3d centroid = Eigen::RowVector3d::Zero();
  int present = 0;
  for (int row = 0; row < target.dim(); ++row)
    if (target.present[static_cast<std::size_t>(row)]) {
      centroid += target.coords.row(row);
      ++present;
    }
  if (present > 0) centroid /= present;
  std::vector<BackboneChain> out;
  Rng gen = make_stream(seed, 0xdec0ULL);
  for (int k = 0; k < count; ++k) {
    BackboneChain decoy = synthetic_backbone(target.n_residues, seed * 1000003ULL + static_cast<std::uint64_t>(k) + 1);
    const Eigen::Matrix3d rot = random_rotation(gen);
    decoy.coords = decoy.coords * rot.transpose();
    decoy.coords.rowwise() += centroid;
    decoy.residue_names = target.residue_names;
    decoy.residue_numbers = target.residue_numbers;
    out.push_back(std::move(decoy));
  }
  return out;
}

BackboneChain partial_model(const BackboneChain& target, double delete_fraction, double noise,
                            std::uint64_t seed) {
  target.validate();
  if (!(delete_fraction >= 0.0 && delete_fraction < 1.0)) throw ShapeError("delete_fraction must lie in [0, 1)");
  if (!(noise >= 0.0)) throw ShapeError("noise must be >= 0");
  Rng gen = make_stream(seed, 0x9a27ULL);
  const int n = target.n_residues;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i + 1 < n; ++i) {
    const int j = i + static_cast<int>(uniform_index(gen, static_cast<std::uint64_t>(n - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const int remove = static_cast<int>(std::lround(delete_fraction * n));
  BackboneChain out = target;
  for (int k = 0; k < remove; ++k) {
    const int r = order[static_cast<std::size_t>(k)];
    for (int a = 0; a < kAtomsPerResidue; ++a) {
      out.present[static_cast<std::size_t>(kAtomsPerResidue * r + a)] = 0;
      out.coords.row(kAtomsPerResidue * r + a).setZero();
    }
  }
  NormalSampler normal;
  for (int row = 0; row < out.dim(); ++row) {
    if (!out.present[static_cast<std::size_t>(row)]) continue;
    for (int c = 0; c < 3; ++c) out.coords(row, c) += noise * normal(gen);
  }
  return out;
}

}  // namespace adp
