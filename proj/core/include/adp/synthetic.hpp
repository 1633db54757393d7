#pragma once

#include "adp/chain.hpp"
#include "adp/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace adp {

// Backbone from dihedral angles (degrees) with ideal bond lengths and angles. phi[0] and the
// last psi only orient the terminal atoms. omega defaults to trans.
BackboneChain build_backbone(const std::vector<double>& phi, const std::vector<double>& psi,
                             const std::vector<double>& omega = {});

// Random chain of helix, strand and loop segments, centred at the origin.
BackboneChain synthetic_backbone(int n_residues, std::uint64_t seed);

// Uniformly distributed proper rotation.
Eigen::Matrix3d random_rotation(Rng& gen);

// `count` random chains with the target's length, each centred on the target centroid and
// randomly rotated.
std::vector<BackboneChain> decoy_library(const BackboneChain& target, int count, std::uint64_t seed);

// Copy of `target` with round(delete_fraction * N) residues marked absent (zeroed) and isotropic
// Gaussian noise of standard deviation `noise` (Angstrom per coordinate) on the rest.
BackboneChain partial_model(const BackboneChain& target, double delete_fraction, double noise,
                            std::uint64_t seed);

}  // namespace adp
