#pragma once

#include "adp/chain.hpp"
#include "adp/distance.hpp"
#include "adp/linear.hpp"

#include <cstdint>
#include <vector>

namespace adp {

// Atom rows of residues 0, k, 2k, ...; k > n_residues selects residue 0 only, with a warning.
std::vector<int> sample_mask(int n_residues, int k);

// Masked measurement of `chain` on `rows`, dropping rows the chain does not have.
MaskedLinearMeasurement observe(const BackboneChain& chain, const std::vector<int>& rows,
                                int subsample_factor = 1, double noise_scale = 1.0);

// All present rows of `chain`.
MaskedLinearMeasurement observe_present(const BackboneChain& chain, double noise_scale = 1.0);

// m unordered CA pairs drawn uniformly without replacement. Measured lengths come from `chain`
// when include_true, and are zero otherwise. Throws ConfigError when m > N(N-1)/2.
DistanceSet sample_distances(const BackboneChain& chain, int m, std::uint64_t seed, bool include_true = true);

}  // namespace adp
