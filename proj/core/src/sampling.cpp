#include "adp/sampling.hpp"

#include "adp/error.hpp"
#include "adp/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

namespace adp {

std::vector<int> sample_mask(int n_residues, int k) {
  if (n_residues < 1) throw ConfigError("sample_mask needs at least one residue");
  if (k < 1) throw ConfigError("subsample factor k must be >= 1");
  if (k > n_residues)
    spdlog::warn("subsample factor {} exceeds the chain length {}; observing residue 0 only", k, n_residues);
  std::vector<int> rows;
  for (int r = 0; r < n_residues; r += k)
    for (int a = 0; a < kAtomsPerResidue; ++a) rows.push_back(kAtomsPerResidue * r + a);
  return rows;
}

MaskedLinearMeasurement observe(const BackboneChain& chain, const std::vector<int>& rows,
                                int subsample_factor, double noise_scale) {
  chain.validate();
  MaskedLinearMeasurement meas;
  meas.dim = chain.dim();
  meas.subsample_factor = subsample_factor;
  meas.noise_scale = noise_scale;
  for (int r : rows) {
    if (r < 0 || r >= chain.dim()) throw ShapeError("observed row out of range");
    if (chain.present[static_cast<std::size_t>(r)]) meas.rows.push_back(r);
  }
  meas.observed = meas.select(chain.coords);
  meas.validate();
  return meas;
}

MaskedLinearMeasurement observe_present(const BackboneChain& chain, double noise_scale) {
  std::vector<int> rows(static_cast<std::size_t>(chain.dim()));
  std::iota(rows.begin(), rows.end(), 0);
  return observe(chain, rows, 1, noise_scale);
}

DistanceSet sample_distances(const BackboneChain& chain, int m, std::uint64_t seed, bool include_true) {
  chain.validate();
  const long n = chain.n_residues;
  const long total = n * (n - 1) / 2;
  if (m < 0) throw ConfigError("distance count m must be >= 0");
  if (m > total)
    throw ConfigError("cannot sample " + std::to_string(m) + " distinct pairs from " +
                      std::to_string(n) + " residues (at most " + std::to_string(total) + ")");
  // Partial Fisher-Yates over the linear pair index.
  std::vector<long> index(static_cast<std::size_t>(total));
  std::iota(index.begin(), index.end(), 0L);
  Rng gen = make_stream(seed, 0);
  for (long p = 0; p < m; ++p) {
    const long q = p + static_cast<long>(uniform_index(gen, static_cast<std::uint64_t>(total - p)));
    std::swap(index[static_cast<std::size_t>(p)], index[static_cast<std::size_t>(q)]);
  }
  DistanceSet out;
  out.n_residues = chain.n_residues;
  for (long p = 0; p < m; ++p) {
    // Unrank pair index -> (i, j), i < j, row-major over the upper triangle.
    long k = index[static_cast<std::size_t>(p)];
    int i = 0;
    while (k >= n - 1 - i) {
      k -= n - 1 - i;
      ++i;
    }
    const int j = i + 1 + static_cast<int>(k);
    out.pairs.emplace_back(i, j);
    double length = 0.0;
    if (include_true)
      length = (chain.coords.row(atom_row(i, BackboneAtom::CA)) - chain.coords.row(atom_row(j, BackboneAtom::CA))).norm();
    out.measured.push_back(length);
  }
  out.validate();
  return out;
}

}  // namespace adp
