#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace adp {

// 4N x 3 coordinates, one row per backbone atom in (N, CA, C, O) order.
using Coords = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

inline constexpr int kAtomsPerResidue = 4;

enum class BackboneAtom : int { N = 0, CA = 1, C = 2, O = 3 };

inline constexpr std::array<const char*, kAtomsPerResidue> kBackboneAtomNames{"N", "CA", "C", "O"};
inline constexpr std::array<int, kAtomsPerResidue> kBackboneAtomicNumbers{7, 6, 6, 8};

constexpr int atom_row(int residue, BackboneAtom atom) {
  return kAtomsPerResidue * residue + static_cast<int>(atom);
}

struct BackboneChain {
  int n_residues = 0;
  Coords coords;
  // One flag per atom row; false rows are zero-filled and excluded from losses and metrics.
  std::vector<std::uint8_t> present;
  // Per-residue metadata used when writing PDB files.
  std::vector<std::string> residue_names;
  std::vector<int> residue_numbers;
  char chain_id = 'A';

  BackboneChain() = default;
  explicit BackboneChain(int residues);
  BackboneChain(Coords xyz, std::vector<std::uint8_t> mask);

  int dim() const { return kAtomsPerResidue * n_residues; }
  bool residue_present(int residue) const;
  int count_present_residues() const;

  // Throws ShapeError when the invariants (row count, mask length, finiteness) fail.
  void validate() const;
};

// Throws ShapeError unless `m` has exactly `rows` rows and only finite entries.
void require_shape(const Coords& m, int rows, const char* what);

}  // namespace adp
