#include "adp/chain.hpp"

#include "adp/error.hpp"

#include <algorithm>
#include <string>

namespace adp {

BackboneChain::BackboneChain(int residues)
    : n_residues(residues),
      coords(Coords::Zero(kAtomsPerResidue * residues, 3)),
      present(static_cast<std::size_t>(kAtomsPerResidue * residues), 1),
      residue_names(static_cast<std::size_t>(residues), "GLY") {
  residue_numbers.resize(static_cast<std::size_t>(residues));
  for (int r = 0; r < residues; ++r) residue_numbers[static_cast<std::size_t>(r)] = r + 1;
}

BackboneChain::BackboneChain(Coords xyz, std::vector<std::uint8_t> mask)
    : BackboneChain(static_cast<int>(xyz.rows()) / kAtomsPerResidue) {
  if (xyz.rows() % kAtomsPerResidue != 0)
    throw ShapeError("coordinate rows must be a multiple of 4, got " + std::to_string(xyz.rows()));
  coords = std::move(xyz);
  if (!mask.empty()) present = std::move(mask);
  validate();
}

bool BackboneChain::residue_present(int residue) const {
  const auto first = present.begin() + kAtomsPerResidue * residue;
  return std::all_of(first, first + kAtomsPerResidue, [](std::uint8_t p) { return p != 0; });
}

int BackboneChain::count_present_residues() const {
  int count = 0;
  for (int r = 0; r < n_residues; ++r) count += residue_present(r) ? 1 : 0;
  return count;
}

void BackboneChain::validate() const {
  if (n_residues < 1) throw ShapeError("chain must have at least one residue");
  require_shape(coords, dim(), "chain coordinates");
  if (static_cast<int>(present.size()) != dim())
    throw ShapeError("present mask has " + std::to_string(present.size()) + " entries, expected " +
                     std::to_string(dim()));
  if (static_cast<int>(residue_names.size()) != n_residues ||
      static_cast<int>(residue_numbers.size()) != n_residues)
    throw ShapeError("per-residue metadata length does not match residue count");
}

void require_shape(const Coords& m, int rows, const char* what) {
  if (m.rows() != rows)
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + " rows, got " +
                     std::to_string(m.rows()));
  if (!m.allFinite()) throw ShapeError(std::string(what) + ": non-finite entries");
}

}  // namespace adp
