#pragma once

#include "adp/chain.hpp"

#include <string>
#include <string_view>

namespace adp {

// Reads the N, CA, C, O atoms of the first chain of the first model. Residues are ordered by
// sequence number (reordered with a warning when the file is not monotonic) and numbering gaps
// are filled with unmodeled residues. A residue missing any of the four atoms is marked absent on
// all four rows; coordinates of the atoms it does have are kept. Throws ParseError when there are
// no ATOM records or a fixed-column field is malformed.
BackboneChain parse_backbone(std::string_view pdb_text);
BackboneChain read_backbone(const std::string& path);

// Backbone-only ATOM records for present rows, occupancy 1.00, B-factor 0.00.
std::string format_backbone(const BackboneChain& chain);
// Atomic write (temporary file, then rename).
void write_backbone(const BackboneChain& chain, const std::string& path);

// Writes `contents` to `path` through a temporary file in the same directory and a rename.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace adp
