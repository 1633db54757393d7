#pragma once

#include "adp/density.hpp"

#include <string>
#include <string_view>

namespace adp {

// MRC2014, mode 2 (float32, little-endian), cubic grid with X fastest. The origin goes into
// header words 50-52 with nxstart = nystart = nzstart = 0; the declared resolution, when set,
// is kept in the first label.
std::string encode_mrc(const DensityMap& map);
// Throws FormatError on a truncated file, a mode other than 2, big-endian data, or a non-cubic
// grid. The origin is read from words 50-52, falling back to nxstart * voxel when they are 0.
DensityMap decode_mrc(std::string_view bytes);

void write_mrc(const DensityMap& map, const std::string& path);
DensityMap read_mrc(const std::string& path);

}  // namespace adp
