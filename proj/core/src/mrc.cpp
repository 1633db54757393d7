#include "adp/mrc.hpp"

#include "adp/error.hpp"
#include "adp/pdb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>

namespace adp {

namespace {

static_assert(std::endian::native == std::endian::little, "MRC I/O assumes a little-endian host");

constexpr std::size_t kHeaderBytes = 1024;
constexpr char kResolutionLabel[] = "adp resolution=";

void put_i32(std::string& buf, int word, std::int32_t v) { std::memcpy(&buf[4 * (word - 1)], &v, 4); }
void put_f32(std::string& buf, int word, float v) { std::memcpy(&buf[4 * (word - 1)], &v, 4); }

std::int32_t get_i32(std::string_view buf, int word) {
  std::int32_t v = 0;
  std::memcpy(&v, buf.data() + 4 * (word - 1), 4);
  return v;
}
float get_f32(std::string_view buf, int word) {
  float v = 0.0f;
  std::memcpy(&v, buf.data() + 4 * (word - 1), 4);
  return v;
}

}  // namespace

std::string encode_mrc(const DensityMap& map) {
  map.validate();
  const std::size_t n = map.voxel_count();
  std::string buf(kHeaderBytes + 4 * n, '\0');
  double lo = INFINITY;
  double hi = -INFINITY;
  double sum = 0.0;
  for (double v : map.values) {
    const double f = static_cast<float>(v);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    sum += f;
  }
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : map.values) {
    const double d = static_cast<float>(v) - mean;
    sq += d * d;
  }
  const int d = map.size;
  for (int w = 1; w <= 3; ++w) put_i32(buf, w, d);
  put_i32(buf, 4, 2);
  for (int w = 5; w <= 7; ++w) put_i32(buf, w, 0);
  for (int w = 8; w <= 10; ++w) put_i32(buf, w, d);
  for (int w = 11; w <= 13; ++w) put_f32(buf, w, static_cast<float>(d * map.voxel_size));
  for (int w = 14; w <= 16; ++w) put_f32(buf, w, 90.0f);
  put_i32(buf, 17, 1);
  put_i32(buf, 18, 2);
  put_i32(buf, 19, 3);
  put_f32(buf, 20, static_cast<float>(lo));
  put_f32(buf, 21, static_cast<float>(hi));
  put_f32(buf, 22, static_cast<float>(mean));
  put_i32(buf, 23, 1);
  put_i32(buf, 24, 0);
  put_i32(buf, 28, 20140);
  for (int a = 0; a < 3; ++a) put_f32(buf, 50 + a, static_cast<float>(map.origin(a)));
  std::memcpy(&buf[4 * 52], "MAP ", 4);
  buf[4 * 53] = 0x44;
  buf[4 * 53 + 1] = 0x44;
  put_f32(buf, 55, static_cast<float>(std::sqrt(sq / static_cast<double>(n))));
  if (map.resolution > 0.0) {
    put_i32(buf, 56, 1);
    char label[81];
    std::snprintf(label, sizeof(label), "%s%.6g", kResolutionLabel, map.resolution);
    std::memcpy(&buf[4 * 56], label, std::strlen(label));
  } else {
    put_i32(buf, 56, 0);
  }
  for (std::size_t v = 0; v < n; ++v) {
    const float f = static_cast<float>(map.values[v]);
    std::memcpy(&buf[kHeaderBytes + 4 * v], &f, 4);
  }
  return buf;
}

DensityMap decode_mrc(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("MRC file shorter than its 1024-byte header");
  const unsigned char stamp = static_cast<unsigned char>(bytes[4 * 53]);
  if (stamp == 0x11) throw FormatError("big-endian MRC files are not supported");
  const int nx = get_i32(bytes, 1);
  const int ny = get_i32(bytes, 2);
  const int nz = get_i32(bytes, 3);
  const int mode = get_i32(bytes, 4);
  if (mode != 2) throw FormatError("unsupported MRC mode " + std::to_string(mode) + " (only mode 2)");
  if (nx < 2 || nx != ny || nx != nz) throw FormatError("MRC grid must be cubic with at least 2 voxels per side");
  if (get_i32(bytes, 17) != 1 || get_i32(bytes, 18) != 2 || get_i32(bytes, 19) != 3)
    throw FormatError("MRC axis order must be X, Y, Z");
  const int mx = get_i32(bytes, 8);
  const float cella = get_f32(bytes, 11);
  if (mx <= 0 || !(cella > 0.0f)) throw FormatError("MRC header has no valid cell size");
  if (get_f32(bytes, 12) != cella || get_f32(bytes, 13) != cella || get_i32(bytes, 9) != mx ||
      get_i32(bytes, 10) != mx)
    throw FormatError("MRC cell must be cubic");
  const int nsymbt = get_i32(bytes, 24);
  if (nsymbt < 0) throw FormatError("negative MRC extended header size");

  DensityMap map;
  map.size = nx;
  map.voxel_size = static_cast<double>(cella) / mx;
  Eigen::Vector3d origin(get_f32(bytes, 50), get_f32(bytes, 51), get_f32(bytes, 52));
  if (origin.isZero(0.0))
    for (int a = 0; a < 3; ++a) origin(a) = get_i32(bytes, 5 + a) * map.voxel_size;
  map.origin = origin;

  const int labels = std::clamp(get_i32(bytes, 56), 0, 10);
  for (int l = 0; l < labels; ++l) {
    const std::string_view label = bytes.substr(4 * 56 + 80 * static_cast<std::size_t>(l), 80);
    const std::size_t at = label.find(kResolutionLabel);
    if (at == std::string_view::npos) continue;
    map.resolution = std::atof(std::string(label.substr(at + std::strlen(kResolutionLabel))).c_str());
    break;
  }

  const std::size_t n = map.voxel_count();
  const std::size_t data = kHeaderBytes + static_cast<std::size_t>(nsymbt);
  if (bytes.size() < data + 4 * n) throw FormatError("MRC file is truncated");
  map.values.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    float f = 0.0f;
    std::memcpy(&f, bytes.data() + data + 4 * v, 4);
    map.values[v] = f;
  }
  map.validate();
  return map;
}

void write_mrc(const DensityMap& map, const std::string& path) { write_file_atomic(path, encode_mrc(map)); }

DensityMap read_mrc(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const ParseError& e) {
    throw FormatError(e.what());
  }
  return decode_mrc(bytes);
}

}  // namespace adp
