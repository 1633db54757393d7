#include "adp/wire.hpp"

#include "adp/denoiser.hpp"
#include "adp/error.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace adp::wire {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> make_reverse() {
  std::array<int, 256> table{};
  for (auto& v : table) v = -1;
  for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = i;
  return table;
}
constexpr auto kReverse = make_reverse();

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

using nlohmann::json;

std::uint64_t require_id(const json& j) {
  if (!j.contains("id") || !j["id"].is_number_unsigned())
    throw ProtocolError("frame is missing an unsigned 'id'");
  return j["id"].get<std::uint64_t>();
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                            static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) throw ProtocolError("misplaced base64 padding");
        vals[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw ProtocolError("misplaced base64 padding");
        vals[k] = kReverse[static_cast<unsigned char>(c)];
        if (vals[k] < 0) throw ProtocolError("invalid base64 character");
      }
    }
    const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out += static_cast<char>((v >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((v >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(v & 0xff);
  }
  return out;
}

std::string encode_coords(const Coords& x) {
  std::string bytes(static_cast<std::size_t>(x.size()) * 4, '\0');
  std::size_t off = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (int c = 0; c < 3; ++c) {
      const std::uint32_t v = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(x(i, c))));
      std::memcpy(bytes.data() + off, &v, 4);
      off += 4;
    }
  return base64_encode(bytes);
}

Coords decode_coords(std::string_view encoded) {
  const std::string bytes = base64_decode(encoded);
  if (bytes.size() % 12 != 0) throw ProtocolError("coordinate payload is not a multiple of 3 floats");
  const Eigen::Index rows = static_cast<Eigen::Index>(bytes.size() / 12);
  Coords x(rows, 3);
  std::size_t off = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (int c = 0; c < 3; ++c) {
      std::uint32_t v;
      std::memcpy(&v, bytes.data() + off, 4);
      off += 4;
      x(i, c) = std::bit_cast<float>(to_little_endian(v));
    }
  return x;
}

std::string to_line(const Frame& frame) {
  json j;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Hello>) {
          j = {{"type", "hello"}, {"version", f.version}, {"dim", f.dim}};
        } else if constexpr (std::is_same_v<T, Ready>) {
          j = {{"type", "ready"}, {"version", f.version}};
        } else if constexpr (std::is_same_v<T, DenoiseRequest>) {
          j = {{"type", "denoise"}, {"id", f.id}, {"t", f.t}, {"x", encode_coords(f.x)}};
        } else if constexpr (std::is_same_v<T, XhatResponse>) {
          j = {{"type", "xhat"}, {"id", f.id}, {"x", encode_coords(f.x)}};
        } else {
          j = {{"type", "error"}, {"id", f.id}, {"message", f.message}};
        }
      },
      frame);
  return j.dump();
}

Frame parse_line(std::string_view line, std::uint64_t* id_out) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("frame is not a JSON object");
  if (id_out && j.contains("id") && j["id"].is_number_unsigned()) *id_out = j["id"].get<std::uint64_t>();
  if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError("frame has no 'type'");
  const std::string type = j["type"].get<std::string>();
  try {
    if (type == "hello") return Hello{j.at("version").get<int>(), j.at("dim").get<int>()};
    if (type == "ready") return Ready{j.at("version").get<int>()};
    if (type == "denoise")
      return DenoiseRequest{require_id(j), j.at("t").get<double>(),
                            decode_coords(j.at("x").get<std::string>())};
    if (type == "xhat") return XhatResponse{require_id(j), decode_coords(j.at("x").get<std::string>())};
    if (type == "error") return ErrorFrame{j.value("id", std::uint64_t{0}), j.at("message").get<std::string>()};
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad '") + type + "' frame: " + e.what());
  }
  throw ProtocolError("unknown frame type '" + type + "'");
}

void serve(std::istream& in, std::ostream& out, const Denoiser& model) {
  int dim = -1;
  std::string line;
  auto reply = [&](const Frame& f) { out << to_line(f) << '\n' << std::flush; };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::uint64_t id = 0;
    try {
      Frame frame = parse_line(line, &id);
      if (auto* hello = std::get_if<Hello>(&frame)) {
        if (hello->version != kProtocolVersion) {
          reply(ErrorFrame{0, "unsupported protocol version " + std::to_string(hello->version)});
          continue;
        }
        dim = hello->dim;
        reply(Ready{});
      } else if (auto* req = std::get_if<DenoiseRequest>(&frame)) {
        if (dim < 0) throw ProtocolError("denoise before hello");
        if (req->x.rows() != dim)
          throw ProtocolError("request has " + std::to_string(req->x.rows()) + " rows, expected " +
                              std::to_string(dim));
        reply(XhatResponse{req->id, model.denoise(req->x, req->t)});
      } else {
        throw ProtocolError("unexpected frame from client");
      }
    } catch (const std::exception& e) {
      reply(ErrorFrame{id, e.what()});
    }
  }
}

}  // namespace adp::wire
