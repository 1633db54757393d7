#pragma once

// Newline-delimited JSON frames for the denoiser bridge. One object per line:
//
//   {"type":"hello","version":1,"dim":4N}         client -> server
//   {"type":"ready","version":1}                  server -> client
//   {"type":"denoise","id":u64,"t":float,"x":B64} client -> server
//   {"type":"xhat","id":u64,"x":B64}              server -> client
//   {"type":"error","id":u64,"message":string}    server -> client
//
// B64 is standard base64 (no line breaks) of little-endian float32 values, row-major 4N x 3.

#include "adp/chain.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace adp {

class Denoiser;

namespace wire {

inline constexpr int kProtocolVersion = 1;

struct Hello {
  int version = kProtocolVersion;
  int dim = 0;
};
struct Ready {
  int version = kProtocolVersion;
};
struct DenoiseRequest {
  std::uint64_t id = 0;
  double t = 0.0;
  Coords x;
};
struct XhatResponse {
  std::uint64_t id = 0;
  Coords x;
};
struct ErrorFrame {
  std::uint64_t id = 0;
  std::string message;
};

using Frame = std::variant<Hello, Ready, DenoiseRequest, XhatResponse, ErrorFrame>;

std::string base64_encode(std::string_view bytes);
// Throws ProtocolError on characters outside the base64 alphabet or bad padding.
std::string base64_decode(std::string_view text);

// Row-major float32 little-endian payload.
std::string encode_coords(const Coords& x);
// Throws ProtocolError when the payload length is not a multiple of 12 bytes.
Coords decode_coords(std::string_view encoded);

// Serialized frame without the trailing newline.
std::string to_line(const Frame& frame);
// Throws ProtocolError on malformed JSON, unknown type or missing fields.
// `id_out` receives the request id when it can be recovered, for error replies.
Frame parse_line(std::string_view line, std::uint64_t* id_out = nullptr);

// Answers frames from `in` on `out` until EOF. Malformed or unexpected frames get an error
// frame and the stream stays open. Shape checks use the dim announced in the handshake.
void serve(std::istream& in, std::ostream& out, const Denoiser& model);

}  // namespace wire
}  // namespace adp
