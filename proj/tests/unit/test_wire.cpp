#include "../support/oracles.hpp"

#include <adp/denoiser.hpp>
#include <adp/error.hpp>
#include <adp/wire.hpp>

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

namespace adp::wire {
namespace {

TEST(Base64, Rfc4648Vectors) {
  const std::pair<const char*, const char*> cases[] = {
      {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="},
      {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, coded] : cases) {
    EXPECT_EQ(base64_encode(plain), coded);
    EXPECT_EQ(base64_decode(coded), plain);
  }
}

TEST(Base64, AllByteValuesRoundTrip) {
  std::string bytes;
  for (int i = 0; i < 256; ++i) bytes.push_back(static_cast<char>(i));
  EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
}

TEST(Base64, RejectsMalformedText) {
  EXPECT_THROW(base64_decode("Zm9v!"), ProtocolError);
  EXPECT_THROW(base64_decode("Zm9"), ProtocolError);
  EXPECT_THROW(base64_decode("Zg=a"), ProtocolError);
}

TEST(Coords, LittleEndianFloat32RowMajor) {
  Coords x(2, 3);
  x << 1.0, -2.5, 3.25, 0.0, 1e-3, 7.0;
  const std::string bytes = base64_decode(encode_coords(x));
  ASSERT_EQ(bytes.size(), 24u);
  for (int i = 0; i < 6; ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + 4 * i);
    const std::uint32_t word = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &word, 4);
    EXPECT_EQ(f, static_cast<float>(x(i / 3, i % 3)));
  }
  const Coords back = decode_coords(encode_coords(x));
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-7 * 7.0);
  EXPECT_THROW(decode_coords(base64_encode("12345678")), ProtocolError);
}

TEST(Frames, RoundTripEveryType) {
  const Coords x = testing::random_coords(8, 1);
  {
    const Frame f = parse_line(to_line(Hello{1, 32}));
    ASSERT_TRUE(std::holds_alternative<Hello>(f));
    EXPECT_EQ(std::get<Hello>(f).dim, 32);
  }
  EXPECT_EQ(std::get<Ready>(parse_line(to_line(Ready{}))).version, kProtocolVersion);
  {
    const auto r = std::get<DenoiseRequest>(parse_line(to_line(DenoiseRequest{42, 0.25, x})));
    EXPECT_EQ(r.id, 42u);
    EXPECT_EQ(r.t, 0.25);
    EXPECT_EQ(r.x, x.cast<float>().cast<double>());
  }
  EXPECT_EQ(std::get<XhatResponse>(parse_line(to_line(XhatResponse{7, x}))).id, 7u);
  const auto e = std::get<ErrorFrame>(parse_line(to_line(ErrorFrame{3, "boom"})));
  EXPECT_EQ(e.id, 3u);
  EXPECT_EQ(e.message, "boom");
}

TEST(Frames, OneLinePerFrame) {
  const std::string line = to_line(DenoiseRequest{1, 0.5, testing::random_coords(400, 2)});
  EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(Frames, MalformedInputThrowsWithRecoveredId) {
  std::uint64_t id = 0;
  EXPECT_THROW(parse_line("not json", &id), ProtocolError);
  EXPECT_THROW(parse_line("[1,2]"), ProtocolError);
  EXPECT_THROW(parse_line(R"({"id":9})"), ProtocolError);
  EXPECT_THROW(parse_line(R"({"type":"bogus","id":5})", &id), ProtocolError);
  EXPECT_EQ(id, 5u);
  EXPECT_THROW(parse_line(R"({"type":"denoise","id":6,"t":0.5})", &id), ProtocolError);
  EXPECT_EQ(id, 6u);
}

std::vector<Frame> run_server(const std::string& input, const Denoiser& model) {
  std::istringstream in(input);
  std::ostringstream out;
  serve(in, out, model);
  std::vector<Frame> frames;
  std::istringstream lines(out.str());
  std::string line;
  while (std::getline(lines, line)) frames.push_back(parse_line(line));
  return frames;
}

TEST(Serve, HandshakeThenEcho) {
  const Coords x = testing::random_coords(8, 3);
  const std::string input = to_line(Hello{1, 8}) + "\n" + to_line(DenoiseRequest{1, 0.5, x}) + "\n";
  const auto frames = run_server(input, EchoDenoiser());
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<Ready>(frames[0]));
  const auto& xhat = std::get<XhatResponse>(frames[1]);
  EXPECT_EQ(xhat.id, 1u);
  EXPECT_EQ(xhat.x, x.cast<float>().cast<double>());
}

TEST(Serve, ErrorsKeepTheStreamOpen) {
  const Coords x = testing::random_coords(8, 4);
  std::string input;
  input += to_line(DenoiseRequest{1, 0.5, x}) + "\n";            // before hello
  input += to_line(Hello{1, 8}) + "\n";
  input += "{garbage\n";
  input += R"({"type":"mystery","id":4})" "\n";
  input += to_line(DenoiseRequest{5, 0.5, testing::random_coords(4, 1)}) + "\n";  // wrong rows
  input += to_line(DenoiseRequest{6, 0.5, x}) + "\n";
  const auto frames = run_server(input, EchoDenoiser());
  ASSERT_EQ(frames.size(), 6u);
  EXPECT_EQ(std::get<ErrorFrame>(frames[0]).id, 1u);
  EXPECT_TRUE(std::holds_alternative<Ready>(frames[1]));
  EXPECT_TRUE(std::holds_alternative<ErrorFrame>(frames[2]));
  EXPECT_EQ(std::get<ErrorFrame>(frames[3]).id, 4u);
  EXPECT_EQ(std::get<ErrorFrame>(frames[4]).id, 5u);
  EXPECT_EQ(std::get<XhatResponse>(frames[5]).id, 6u);
}

TEST(Serve, VersionMismatchIsAnErrorFrame) {
  const auto frames = run_server(to_line(Hello{2, 8}) + "\n", EchoDenoiser());
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_NE(std::get<ErrorFrame>(frames[0]).message.find("version"), std::string::npos);
}

TEST(Serve, EveryRequestAnsweredOnce) {
  std::string input = to_line(Hello{1, 4}) + "\n";
  for (std::uint64_t id = 1; id <= 50; ++id) input += to_line(DenoiseRequest{id, 0.1, testing::random_coords(4, id)}) + "\n";
  const auto frames = run_server(input, ZeroDenoiser());
  ASSERT_EQ(frames.size(), 51u);
  for (std::uint64_t id = 1; id <= 50; ++id) {
    const auto& r = std::get<XhatResponse>(frames[id]);
    EXPECT_EQ(r.id, id);
    EXPECT_EQ(r.x.cwiseAbs().maxCoeff(), 0.0);
  }
}

}  // namespace
}  // namespace adp::wire
