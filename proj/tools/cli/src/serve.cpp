#include "adp/cli/app.hpp"

#include <adp/error.hpp>
#include <adp/pdb.hpp>
#include <adp/wire.hpp>

#include <spdlog/spdlog.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <csignal>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <streambuf>

namespace adp::cli {

namespace {

// Buffered stream over a connected socket.
class SocketBuf final : public std::streambuf {
 public:
  explicit SocketBuf(int fd) : fd_(fd) {
    setg(in_, in_, in_);
    setp(out_, out_ + sizeof(out_));
  }
  ~SocketBuf() override { sync(); }

 protected:
  int_type underflow() override {
    const ssize_t n = ::recv(fd_, in_, sizeof(in_), 0);
    if (n <= 0) return traits_type::eof();
    setg(in_, in_, in_ + n);
    return traits_type::to_int_type(in_[0]);
  }
  int_type overflow(int_type ch) override {
    if (sync() != 0) return traits_type::eof();
    if (!traits_type::eq_int_type(ch, traits_type::eof())) {
      *pptr() = traits_type::to_char_type(ch);
      pbump(1);
    }
    return traits_type::not_eof(ch);
  }
  int sync() override {
    const char* p = pbase();
    while (p < pptr()) {
      const ssize_t n = ::send(fd_, p, static_cast<std::size_t>(pptr() - p), MSG_NOSIGNAL);
      if (n <= 0) return -1;
      p += n;
    }
    setp(out_, out_ + sizeof(out_));
    return 0;
  }

 private:
  int fd_;
  char in_[65536];
  char out_[65536];
};

std::unique_ptr<Denoiser> make_model(const ServeOptions& options) {
  if (options.model == "echo") return std::make_unique<EchoDenoiser>();
  if (options.model == "zeros") return std::make_unique<ZeroDenoiser>();
  if (options.model == "gaussian") {
    if (options.mu_path.empty()) throw ConfigError("serve-echo --model gaussian needs --mu PDB");
    const BackboneChain mu = read_backbone(options.mu_path);
    const CorrelatedPrior prior = CorrelatedPrior::calibrated(mu.n_residues);
    return std::make_unique<GaussianLibraryDenoiser>(prior, NoiseSchedule{}, std::vector<Coords>{mu.coords},
                                                     options.spread);
  }
  throw ConfigError("unknown serve-echo model '" + options.model + "' (echo, zeros or gaussian)");
}

}  // namespace

int cmd_serve_echo(const ServeOptions& options, std::istream& in, std::ostream& out) {
  const auto model = make_model(options);
  if (options.listen.empty()) {
    wire::serve(in, out, *model);
    return kSuccess;
  }
  if (options.listen.rfind("tcp:", 0) != 0) throw ConfigError("--listen must be tcp:PORT");
  const int port = std::stoi(options.listen.substr(4));
  std::signal(SIGPIPE, SIG_IGN);
  const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
  if (sock < 0) throw Error("socket: " + std::string(std::strerror(errno)));
  const int one = 1;
  ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(sock, 4) != 0) {
    ::close(sock);
    throw Error("cannot listen on port " + std::to_string(port) + ": " + std::strerror(errno));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len);
  const int bound = ntohs(addr.sin_port);
  spdlog::info("serving {} on 127.0.0.1:{}", model->name(), bound);
  if (!options.port_file.empty()) write_file_atomic(options.port_file, std::to_string(bound) + "\n");
  for (int served = 0; options.max_connections == 0 || served < options.max_connections; ++served) {
    const int conn = ::accept(sock, nullptr, nullptr);
    if (conn < 0) {
      if (errno == EINTR) continue;
      break;
    }
    {
      SocketBuf buf(conn);
      std::istream sin(&buf);
      std::ostream sout(&buf);
      wire::serve(sin, sout, *model);
    }
    ::close(conn);
  }
  ::close(sock);
  return kSuccess;
}

}  // namespace adp::cli
