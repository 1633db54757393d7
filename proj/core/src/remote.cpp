#include "adp/remote.hpp"

#include "adp/error.hpp"
#include "adp/wire.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <sstream>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace adp {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

bool fd_is_socket(int fd) {
  int type = 0;
  socklen_t len = sizeof(type);
  return getsockopt(fd, SOL_SOCKET, SO_TYPE, &type, &len) == 0;
}

}  // namespace

FdTransport::FdTransport(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_fds_(owns_fds), is_socket_(fd_is_socket(write_fd)) {
  // A peer that goes away must surface as an error, not kill the process.
  if (!is_socket_) std::signal(SIGPIPE, SIG_IGN);
}

FdTransport::~FdTransport() { close_fds(); }

void FdTransport::close_fds() {
  if (!owns_fds_) return;
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
  owns_fds_ = false;
}

void FdTransport::write_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = is_socket_ ? ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL)
                                 : ::write(write_fd_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("write to denoiser"), false);
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string FdTransport::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto pos = buffer_.find('\n');
    if (pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw TransportError("timed out waiting for denoiser reply", true);
    pollfd p{read_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("poll"), false);
    }
    if (r == 0) throw TransportError("timed out waiting for denoiser reply", true);
    char chunk[65536];
    const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(errno_text("read from denoiser"), false);
    }
    if (n == 0) throw TransportError("denoiser closed the connection", false);
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

std::pair<std::pair<int, int>, int> spawn(const std::vector<std::string>& argv) {
  if (argv.empty()) throw TransportError("empty command for child denoiser", false);
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw TransportError(errno_text("pipe"), false);
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError(errno_text("pipe"), false);
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(errno_text("fork"), false);
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execvp(args[0], args.data());
    _exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  return {{from_child[0], to_child[1]}, static_cast<int>(pid)};
}

}  // namespace

ChildProcessTransport::ChildProcessTransport(const std::vector<std::string>& argv)
    : ChildProcessTransport(spawn(argv)) {}

ChildProcessTransport::ChildProcessTransport(std::pair<std::pair<int, int>, int> spawned)
    : FdTransport(spawned.first.first, spawned.first.second, true), pid_(spawned.second) {}

ChildProcessTransport::~ChildProcessTransport() {
  // Closing stdin lets a well-behaved server exit on EOF.
  close_fds();
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 200; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

std::unique_ptr<LineTransport> connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw TransportError("cannot resolve " + host + ": " + gai_strerror(rc), false);
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to " + host + ":" + service, true);
  return std::make_unique<FdTransport>(fd, fd, true);
}

RemoteDenoiserClient::RemoteDenoiserClient(std::unique_ptr<LineTransport> transport, int dim,
                                           std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), dim_(dim), timeout_(timeout) {
  transport_->write_line(wire::to_line(wire::Hello{wire::kProtocolVersion, dim}));
  const wire::Frame reply = wire::parse_line(transport_->read_line(timeout_));
  if (const auto* err = std::get_if<wire::ErrorFrame>(&reply))
    throw ProtocolError("handshake rejected: " + err->message, true);
  const auto* ready = std::get_if<wire::Ready>(&reply);
  if (!ready) throw ProtocolError("handshake: expected a 'ready' frame", true);
  if (ready->version != wire::kProtocolVersion)
    throw ProtocolError("handshake: server speaks protocol version " +
                            std::to_string(ready->version) + ", client speaks " +
                            std::to_string(wire::kProtocolVersion),
                        true);
  server_version_ = ready->version;
}

Coords RemoteDenoiserClient::denoise(const Coords& x, double t) {
  require_shape(x, dim_, "remote denoiser input");
  const std::uint64_t id = next_id_++;
  transport_->write_line(wire::to_line(wire::DenoiseRequest{id, t, x}));
  for (;;) {
    const wire::Frame reply = wire::parse_line(transport_->read_line(timeout_));
    if (const auto* err = std::get_if<wire::ErrorFrame>(&reply)) {
      if (err->id != 0 && err->id < id) continue;
      throw Error("remote denoiser error: " + err->message);
    }
    const auto* xhat = std::get_if<wire::XhatResponse>(&reply);
    if (!xhat) throw ProtocolError("expected an 'xhat' frame");
    if (xhat->id < id) continue;
    if (xhat->id != id)
      throw ProtocolError("reply id " + std::to_string(xhat->id) + " does not match request " +
                          std::to_string(id));
    if (xhat->x.rows() != dim_)
      throw ProtocolError("reply has " + std::to_string(xhat->x.rows()) + " rows, expected " +
                          std::to_string(dim_));
    return xhat->x;
  }
}

RemoteDenoiser::RemoteDenoiser(std::unique_ptr<RemoteDenoiserClient> client)
    : client_(std::move(client)) {}

Coords RemoteDenoiser::denoise(const Coords& x, double t) const {
  std::lock_guard lock(mutex_);
  return client_->denoise(x, t);
}

std::unique_ptr<RemoteDenoiser> connect_remote_denoiser(const std::string& address, int dim,
                                                        std::chrono::milliseconds timeout) {
  std::unique_ptr<LineTransport> transport;
  if (address.rfind("tcp:", 0) == 0) {
    const std::string rest = address.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw ConfigError("tcp address must be tcp:HOST:PORT");
    transport = connect_tcp(rest.substr(0, colon), std::stoi(rest.substr(colon + 1)));
  } else if (address.rfind("exec:", 0) == 0) {
    std::istringstream words(address.substr(5));
    std::vector<std::string> argv;
    for (std::string w; words >> w;) argv.push_back(w);
    transport = std::make_unique<ChildProcessTransport>(argv);
  } else {
    throw ConfigError("remote denoiser address must start with tcp: or exec:, got '" + address + "'");
  }
  return std::make_unique<RemoteDenoiser>(
      std::make_unique<RemoteDenoiserClient>(std::move(transport), dim, timeout));
}

}  // namespace adp
