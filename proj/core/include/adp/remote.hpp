#pragma once

#include "adp/denoiser.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace adp {

// A bidirectional line-oriented byte stream.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual void write_line(std::string_view line) = 0;
  // Throws TransportError(retriable = true) when no full line arrives within `timeout`,
  // TransportError(retriable = false) on EOF or I/O failure.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

// Reads from one file descriptor and writes to another. Owns neither unless `owns_fds`.
class FdTransport : public LineTransport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns_fds);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void write_line(std::string_view line) override;
  std::string read_line(std::chrono::milliseconds timeout) override;

 protected:
  void close_fds();

 private:
  int read_fd_;
  int write_fd_;
  bool owns_fds_;
  bool is_socket_ = false;
  std::string buffer_;
};

// Spawns `argv` with its stdin/stdout connected to the transport.
class ChildProcessTransport final : public FdTransport {
 public:
  explicit ChildProcessTransport(const std::vector<std::string>& argv);
  ~ChildProcessTransport() override;

 private:
  explicit ChildProcessTransport(std::pair<std::pair<int, int>, int> spawned);
  int pid_;
};

std::unique_ptr<LineTransport> connect_tcp(const std::string& host, int port);

// Synchronous client: one request in flight, replies matched by id. Stale replies to
// requests that previously timed out are skipped.
class RemoteDenoiserClient {
 public:
  // Performs the handshake. A version mismatch throws ProtocolError(fatal = true).
  RemoteDenoiserClient(std::unique_ptr<LineTransport> transport, int dim,
                       std::chrono::milliseconds timeout = std::chrono::seconds(30));

  Coords denoise(const Coords& x, double t);
  int dim() const { return dim_; }
  int server_version() const { return server_version_; }

 private:
  std::unique_ptr<LineTransport> transport_;
  int dim_;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_id_ = 1;
  int server_version_ = 0;
};

// Denoiser adapter over a client. Concurrent callers are serialized on one connection.
class RemoteDenoiser final : public Denoiser {
 public:
  explicit RemoteDenoiser(std::unique_ptr<RemoteDenoiserClient> client);

  Coords denoise(const Coords& x, double t) const override;
  std::string name() const override { return "remote"; }

 private:
  mutable std::mutex mutex_;
  std::unique_ptr<RemoteDenoiserClient> client_;
};

// Address forms: "tcp:HOST:PORT" or "exec:PROGRAM ARG..." (whitespace separated).
std::unique_ptr<RemoteDenoiser> connect_remote_denoiser(
    const std::string& address, int dim,
    std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace adp
