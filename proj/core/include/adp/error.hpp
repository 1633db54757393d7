#pragma once

#include <stdexcept>
#include <string>

namespace adp {

// Base class for every error the engine raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class DegenerateMeasurementError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by an optimizer when the objective blows up.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Transport-level failure talking to a remote denoiser. Timeouts are retriable.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retriable)
      : Error(what), retriable_(retriable) {}
  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

// The peer spoke the wire protocol incorrectly (bad frame, wrong shape, wrong version).
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, bool fatal = false) : Error(what), fatal_(fatal) {}
  bool fatal() const noexcept { return fatal_; }

 private:
  bool fatal_;
};

}  // namespace adp
