#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ccbf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModelError : public Error {
 public:
  using Error::Error;
};

class NumericsError : public Error {
 public:
  NumericsError(std::size_t node, const std::string& what)
      : Error(what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

class EmptyRegionError : public Error {
 public:
  using Error::Error;
};

/// Alternating projection hit its sweep cap. Carries the last iterate.
class GeometryConvergenceError : public Error {
 public:
  GeometryConvergenceError(const std::string& what, Eigen::VectorXd last_iterate,
                           double residual)
      : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}
  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class ProtocolStateError : public Error {
 public:
  using Error::Error;
};

class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

class ProtocolStallError : public Error {
 public:
  ProtocolStallError(const std::string& what, std::string ledger_dump)
      : Error(what), ledger_dump_(std::move(ledger_dump)) {}
  const std::string& ledger_dump() const { return ledger_dump_; }

 private:
  std::string ledger_dump_;
};

}  // namespace ccbf
