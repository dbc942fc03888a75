#pragma once

#include <stdexcept>
#include <string>

namespace ctf {

// Base class for every failure the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input lies on or outside the image domain of a transform.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix sizes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Factorization or normalization failure (Cholesky after jitter, mass
// underflow, cdf bracket not found, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while writing results.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctf
