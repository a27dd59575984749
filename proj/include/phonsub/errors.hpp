#pragma once

#include <stdexcept>
#include <string>

namespace phonsub {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical parameter is outside its admissible domain, or a derived
/// quantity came out non-finite. The message names the offending field.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The drift matrix is not (strictly) stable where stability is required.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// The field mode carries no excitation above vacuum, so the photon
/// subtraction event has vanishing probability and no conditional state
/// is defined.
class ZeroHeraldingError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix (or block) violates the uncertainty principle
/// beyond tolerance.
class UnphysicalStateError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluation routes of the same integral disagree beyond
/// tolerance.
class NumericalIntegrityError : public Error {
 public:
  using Error::Error;
};

/// The truncated Fock space is too small to hold the requested state.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A run configuration is malformed (unknown key, missing key, bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace phonsub
