#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tfrw {

/// Base of every error raised by the library. The CLI maps InvalidArgument
/// and ConfigurationError to exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A wavefunction with zero norm: the post-selected branch is empty.
class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// No detection possible (detect weight is exactly zero).
class NoDetection : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, double achieved_error)
      : Error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// |q(r)| was not unimodal on the search interval.
class MultimodalError : public Error {
 public:
  MultimodalError(const std::string& what,
                  std::vector<std::pair<double, double>> brackets)
      : Error(what), brackets_(std::move(brackets)) {}
  const std::vector<std::pair<double, double>>& brackets() const noexcept {
    return brackets_;
  }

 private:
  std::vector<std::pair<double, double>> brackets_;
};

/// Probability mass mapped outside the scale-factor grid.
class SupportTruncation : public Error {
 public:
  SupportTruncation(const std::string& what, double lost_mass)
      : Error(what), lost_mass_(lost_mass) {}
  double lost_mass() const noexcept { return lost_mass_; }

 private:
  double lost_mass_;
};

/// Zero-length cavity (a_OM <= 0).
class SingularityError : public Error {
 public:
  using Error::Error;
};

class CollapseError : public Error {
 public:
  CollapseError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Mirror displacement on or beyond the pole of the rotating-frame map.
class InvalidRange : public Error {
 public:
  using Error::Error;
};

}  // namespace tfrw
