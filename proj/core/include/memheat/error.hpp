#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace memheat {

/// Invalid argument or violated precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The kernel pair violates one of the admissibility conditions on the sector.
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// J(lambda) = 1 + N^(lambda) vanished at a point where the symbol was requested.
class JVanishingError : public AdmissibilityError {
 public:
  explicit JVanishingError(std::complex<double> lambda);
  std::complex<double> lambda() const noexcept { return lambda_; }

 private:
  std::complex<double> lambda_;
};

/// A numerical procedure failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double est_error);
  double est_error() const noexcept { return est_error_; }

 private:
  double est_error_;
};

/// The implicit step of a Volterra solve broke down at `index`.
class VolterraError : public NumericalError {
 public:
  VolterraError(const std::string& what, std::size_t index);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace memheat
