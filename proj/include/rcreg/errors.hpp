#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rcreg {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or lengths that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the admissible set of values.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Least-squares design without full column rank.
class SingularDesign : public Error {
 public:
  using Error::Error;
};

// Empirical Gram matrix of the second-stage design cannot be inverted.
class SingularGram : public Error {
 public:
  using Error::Error;
};

// Square linear system with a repeated node or zero pivot.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

// Support geometry too poor to identify the covariance matrix.
class NotIdentifiable : public Error {
 public:
  NotIdentifiable(const std::string& what, std::vector<int> deficient)
      : Error(what), deficient_coordinates(std::move(deficient)) {}

  std::vector<int> deficient_coordinates;  // 1-based covariate indices
};

// Cartesian product of supports exceeds the enumeration cap.
class ExplosionError : public Error {
 public:
  using Error::Error;
};

// No covariance matrix is consistent with the identified blocks.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcreg
