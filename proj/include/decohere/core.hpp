#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace decohere {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Eigenvalue floor applied before taking logarithms of rank-deficient states.
inline constexpr double kDefaultFloor = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimensions or index ranges inconsistent with the composite-space layout.
class LayoutError : public Error {
 public:
  using Error::Error;
};

// Inputs that violate a documented precondition (weights, amplitudes, config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical invariant drifted beyond tolerance during a computation.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace decohere
