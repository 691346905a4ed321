#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ralmkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A parameter lies outside its admissible range (t <= 0, rho <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A point or tangent vector violates its manifold invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// The fixed-rank retraction produced a matrix whose r-th singular value fell
// below the chart threshold. The caller is expected to shorten the step.
class RankDropError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf encountered in an operator or objective evaluation.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

inline void require_same_shape(const Matrix& a, const Matrix& b,
                               const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch (" +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

inline double frob_inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

inline Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace ralmkit
