#pragma once

// Test-side reference computations. None of these call into the library's
// formulas; they rebuild each quantity from definitions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

// Minimum of a 1-D function over a uniform grid [lo, hi] with the given step.
inline std::pair<double, double> grid_min(const std::function<double(double)>& fn,
                                          double lo, double hi, double step) {
  double best_u = lo;
  double best = fn(lo);
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long i = 1; i <= count; ++i) {
    const double u = lo + static_cast<double>(i) * step;
    const double v = fn(u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  }
  return {best_u, best};
}

inline double central_diff(const std::function<double(double)>& fn, double h) {
  return (fn(h) - fn(-h)) / (2.0 * h);
}

inline Matrix central_diff(const std::function<Matrix(double)>& fn, double h) {
  return (fn(h) - fn(-h)) / (2.0 * h);
}

// Polar factor W of A (A = W P with W^T W = I) from a dense SVD.
inline Matrix polar(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// Best rank-r approximation from a dense SVD.
inline Matrix truncate(const Matrix& a, Eigen::Index r) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

// Orthonormal basis (columns, vectorized) of the span of the given matrices.
inline Matrix span_basis(const std::vector<Matrix>& gens, double tol = 1e-10) {
  const Eigen::Index dim = gens.front().size();
  Matrix g(dim, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t k = 0; k < gens.size(); ++k) {
    g.col(static_cast<Eigen::Index>(k)) = gens[k].reshaped();
  }
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinU);
  Eigen::Index rank = 0;
  const double top = svd.singularValues()(0);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol * top) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

// Null space of a linear map given as a matrix acting on vec(X).
inline Matrix null_space(const Matrix& a, double tol = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(a.cols() - rank);
}

// Tangent space of St(n, r) at X as the kernel of Xi -> X^T Xi + Xi^T X.
inline Matrix stiefel_tangent_basis(const Matrix& x) {
  const Eigen::Index n = x.rows(), r = x.cols();
  Matrix map(r * r, n * r);
  for (Eigen::Index k = 0; k < n * r; ++k) {
    Matrix e = Matrix::Zero(n, r);
    e(k % n, k / n) = 1.0;
    const Matrix img = x.transpose() * e + e.transpose() * x;
    map.col(k) = img.reshaped();
  }
  return null_space(map);
}

// Tangent space of the fixed-rank manifold at X = U S V^T spanned by the
// velocities of the curves (U + tA)(S + tB)(V + tC)^T.
inline Matrix fixed_rank_tangent_basis(const Matrix& u, const Matrix& s, const Matrix& v) {
  std::vector<Matrix> gens;
  const Eigen::Index m = u.rows(), n = v.rows(), r = u.cols();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      Matrix a = Matrix::Zero(m, r);
      a(i, j) = 1.0;
      gens.push_back(a * s * v.transpose());
    }
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      Matrix b = Matrix::Zero(r, r);
      b(i, j) = 1.0;
      gens.push_back(u * b * v.transpose());
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      Matrix c = Matrix::Zero(n, r);
      c(i, j) = 1.0;
      gens.push_back(u * s * c.transpose());
    }
  }
  return span_basis(gens);
}

// Orthogonal projection of y onto the column span of an orthonormal basis.
inline Matrix project_onto(const Matrix& basis, const Matrix& y) {
  const Vector c = basis.transpose() * y.reshaped();
  Vector out = basis * c;
  return out.reshaped(y.rows(), y.cols());
}

// Least-squares slope of log(err) against log(t).
inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& err) {
  const auto n = static_cast<double>(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = std::log(t[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace oracle
