#pragma once

#include <cstdint>
#include <vector>

#include "ralmkit/common.hpp"

namespace ralmkit {

enum class ManifoldKind { kEuclidean, kStiefel, kFixedRank };

const char* to_string(ManifoldKind kind);

struct GeometryTolerances {
  // ||X^T X - I||_inf accepted when a Stiefel point is constructed from data.
  double stiefel_orthonormality = 1e-10;
  // Smallest admissible sigma_r after a fixed-rank retraction.
  double rank_drop = 1e-12;
  // Relative size of sigma_{r+1} tolerated when a fixed-rank point is built
  // from an ambient matrix.
  double rank_excess = 1e-10;
};

/**
 * A point on one of the supported manifolds.
 *
 * Euclidean and Stiefel points are dense matrices. Fixed-rank points are kept
 * as a thin SVD (U, sigma, V) with sigma positive and nonincreasing; the
 * ambient product U diag(sigma) V^T is cached alongside since every shipped
 * problem evaluates entries of it.
 */
class Point {
 public:
  Point() = default;

  const Matrix& ambient() const { return ambient_; }
  Eigen::Index rows() const { return ambient_.rows(); }
  Eigen::Index cols() const { return ambient_.cols(); }

  bool has_factors() const { return sigma_.size() > 0; }
  const Matrix& u() const { return u_; }
  const Vector& sigma() const { return sigma_; }
  const Matrix& v() const { return v_; }

 private:
  friend class Manifold;
  Matrix ambient_;
  Matrix u_;
  Vector sigma_;
  Matrix v_;
};

// Tangent vector at a fixed-rank point X = U S V^T in factored coordinates:
// xi = U m V^T + up V^T + U vp^T with U^T up = 0 and V^T vp = 0.
struct FactoredTangent {
  Matrix m;
  Matrix up;
  Matrix vp;
};

/**
 * Geometry of an embedded matrix submanifold with the metric inherited from
 * the ambient Frobenius inner product.
 *
 * Tangent vectors are plain ambient matrices; the base point is passed
 * explicitly to every operation that needs it. Retractions are second-order:
 * polar for Stiefel, rank-r truncated SVD for fixed-rank.
 */
class Manifold {
 public:
  static Manifold euclidean(Eigen::Index rows, Eigen::Index cols);
  static Manifold stiefel(Eigen::Index n, Eigen::Index r);
  static Manifold fixed_rank(Eigen::Index m, Eigen::Index n, Eigen::Index r);

  ManifoldKind kind() const { return kind_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  // Only meaningful for fixed-rank and Stiefel (r = number of columns).
  Eigen::Index rank() const { return rank_; }
  // Dimension of every tangent space.
  Eigen::Index dimension() const;

  GeometryTolerances& tolerances() { return tol_; }
  const GeometryTolerances& tolerances() const { return tol_; }

  // Validates x against the manifold invariants; throws InvariantError.
  Point make_point(const Matrix& x) const;
  Point make_fixed_rank(const Matrix& u, const Vector& sigma,
                        const Matrix& v) const;

  Matrix project(const Point& x, const Matrix& y) const;
  Point retract(const Point& x, const Matrix& xi) const;
  Matrix rgrad(const Point& x, const Matrix& egrad) const;

  /**
   * Riemannian Hessian-vector product from Euclidean data.
   *
   * @param egrad Euclidean gradient of the smooth function at x.
   * @param ehess_vec Euclidean Hessian of the same function applied to xi.
   * @param xi Tangent vector at x.
   */
  Matrix rhess_vec(const Point& x, const Matrix& egrad, const Matrix& ehess_vec,
                   const Matrix& xi) const;

  double inner(const Matrix& a, const Matrix& b) const;
  double norm(const Matrix& a) const;

  // Unit-norm tangent vector, deterministic per seed.
  Matrix random_tangent(const Point& x, std::uint64_t seed) const;
  // Point drawn deterministically per seed (Gaussian + QR for Stiefel, Gaussian
  // factors for fixed-rank).
  Point random_point(std::uint64_t seed) const;

  // Orthonormal basis of T_x M as ambient matrices.
  std::vector<Matrix> tangent_basis(const Point& x) const;

  // Largest violation of the tangent-space equations for xi at x.
  double tangent_violation(const Point& x, const Matrix& xi) const;
  // Largest violation of the point invariants.
  double point_violation(const Point& x) const;

  FactoredTangent to_factored(const Point& x, const Matrix& xi) const;
  Matrix from_factored(const Point& x, const FactoredTangent& t) const;

 private:
  Manifold(ManifoldKind kind, Eigen::Index rows, Eigen::Index cols,
           Eigen::Index rank)
      : kind_(kind), rows_(rows), cols_(cols), rank_(rank) {}

  void check_ambient(const Matrix& y, const char* what) const;
  void check_point(const Point& x) const;

  ManifoldKind kind_;
  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::Index rank_;
  GeometryTolerances tol_;
};

// Orthonormal basis of the orthogonal complement of the column span of q
// (q must have orthonormal columns).
Matrix orthonormal_complement(const Matrix& q);

}  // namespace ralmkit
