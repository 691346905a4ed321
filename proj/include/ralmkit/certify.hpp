#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ralmkit/lagrangian.hpp"

namespace ralmkit {

// Orthonormal tangent vectors at a common base point.
struct SubspaceBasis {
  std::vector<Matrix> vectors;
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(vectors.size()); }
};

enum class CertificateKind { kMssosc, kGeneralizedHessian };
enum class Verdict { kHolds, kFails, kDegenerateHolds };

const char* to_string(CertificateKind kind);
const char* to_string(Verdict verdict);

struct Certificate {
  CertificateKind kind = CertificateKind::kMssosc;
  // +inf for a zero-dimensional subspace.
  double min_eigenvalue = 0.0;
  Eigen::Index dimension = 0;
  std::size_t boundary_count = 0;
  std::size_t elements_enumerated = 0;
  // The Jacobian bundle was too large to enumerate; only the convention
  // element was examined.
  bool partial = false;
  Verdict verdict = Verdict::kFails;

  bool holds() const { return verdict != Verdict::kFails; }
};

struct CertifyOptions {
  // Membership y in d theta(g(x)) and zero/active detection.
  double complementarity_tol = 1e-8;
  // Singular values of the constraint map below this span the cone subspace.
  double nullspace_tol = 1e-10;
  // Verdict "holds" iff the minimum eigenvalue exceeds this.
  double eig_tol = 1e-9;
  std::size_t max_boundary = 12;
  Eigen::Index max_dense_dim = 4000;
  TieBreak convention = TieBreak::kZero;
};

// Basis of aff C(x, y) intersected with T_x M (pulled back through Dg).
SubspaceBasis critical_cone_basis(const Problem& p, const Point& x,
                                  const Matrix& y,
                                  const CertifyOptions& opts = {});

// Min eigenvalue of Hess_x L(x, y) compressed to `basis`.
Certificate mssosc_from_basis(const Problem& p, const Point& x,
                              const Matrix& y, const SubspaceBasis& basis,
                              const CertifyOptions& opts = {});

Certificate mssosc_certificate(const Problem& p, const Point& x,
                               const Matrix& y,
                               const CertifyOptions& opts = {});

// Min eigenvalue over the generalized Hessian of l^rho(., y) at x, either for
// the convention element or, with `enumerate`, over every extreme element.
Certificate genhess_min_eig(const Problem& p, double rho, const Point& x,
                            const Matrix& y, bool enumerate,
                            const CertifyOptions& opts = {});

struct RateFit {
  double rate = 0.0;
  double fit_quality = 0.0;
  std::size_t points = 0;
};

// Least-squares fit of log r_k against k over the trailing tail_fraction of
// the sequence (at least five points).
RateFit fit_linear_rate(std::span<const double> residuals,
                        double tail_fraction = 0.5);

}  // namespace ralmkit
