#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "ralmkit/common.hpp"

namespace ralmkit {

// Which side of a kink the prox Jacobian selection takes at tie entries.
enum class TieBreak { kZero, kOne };

/**
 * One element of the B-subdifferential of prox(theta, t, .) at p.
 *
 * For separable theta the element is diagonal and stored as a 0/1 mask with
 * the argument's shape. `boundary` lists the column-major linear indices of
 * the entries that sat on a kink and were resolved by `tie_break`.
 */
struct ProxJacobian {
  Matrix mask;
  double t = 0.0;
  TieBreak tie_break = TieBreak::kZero;
  std::vector<Eigen::Index> boundary;

  Matrix apply(const Matrix& d) const;
};

struct JacobianBundle {
  std::vector<ProxJacobian> elements;
  std::size_t boundary_count = 0;
  // True when boundary_count exceeded the enumeration cap and only the
  // convention element was returned.
  bool partial = false;
};

// Proper, lsc, convex outer function with a computable prox.
class ProxFunction {
 public:
  virtual ~ProxFunction() = default;

  virtual double value(const Matrix& z) const = 0;
  // argmin_u theta(u) + ||u - p||^2 / (2t).
  virtual Matrix prox(double t, const Matrix& p) const = 0;
  virtual ProxJacobian prox_jacobian(double t, const Matrix& p,
                                     TieBreak tie_break) const = 0;
  // All extreme Jacobian elements when the number of kinks is at most
  // max_boundary, otherwise the convention element flagged partial.
  virtual JacobianBundle prox_jacobian_extremes(
      double t, const Matrix& p, std::size_t max_boundary,
      TieBreak convention) const = 0;
  virtual bool in_subdifferential(const Matrix& z, const Matrix& y,
                                  double tol) const = 0;
  // 1 where the affine hull of the critical cone at (z, y) leaves the
  // coordinate free, 0 where it must vanish.
  virtual Matrix critical_affine_mask(const Matrix& z, const Matrix& y,
                                      double tol) const = 0;
  virtual std::unique_ptr<ProxFunction> scaled(double factor) const = 0;

  // env(p) = min_u theta(u) + rho/2 ||p - u||^2
  double moreau_env(double rho, const Matrix& p) const;
  // rho (p - prox(theta, 1/rho, p))
  virtual Matrix moreau_grad(double rho, const Matrix& p) const;
};

// theta(z) = weight * ||z||_1 (entrywise).
class L1Norm final : public ProxFunction {
 public:
  explicit L1Norm(double weight);

  double weight() const { return weight_; }

  double value(const Matrix& z) const override;
  Matrix prox(double t, const Matrix& p) const override;
  ProxJacobian prox_jacobian(double t, const Matrix& p,
                             TieBreak tie_break) const override;
  JacobianBundle prox_jacobian_extremes(double t, const Matrix& p,
                                        std::size_t max_boundary,
                                        TieBreak convention) const override;
  bool in_subdifferential(const Matrix& z, const Matrix& y,
                          double tol) const override;
  Matrix critical_affine_mask(const Matrix& z, const Matrix& y,
                              double tol) const override;
  std::unique_ptr<ProxFunction> scaled(double factor) const override;
  // Clamp of rho p to [-weight, weight]; stays inside the dual box exactly.
  Matrix moreau_grad(double rho, const Matrix& p) const override;

 private:
  double weight_;
};

}  // namespace ralmkit
