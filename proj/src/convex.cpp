#include "ralmkit/convex.hpp"

#include <algorithm>
#include <cmath>

namespace ralmkit {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

// |p| within this of the threshold counts as a kink.
constexpr double kKinkTol = 1e-12;

}  // namespace

Matrix ProxJacobian::apply(const Matrix& d) const {
  require_same_shape(mask, d, "ProxJacobian::apply");
  return mask.cwiseProduct(d);
}

double ProxFunction::moreau_env(double rho, const Matrix& p) const {
  require_positive(rho, "rho");
  const Matrix q = prox(1.0 / rho, p);
  return value(q) + 0.5 * rho * (p - q).squaredNorm();
}

Matrix ProxFunction::moreau_grad(double rho, const Matrix& p) const {
  require_positive(rho, "rho");
  return rho * (p - prox(1.0 / rho, p));
}

L1Norm::L1Norm(double weight) : weight_(weight) {
  require_positive(weight, "l1 weight");
}

Matrix L1Norm::moreau_grad(double rho, const Matrix& p) const {
  require_positive(rho, "rho");
  return (rho * p).cwiseMax(-weight_).cwiseMin(weight_);
}

double L1Norm::value(const Matrix& z) const {
  return weight_ * z.cwiseAbs().sum();
}

Matrix L1Norm::prox(double t, const Matrix& p) const {
  require_positive(t, "prox step t");
  const double thr = t * weight_;
  return p.unaryExpr([thr](double v) {
    const double a = std::abs(v) - thr;
    return a > 0.0 ? std::copysign(a, v) : 0.0;
  });
}

ProxJacobian L1Norm::prox_jacobian(double t, const Matrix& p,
                                   TieBreak tie_break) const {
  require_positive(t, "prox step t");
  const double thr = t * weight_;
  const double kink = kKinkTol * std::max(1.0, thr);
  ProxJacobian jac;
  jac.t = t;
  jac.tie_break = tie_break;
  jac.mask.resize(p.rows(), p.cols());
  const double tie_value = tie_break == TieBreak::kOne ? 1.0 : 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double a = std::abs(p(k));
    if (std::abs(a - thr) <= kink) {
      jac.mask(k) = tie_value;
      jac.boundary.push_back(k);
    } else {
      jac.mask(k) = a > thr ? 1.0 : 0.0;
    }
  }
  return jac;
}

JacobianBundle L1Norm::prox_jacobian_extremes(double t, const Matrix& p,
                                              std::size_t max_boundary,
                                              TieBreak convention) const {
  JacobianBundle bundle;
  ProxJacobian base = prox_jacobian(t, p, convention);
  bundle.boundary_count = base.boundary.size();
  if (bundle.boundary_count > max_boundary || bundle.boundary_count >= 63) {
    bundle.partial = true;
    bundle.elements.push_back(std::move(base));
    return bundle;
  }
  const std::uint64_t combos = std::uint64_t{1} << bundle.boundary_count;
  bundle.elements.reserve(combos);
  for (std::uint64_t bits = 0; bits < combos; ++bits) {
    ProxJacobian e = base;
    for (std::size_t b = 0; b < base.boundary.size(); ++b) {
      e.mask(base.boundary[b]) = ((bits >> b) & 1U) ? 1.0 : 0.0;
    }
    bundle.elements.push_back(std::move(e));
  }
  return bundle;
}

bool L1Norm::in_subdifferential(const Matrix& z, const Matrix& y,
                                double tol) const {
  require_same_shape(z, y, "in_subdifferential");
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (std::abs(y(k)) > weight_ + tol) return false;
    if (std::abs(z(k)) > tol &&
        std::abs(y(k) - std::copysign(weight_, z(k))) > tol) {
      return false;
    }
  }
  return true;
}

Matrix L1Norm::critical_affine_mask(const Matrix& z, const Matrix& y,
                                    double tol) const {
  require_same_shape(z, y, "critical_affine_mask");
  Matrix free(z.rows(), z.cols());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const bool zero = std::abs(z(k)) <= tol;
    const bool interior = std::abs(y(k)) < weight_ - tol;
    free(k) = (zero && interior) ? 0.0 : 1.0;
  }
  return free;
}

std::unique_ptr<ProxFunction> L1Norm::scaled(double factor) const {
  return std::make_unique<L1Norm>(weight_ * factor);
}

}  // namespace ralmkit
