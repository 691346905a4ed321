#include "ralmkit/lagrangian.hpp"

#include <cmath>

namespace ralmkit {

namespace {

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw DomainError("penalty rho must be positive and finite");
  }
}

Matrix lagrangian_ehess_vec(const Problem& p, const Point& x, const Matrix& w,
                            const Matrix& xi) {
  Matrix h = p.f_ehess_vec(x, xi);
  if (p.g_second) h += p.g_second(x, w, xi);
  return h;
}

}  // namespace

AugmentedLagrangian::AugmentedLagrangian(const Problem& problem, double rho,
                                         Matrix y)
    : problem_(&problem), rho_(rho), y_(std::move(y)) {
  check_rho(rho);
  if (!problem.theta) throw Error("problem has no outer function theta");
}

AugLagEval AugmentedLagrangian::evaluate(const Point& x) const {
  const Problem& p = *problem_;
  AugLagEval e;
  e.x = x;
  e.gx = p.g(x);
  require_same_shape(e.gx, y_, "multiplier vs g(x)");
  e.shifted = e.gx + y_ / rho_;
  const Matrix q = p.theta->prox(1.0 / rho_, e.shifted);
  e.ytilde = p.theta->moreau_grad(rho_, e.shifted);
  e.value = p.f(x) + p.theta->value(q) +
            0.5 * rho_ * (e.shifted - q).squaredNorm() -
            0.5 * y_.squaredNorm() / rho_;
  e.lag_egrad = p.f_egrad(x) + p.g_vjp(x, e.ytilde);
  e.rgrad = p.manifold.rgrad(x, e.lag_egrad);
  if (!std::isfinite(e.value) || !e.rgrad.allFinite()) {
    throw NonFiniteError("augmented Lagrangian evaluation produced NaN/Inf");
  }
  return e;
}

double AugmentedLagrangian::value(const Point& x) const {
  const Problem& p = *problem_;
  const Matrix gx = p.g(x);
  require_same_shape(gx, y_, "multiplier vs g(x)");
  return p.f(x) + p.theta->moreau_env(rho_, gx + y_ / rho_) -
         0.5 * y_.squaredNorm() / rho_;
}

ProxJacobian AugmentedLagrangian::jacobian(const AugLagEval& eval,
                                           TieBreak tie_break) const {
  return problem_->theta->prox_jacobian(1.0 / rho_, eval.shifted, tie_break);
}

Matrix AugmentedLagrangian::hess_vec(const AugLagEval& eval,
                                     const ProxJacobian& jac,
                                     const Matrix& xi) const {
  const Problem& p = *problem_;
  const Point& x = eval.x;
  const Matrix dg = p.g_jvp(x, xi);
  const Matrix g_term = rho_ * (dg - jac.apply(dg));
  const Matrix ehess =
      lagrangian_ehess_vec(p, x, eval.ytilde, xi) + p.g_vjp(x, g_term);
  return p.manifold.rhess_vec(x, eval.lag_egrad, ehess, xi);
}

Matrix AugmentedLagrangian::dual_gradient(const AugLagEval& eval) const {
  return (eval.ytilde - y_) / rho_;
}

double auglag_value(const Problem& p, double rho, const Point& x,
                    const Matrix& y) {
  return AugmentedLagrangian(p, rho, y).value(x);
}

Matrix auglag_rgrad(const Problem& p, double rho, const Point& x,
                    const Matrix& y) {
  return AugmentedLagrangian(p, rho, y).evaluate(x).rgrad;
}

Matrix auglag_ghess_vec(const Problem& p, double rho, const Point& x,
                        const Matrix& y, const Matrix& xi,
                        TieBreak tie_break) {
  const AugmentedLagrangian al(p, rho, y);
  const AugLagEval e = al.evaluate(x);
  return al.hess_vec(e, al.jacobian(e, tie_break), xi);
}

Matrix multiplier_update(const Problem& p, double rho, double rho_tilde,
                         const Point& x, const Matrix& y) {
  check_rho(rho);
  if (!(rho_tilde > 0.0) || rho_tilde > rho) {
    throw DomainError("multiplier step rho_tilde must lie in (0, rho]");
  }
  const Matrix ytilde = p.theta->moreau_grad(rho, p.g(x) + y / rho);
  if (rho_tilde == rho) return ytilde;
  const double w = rho_tilde / rho;
  return (1.0 - w) * y + w * ytilde;
}

Matrix lagrangian_rgrad(const Problem& p, const Point& x, const Matrix& y) {
  return p.manifold.rgrad(x, p.f_egrad(x) + p.g_vjp(x, y));
}

Matrix lagrangian_rhess_vec(const Problem& p, const Point& x, const Matrix& y,
                            const Matrix& xi) {
  const Matrix egrad = p.f_egrad(x) + p.g_vjp(x, y);
  return p.manifold.rhess_vec(x, egrad, lagrangian_ehess_vec(p, x, y, xi), xi);
}

double kkt_residual(const Problem& p, const Point& x, const Matrix& y) {
  const Matrix gx = p.g(x);
  require_same_shape(gx, y, "kkt_residual");
  return lagrangian_rgrad(p, x, y).norm() +
         (gx - p.theta->prox(1.0, gx + y)).norm();
}

}  // namespace ralmkit
