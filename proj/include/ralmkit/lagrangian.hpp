#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ralmkit/common.hpp"
#include "ralmkit/convex.hpp"
#include "ralmkit/geometry.hpp"

namespace ralmkit {

/**
 * Composite problem  min_{x in M} f(x) + theta(g(x)).
 *
 * Derivative callbacks are Euclidean (ambient) quantities; the geometry layer
 * turns them into Riemannian ones. `g_second` returns the Euclidean
 * Hessian-vector product of x -> <w, g(x)> along xi; leave it empty when g is
 * affine.
 */
struct Problem {
  explicit Problem(Manifold m) : manifold(std::move(m)) {}

  Manifold manifold;
  std::string name;

  std::function<double(const Point&)> f;
  std::function<Matrix(const Point&)> f_egrad;
  std::function<Matrix(const Point&, const Matrix&)> f_ehess_vec;

  std::function<Matrix(const Point&)> g;
  // Dg(x)[xi]
  std::function<Matrix(const Point&, const Matrix&)> g_jvp;
  // Dg(x)^*[w]
  std::function<Matrix(const Point&, const Matrix&)> g_vjp;
  std::function<Matrix(const Point&, const Matrix&, const Matrix&)> g_second;

  std::shared_ptr<const ProxFunction> theta;
};

// Quantities of l^rho(., y) at one point, shared by value/gradient/Hessian.
struct AugLagEval {
  Point x;
  Matrix gx;
  // g(x) + y / rho
  Matrix shifted;
  // grad env_{rho theta}(shifted); the multiplier estimate.
  Matrix ytilde;
  double value = 0.0;
  // Euclidean gradient of L(., ytilde) at x.
  Matrix lag_egrad;
  Matrix rgrad;
};

/**
 * l^rho(x, y) = f(x) + env_{rho theta}(g(x) + y/rho) - ||y||^2 / (2 rho)
 * at a fixed multiplier y and penalty rho.
 */
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const Problem& problem, double rho, Matrix y);

  const Problem& problem() const { return *problem_; }
  double rho() const { return rho_; }
  const Matrix& y() const { return y_; }

  AugLagEval evaluate(const Point& x) const;
  double value(const Point& x) const;

  ProxJacobian jacobian(const AugLagEval& eval, TieBreak tie_break) const;

  // Element of the generalized Riemannian Hessian selected by `jac`:
  // Hess_x L(x, ytilde)[xi] + Pi_x(Dg^* G Dg xi), G = rho (I - jac).
  Matrix hess_vec(const AugLagEval& eval, const ProxJacobian& jac,
                  const Matrix& xi) const;

  // grad_y l^rho = (ytilde - y) / rho
  Matrix dual_gradient(const AugLagEval& eval) const;

 private:
  const Problem* problem_;
  double rho_;
  Matrix y_;
};

double auglag_value(const Problem& p, double rho, const Point& x,
                    const Matrix& y);
Matrix auglag_rgrad(const Problem& p, double rho, const Point& x,
                    const Matrix& y);
Matrix auglag_ghess_vec(const Problem& p, double rho, const Point& x,
                        const Matrix& y, const Matrix& xi,
                        TieBreak tie_break = TieBreak::kZero);

// y+ = (1 - rho_tilde/rho) y + (rho_tilde/rho) ytilde, with 0 < rho_tilde <= rho.
Matrix multiplier_update(const Problem& p, double rho, double rho_tilde,
                         const Point& x, const Matrix& y);

// Riemannian gradient and Hessian-vector product of L(., y) = f + <y, g>.
Matrix lagrangian_rgrad(const Problem& p, const Point& x, const Matrix& y);
Matrix lagrangian_rhess_vec(const Problem& p, const Point& x, const Matrix& y,
                            const Matrix& xi);

// R(x, y) = ||grad_x L(x, y)|| + ||g(x) - prox_theta(g(x) + y)||
double kkt_residual(const Problem& p, const Point& x, const Matrix& y);

}  // namespace ralmkit
