#pragma once

#include <functional>
#include <vector>

#include "ralmkit/lagrangian.hpp"

namespace ralmkit {

struct NewtonConfig {
  // Regularization exponent: omega_k = ||grad||^nu_bar, nu_bar in (0, 1].
  double nu_bar = 1.0;
  // Forcing sequence eta_k = eta_scale / (k + 1)^eta_power.
  double eta_scale = 1.0;
  double eta_power = 2.0;
  // Armijo constant in (0, 1/2) and backtracking factor in (0, 1).
  double armijo = 1e-4;
  double backtrack = 0.5;
  // Sufficient descent test <-grad, V> >= min{beta0, beta1 ||V||^p} ||V||^2.
  double beta0 = 1e-6;
  double beta1 = 1e-6;
  double power = 2.0;
  int max_backtracks = 40;
  int max_iter = 200;
  int cg_max_iter = 1000;
  // Absolute gradient-norm floor at which the inner loop always stops.
  double grad_tol = 1e-12;
  TieBreak tie_break = TieBreak::kZero;

  void validate() const;
};

enum class NewtonStatus { kConverged, kMaxIterations, kLineSearchFailed };

const char* to_string(NewtonStatus status);

struct NewtonStats {
  int iterations = 0;
  int cg_iterations = 0;
  int gradient_fallbacks = 0;
  int rank_drop_retries = 0;
  // Unit steps taken on a gradient-norm decrease because the Armijo decrease
  // was below floating-point resolution of the objective.
  int roundoff_accepts = 0;
  double final_grad_norm = 0.0;
  std::vector<double> objective_trace;
  NewtonStatus status = NewtonStatus::kConverged;
};

struct InnerState {
  int iteration;
  const AugLagEval& eval;
  double grad_norm;
};

using InnerStop = std::function<bool(const InnerState&)>;

// Hands every accepted iterate (including x0) to the caller.
using IterateObserver = std::function<void(const Point&)>;

struct CgResult {
  Matrix solution;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  bool negative_curvature = false;
};

using TangentOperator = std::function<Matrix(const Matrix&)>;

/**
 * Conjugate gradients for (H + shift I) v = b on a tangent space.
 *
 * Stops when the residual norm drops to `tol` or after `max_iter` steps. A
 * direction with <d, (H + shift I) d> <= 1e-14 ||d||^2 ends the solve early
 * with `negative_curvature` set; if that happens on the first step the
 * returned solution is b itself.
 */
CgResult cg_solve(const TangentOperator& op, double shift, const Matrix& b,
                  double tol, int max_iter);

struct NewtonResult {
  Point x;
  NewtonStats stats;
};

// Globalized semismooth Newton method for min_x l^rho(x, y).
NewtonResult ssn_minimize(const Problem& problem, double rho, const Matrix& y,
                          const Point& x0, const NewtonConfig& cfg,
                          const InnerStop& stop = {},
                          const IterateObserver& observer = {});

}  // namespace ralmkit
