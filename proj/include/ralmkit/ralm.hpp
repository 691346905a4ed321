#pragma once

#include <string>
#include <vector>

#include "ralmkit/newton.hpp"

namespace ralmkit {

// Gradient-based inner acceptance rules. With s = rho_tilde ||grad_y l||:
//   kA:     sqrt(rho_tilde) ||grad_x l|| <= eps
//   kB:     sqrt(rho_tilde) ||grad_x l|| <= eps * min{1, s}
//   kC:     sqrt(rho_tilde) ||grad_x l|| <= eps * min{1, s^2}
//   kExact: ||grad_x l|| <= c * s
enum class InnerCriterion { kA, kB, kC, kExact };

const char* to_string(InnerCriterion c);
InnerCriterion parse_inner_criterion(const std::string& name);

// Gradient-norm threshold of the chosen criterion (kExact ignores eps and
// uses exact_c instead).
double inner_threshold(InnerCriterion variant, double eps, double rho_tilde,
                       double dual_step_norm, double exact_c = 1.0);

struct RalmConfig {
  double rho0 = 1.0;
  // Base level; rho_tilde_k = rho_k - rho_bar when positive, else rho_k.
  double rho_bar = 0.0;
  double gamma = 4.0;
  double rho_max = 1e4;
  // Penalty grows when R_{k+1} > residual_ratio * R_k.
  double residual_ratio = 0.5;
  // eps_k = eps0 * eps_decay^k
  double eps0 = 0.5;
  double eps_decay = 0.5;
  InnerCriterion criterion = InnerCriterion::kB;
  double exact_c = 1.0;
  double kkt_tol = 1e-9;
  int max_outer = 100;
  NewtonConfig newton;

  void validate() const;
};

struct IterateRecord {
  int k = 0;
  double rho = 0.0;
  double rho_tilde = 0.0;
  int inner_iters = 0;
  double grad_norm = 0.0;
  double kkt_residual = 0.0;
  double dual_step_norm = 0.0;
  double auglag = 0.0;
};

enum class RalmStatus { kConverged, kMaxIterations };

struct RalmResult {
  Point x;
  Matrix y;
  RalmStatus status = RalmStatus::kMaxIterations;
  // records[0] describes (x0, y0); records[k] the state after outer step k.
  std::vector<IterateRecord> records;
  std::vector<NewtonStats> inner;
  std::vector<std::string> warnings;
};

RalmResult ralm_solve(const Problem& problem, const RalmConfig& cfg,
                      const Point& x0, const Matrix& y0);

}  // namespace ralmkit
