#include "ralmkit/ralm.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ralmkit {

const char* to_string(InnerCriterion c) {
  switch (c) {
    case InnerCriterion::kA:
      return "a";
    case InnerCriterion::kB:
      return "b";
    case InnerCriterion::kC:
      return "c";
    case InnerCriterion::kExact:
      return "exact";
  }
  return "unknown";
}

InnerCriterion parse_inner_criterion(const std::string& name) {
  if (name == "a") return InnerCriterion::kA;
  if (name == "b") return InnerCriterion::kB;
  if (name == "c") return InnerCriterion::kC;
  if (name == "exact") return InnerCriterion::kExact;
  throw DomainError("unknown inner criterion '" + name + "' (expected a, b, c or exact)");
}

double inner_threshold(InnerCriterion variant, double eps, double rho_tilde,
                       double dual_step_norm, double exact_c) {
  if (!(rho_tilde > 0.0)) throw DomainError("inner_threshold: rho_tilde must be positive");
  if (eps < 0.0 || dual_step_norm < 0.0) {
    throw DomainError("inner_threshold: inputs must be nonnegative");
  }
  const double scale = 1.0 / std::sqrt(rho_tilde);
  switch (variant) {
    case InnerCriterion::kA:
      return eps * scale;
    case InnerCriterion::kB:
      return eps * std::min(1.0, dual_step_norm) * scale;
    case InnerCriterion::kC:
      return eps * std::min(1.0, dual_step_norm * dual_step_norm) * scale;
    case InnerCriterion::kExact:
      return exact_c * dual_step_norm;
  }
  return 0.0;
}

void RalmConfig::validate() const {
  if (!(rho0 > 0.0)) throw DomainError("rho0 must be positive");
  if (!(rho_bar >= 0.0 && rho_bar < rho0)) throw DomainError("rho_bar must lie in [0, rho0)");
  if (!(gamma >= 1.0)) throw DomainError("gamma must be >= 1");
  if (!(rho_max >= rho0)) throw DomainError("rho_max must be >= rho0");
  if (!(residual_ratio > 0.0 && residual_ratio <= 1.0)) {
    throw DomainError("residual_ratio must lie in (0, 1]");
  }
  if (!(eps0 > 0.0) || !(eps_decay > 0.0 && eps_decay < 1.0)) {
    throw DomainError("eps schedule must be positive and summable (0 < decay < 1)");
  }
  if (!(exact_c > 0.0)) throw DomainError("exact_c must be positive");
  if (!(kkt_tol >= 0.0)) throw DomainError("kkt_tol must be nonnegative");
  if (max_outer < 0) throw DomainError("max_outer must be nonnegative");
  newton.validate();
}

RalmResult ralm_solve(const Problem& problem, const RalmConfig& cfg,
                      const Point& x0, const Matrix& y0) {
  cfg.validate();
  RalmResult res;
  res.x = x0;
  res.y = y0;

  if (const auto* l1 = dynamic_cast<const L1Norm*>(problem.theta.get())) {
    if (y0.size() > 0 && y0.cwiseAbs().maxCoeff() > l1->weight()) {
      res.warnings.push_back(fmt::format(
          "initial multiplier outside the l1 dual box: max |y0| = {} > {}",
          y0.cwiseAbs().maxCoeff(), l1->weight()));
    }
  }

  double rho = cfg.rho0;
  auto rho_tilde_of = [&](double r) { return cfg.rho_bar > 0.0 ? r - cfg.rho_bar : r; };

  {
    const AugmentedLagrangian al(problem, rho, res.y);
    const AugLagEval ev = al.evaluate(res.x);
    IterateRecord rec;
    rec.k = 0;
    rec.rho = rho;
    rec.rho_tilde = rho_tilde_of(rho);
    rec.grad_norm = ev.rgrad.norm();
    rec.kkt_residual = kkt_residual(problem, res.x, res.y);
    rec.auglag = ev.value;
    res.records.push_back(rec);
  }
  if (res.records.back().kkt_residual <= cfg.kkt_tol) {
    res.status = RalmStatus::kConverged;
    return res;
  }

  for (int k = 0; k < cfg.max_outer; ++k) {
    const double rho_tilde = rho_tilde_of(rho);
    const double eps_k = cfg.eps0 * std::pow(cfg.eps_decay, k);
    const InnerStop stop = [&](const InnerState& s) {
      const double dual = (rho_tilde / rho) * (s.eval.ytilde - res.y).norm();
      return s.grad_norm <=
             inner_threshold(cfg.criterion, eps_k, rho_tilde, dual, cfg.exact_c);
    };
    NewtonResult inner = ssn_minimize(problem, rho, res.y, res.x, cfg.newton, stop);

    const AugmentedLagrangian al(problem, rho, res.y);
    const AugLagEval ev = al.evaluate(inner.x);
    const Matrix y_next = multiplier_update(problem, rho, rho_tilde, inner.x, res.y);
    const double prev_residual = res.records.back().kkt_residual;

    IterateRecord rec;
    rec.k = k + 1;
    rec.rho = rho;
    rec.rho_tilde = rho_tilde;
    rec.inner_iters = inner.stats.iterations;
    rec.grad_norm = ev.rgrad.norm();
    rec.dual_step_norm = (y_next - res.y).norm();
    rec.auglag = ev.value;
    res.x = std::move(inner.x);
    res.y = y_next;
    rec.kkt_residual = kkt_residual(problem, res.x, res.y);
    if (!std::isfinite(rec.kkt_residual) || !std::isfinite(rec.auglag)) {
      throw NonFiniteError(fmt::format("outer iteration {}: non-finite residual", k + 1));
    }
    if (inner.stats.status != NewtonStatus::kConverged) {
      res.warnings.push_back(fmt::format("outer iteration {}: inner solver {} (grad norm {:.3e})",
                                         k + 1, to_string(inner.stats.status),
                                         inner.stats.final_grad_norm));
    }
    res.inner.push_back(std::move(inner.stats));
    res.records.push_back(rec);

    if (rec.kkt_residual <= cfg.kkt_tol) {
      res.status = RalmStatus::kConverged;
      return res;
    }
    if (rec.kkt_residual > cfg.residual_ratio * prev_residual) {
      rho = std::min(cfg.gamma * rho, cfg.rho_max);
    }
  }
  res.status = RalmStatus::kMaxIterations;
  return res;
}

}  // namespace ralmkit
