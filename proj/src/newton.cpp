#include "ralmkit/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ralmkit {

void NewtonConfig::validate() const {
  if (!(nu_bar > 0.0 && nu_bar <= 1.0)) throw DomainError("nu_bar must lie in (0, 1]");
  if (!(eta_scale >= 0.0) || !(eta_power > 0.0)) {
    throw DomainError("eta sequence must be nonnegative and vanishing");
  }
  if (!(armijo > 0.0 && armijo < 0.5)) throw DomainError("armijo must lie in (0, 1/2)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw DomainError("backtrack must lie in (0, 1)");
  }
  if (!(beta0 > 0.0) || !(beta1 > 0.0) || !(power > 0.0)) {
    throw DomainError("beta0, beta1 and p must be positive");
  }
  if (max_backtracks < 0 || max_iter < 0 || cg_max_iter <= 0) {
    throw DomainError("iteration limits must be nonnegative");
  }
}

const char* to_string(NewtonStatus status) {
  switch (status) {
    case NewtonStatus::kConverged:
      return "converged";
    case NewtonStatus::kMaxIterations:
      return "max_iterations";
    case NewtonStatus::kLineSearchFailed:
      return "line_search_failed";
  }
  return "unknown";
}

CgResult cg_solve(const TangentOperator& op, double shift, const Matrix& b,
                  double tol, int max_iter) {
  if (shift < 0.0) throw DomainError("cg_solve: shift must be nonnegative");
  CgResult res;
  res.solution = Matrix::Zero(b.rows(), b.cols());
  Matrix r = b;
  double rr = r.squaredNorm();
  res.residual_norm = std::sqrt(rr);
  if (!std::isfinite(rr)) throw NonFiniteError("cg_solve: non-finite right-hand side");
  if (res.residual_norm <= tol) {
    res.converged = true;
    return res;
  }
  Matrix d = r;
  for (int it = 0; it < max_iter; ++it) {
    Matrix hd = op(d);
    if (shift != 0.0) hd += shift * d;
    if (!hd.allFinite()) throw NonFiniteError("cg_solve: operator returned NaN/Inf");
    const double dhd = frob_inner(d, hd);
    if (dhd <= 1e-14 * d.squaredNorm()) {
      res.negative_curvature = true;
      if (it == 0) res.solution = b;
      return res;
    }
    const double alpha = rr / dhd;
    res.solution += alpha * d;
    r -= alpha * hd;
    const double rr_new = r.squaredNorm();
    res.iterations = it + 1;
    res.residual_norm = std::sqrt(rr_new);
    if (res.residual_norm <= tol) {
      res.converged = true;
      return res;
    }
    d = r + (rr_new / rr) * d;
    rr = rr_new;
  }
  return res;
}

NewtonResult ssn_minimize(const Problem& problem, double rho, const Matrix& y,
                          const Point& x0, const NewtonConfig& cfg,
                          const InnerStop& stop,
                          const IterateObserver& observer) {
  cfg.validate();
  const AugmentedLagrangian model(problem, rho, y);
  const Manifold& mf = problem.manifold;

  NewtonResult out;
  NewtonStats& st = out.stats;
  Point x = x0;
  if (observer) observer(x);

  for (int k = 0;; ++k) {
    const AugLagEval ev = model.evaluate(x);
    const double gnorm = ev.rgrad.norm();
    st.objective_trace.push_back(ev.value);
    st.final_grad_norm = gnorm;
    st.iterations = k;
    if (gnorm <= cfg.grad_tol || (stop && stop(InnerState{k, ev, gnorm}))) {
      st.status = NewtonStatus::kConverged;
      break;
    }
    if (k >= cfg.max_iter) {
      st.status = NewtonStatus::kMaxIterations;
      break;
    }

    // Step 1: inexact regularized Newton system.
    const double omega = std::pow(gnorm, cfg.nu_bar);
    const double eta_k = cfg.eta_scale / std::pow(static_cast<double>(k + 1), cfg.eta_power);
    const double eta_tilde = std::min(eta_k, std::pow(gnorm, 1.0 + cfg.nu_bar));
    const ProxJacobian jac = model.jacobian(ev, cfg.tie_break);
    const TangentOperator op = [&](const Matrix& xi) {
      return model.hess_vec(ev, jac, xi);
    };
    const Matrix neg_grad = -ev.rgrad;
    CgResult cg = cg_solve(op, omega, neg_grad, eta_tilde, cfg.cg_max_iter);
    st.cg_iterations += cg.iterations;

    // Step 2: sufficient descent test, gradient fallback.
    Matrix v = std::move(cg.solution);
    const double vnorm = v.norm();
    const double descent = frob_inner(neg_grad, v);
    const double required =
        std::min(cfg.beta0, cfg.beta1 * std::pow(vnorm, cfg.power)) * vnorm * vnorm;
    // A truncated CG direction (negative curvature met) is kept if it passes.
    if (vnorm == 0.0 || !(descent >= required)) {
      v = neg_grad;
      ++st.gradient_fallbacks;
    }
    const double slope = frob_inner(ev.rgrad, v);

    // Armijo backtracking along the retraction.
    const double resolution =
        100.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ev.value));
    double step = 1.0;
    bool accepted = false;
    Point next;
    for (int m = 0; m <= cfg.max_backtracks; ++m, step *= cfg.backtrack) {
      try {
        next = mf.retract(x, step * v);
      } catch (const RankDropError&) {
        ++st.rank_drop_retries;
        continue;
      }
      const double trial = model.value(next);
      if (trial <= ev.value + cfg.armijo * step * slope) {
        accepted = true;
        break;
      }
      if (m == 0 && cfg.armijo * std::abs(slope) <= resolution &&
          std::isfinite(trial) && trial <= ev.value + resolution &&
          model.evaluate(next).rgrad.norm() < gnorm) {
        ++st.roundoff_accepts;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      st.status = NewtonStatus::kLineSearchFailed;
      break;
    }
    x = std::move(next);
    if (observer) observer(x);
  }
  out.x = std::move(x);
  return out;
}

}  // namespace ralmkit
