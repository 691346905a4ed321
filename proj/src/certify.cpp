#include "ralmkit/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace ralmkit {

namespace {

// Columns are the vectorized members of `vecs`.
Matrix stack(const std::vector<Matrix>& vecs, Eigen::Index rows, Eigen::Index cols) {
  Matrix out(rows * cols, static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t j = 0; j < vecs.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = vecs[j].reshaped();
  }
  return out;
}

double min_eig_compressed(const Matrix& basis, const Matrix& image) {
  Matrix gram = basis.transpose() * image;
  gram = sym(gram);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Verdict verdict_for(double min_eig, Eigen::Index dim, double tol) {
  if (dim == 0) return Verdict::kDegenerateHolds;
  return min_eig > tol ? Verdict::kHolds : Verdict::kFails;
}

}  // namespace

const char* to_string(CertificateKind kind) {
  return kind == CertificateKind::kMssosc ? "mssosc" : "generalized_hessian";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kHolds:
      return "holds";
    case Verdict::kFails:
      return "fails";
    case Verdict::kDegenerateHolds:
      return "degenerate_holds";
  }
  return "unknown";
}

SubspaceBasis critical_cone_basis(const Problem& p, const Point& x,
                                  const Matrix& y, const CertifyOptions& opts) {
  const Matrix gx = p.g(x);
  require_same_shape(gx, y, "critical_cone_basis");
  if (!p.theta->in_subdifferential(gx, y, opts.complementarity_tol)) {
    throw InvariantError(
        "critical_cone_basis: y is not in the subdifferential of theta at g(x)");
  }
  const Manifold& mf = p.manifold;
  const std::vector<Matrix> tangent = mf.tangent_basis(x);
  const Eigen::Index d = static_cast<Eigen::Index>(tangent.size());
  if (d > opts.max_dense_dim) {
    throw DomainError("critical_cone_basis: tangent dimension too large for dense assembly");
  }
  const Matrix free = p.theta->critical_affine_mask(gx, y, opts.complementarity_tol);

  std::vector<Eigen::Index> constrained;
  for (Eigen::Index k = 0; k < free.size(); ++k) {
    if (free(k) == 0.0) constrained.push_back(k);
  }

  SubspaceBasis out;
  if (constrained.empty()) {
    out.vectors = tangent;
    return out;
  }
  // Row i: coordinate constrained[i] of Dg(x)[b_k] over the tangent basis.
  Matrix c(static_cast<Eigen::Index>(constrained.size()), d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Matrix dg = p.g_jvp(x, tangent[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < constrained.size(); ++i) {
      c(static_cast<Eigen::Index>(i), k) = dg(constrained[i]);
    }
  }
  Eigen::BDCSVD<Matrix> svd(c, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > opts.nullspace_tol) ++rank;
  }
  const Eigen::Index null_dim = d - rank;
  if (null_dim == 0) return out;
  const Matrix coeffs = svd.matrixV().rightCols(null_dim);
  const Matrix vecs = stack(tangent, mf.rows(), mf.cols()) * coeffs;
  out.vectors.reserve(static_cast<std::size_t>(null_dim));
  for (Eigen::Index j = 0; j < null_dim; ++j) {
    out.vectors.push_back(vecs.col(j).reshaped(mf.rows(), mf.cols()));
  }
  return out;
}

Certificate mssosc_from_basis(const Problem& p, const Point& x,
                              const Matrix& y, const SubspaceBasis& basis,
                              const CertifyOptions& opts) {
  Certificate cert;
  cert.kind = CertificateKind::kMssosc;
  cert.dimension = basis.dimension();
  cert.elements_enumerated = 1;
  if (cert.dimension == 0) {
    cert.min_eigenvalue = std::numeric_limits<double>::infinity();
    cert.verdict = Verdict::kDegenerateHolds;
    return cert;
  }
  std::vector<Matrix> images;
  images.reserve(basis.vectors.size());
  for (const Matrix& b : basis.vectors) {
    images.push_back(lagrangian_rhess_vec(p, x, y, b));
  }
  const Eigen::Index rows = p.manifold.rows();
  const Eigen::Index cols = p.manifold.cols();
  cert.min_eigenvalue =
      min_eig_compressed(stack(basis.vectors, rows, cols), stack(images, rows, cols));
  cert.verdict = verdict_for(cert.min_eigenvalue, cert.dimension, opts.eig_tol);
  return cert;
}

Certificate mssosc_certificate(const Problem& p, const Point& x,
                               const Matrix& y, const CertifyOptions& opts) {
  return mssosc_from_basis(p, x, y, critical_cone_basis(p, x, y, opts), opts);
}

Certificate genhess_min_eig(const Problem& p, double rho, const Point& x,
                            const Matrix& y, bool enumerate,
                            const CertifyOptions& opts) {
  const Manifold& mf = p.manifold;
  if (mf.dimension() > opts.max_dense_dim) {
    throw DomainError("genhess_min_eig: tangent dimension " +
                      std::to_string(mf.dimension()) +
                      " exceeds the dense assembly limit");
  }
  const AugmentedLagrangian al(p, rho, y);
  const AugLagEval ev = al.evaluate(x);
  const JacobianBundle bundle = p.theta->prox_jacobian_extremes(
      1.0 / rho, ev.shifted, enumerate ? opts.max_boundary : 0, opts.convention);

  Certificate cert;
  cert.kind = CertificateKind::kGeneralizedHessian;
  cert.boundary_count = bundle.boundary_count;
  cert.partial = enumerate && bundle.partial;

  const std::vector<Matrix> tangent = mf.tangent_basis(x);
  cert.dimension = static_cast<Eigen::Index>(tangent.size());
  if (cert.dimension == 0) {
    cert.min_eigenvalue = std::numeric_limits<double>::infinity();
    cert.verdict = Verdict::kDegenerateHolds;
    return cert;
  }
  const Matrix basis = stack(tangent, mf.rows(), mf.cols());

  // Without enumeration only the convention element (the first one) is used.
  const std::size_t count = enumerate ? bundle.elements.size() : 1;
  double min_eig = std::numeric_limits<double>::infinity();
  std::vector<Matrix> images(tangent.size());
  for (std::size_t e = 0; e < count; ++e) {
    const ProxJacobian& jac = bundle.elements[e];
    for (std::size_t j = 0; j < tangent.size(); ++j) {
      images[j] = al.hess_vec(ev, jac, tangent[j]);
    }
    min_eig = std::min(min_eig,
                       min_eig_compressed(basis, stack(images, mf.rows(), mf.cols())));
  }
  cert.elements_enumerated = count;
  cert.min_eigenvalue = min_eig;
  cert.verdict = verdict_for(min_eig, cert.dimension, opts.eig_tol);
  return cert;
}

RateFit fit_linear_rate(std::span<const double> residuals, double tail_fraction) {
  const std::size_t n = residuals.size();
  if (n < 5) throw DomainError("fit_linear_rate: need at least 5 residuals");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw DomainError("fit_linear_rate: tail_fraction must lie in (0, 1]");
  }
  const auto want = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  const std::size_t m = std::min(n, std::max<std::size_t>(5, want));
  const std::size_t first = n - m;

  double sx = 0.0, sy = 0.0;
  std::vector<double> logs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = residuals[first + i];
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw DomainError("fit_linear_rate: residuals in the tail must be positive");
    }
    logs[i] = std::log(r);
    sx += static_cast<double>(first + i);
    sy += logs[i];
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = static_cast<double>(first + i) - mx;
    const double dy = logs[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  RateFit fit;
  fit.points = m;
  fit.rate = std::exp(slope);
  // A constant sequence is fitted exactly by a zero slope.
  const double scale = std::max(1.0, std::abs(my));
  if (syy <= 1e-24 * scale * scale * static_cast<double>(m)) {
    fit.fit_quality = 1.0;
  } else {
    const double ss_res = std::max(0.0, syy - slope * sxy);
    fit.fit_quality = 1.0 - ss_res / syy;
  }
  return fit;
}

}  // namespace ralmkit
