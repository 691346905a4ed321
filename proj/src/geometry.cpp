#include "ralmkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace ralmkit {

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

Matrix thin_q(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  const Eigen::Index k = std::min(a.rows(), a.cols());
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), k);
  // Fix signs so that diag(R) >= 0; keeps results deterministic across
  // equivalent inputs.
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

double orthonormality_error(const Matrix& q) {
  if (q.size() == 0) return 0.0;
  const Matrix e = q.transpose() * q - Matrix::Identity(q.cols(), q.cols());
  return e.cwiseAbs().maxCoeff();
}

}  // namespace

const char* to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return "euclidean";
    case ManifoldKind::kStiefel:
      return "stiefel";
    case ManifoldKind::kFixedRank:
      return "fixed_rank";
  }
  return "unknown";
}

Matrix orthonormal_complement(const Matrix& q) {
  const Eigen::Index m = q.rows();
  const Eigen::Index r = q.cols();
  if (r >= m) return Matrix(m, 0);
  Eigen::HouseholderQR<Matrix> qr(q);
  Matrix full = qr.householderQ() * Matrix::Identity(m, m);
  return full.rightCols(m - r);
}

Manifold Manifold::euclidean(Eigen::Index rows, Eigen::Index cols) {
  if (rows <= 0 || cols <= 0) throw DomainError("euclidean: empty shape");
  return Manifold(ManifoldKind::kEuclidean, rows, cols, 0);
}

Manifold Manifold::stiefel(Eigen::Index n, Eigen::Index r) {
  if (r <= 0 || r > n) throw DomainError("stiefel: need 0 < r <= n");
  return Manifold(ManifoldKind::kStiefel, n, r, r);
}

Manifold Manifold::fixed_rank(Eigen::Index m, Eigen::Index n, Eigen::Index r) {
  if (r <= 0 || r > std::min(m, n)) {
    throw DomainError("fixed_rank: need 0 < r <= min(m, n)");
  }
  return Manifold(ManifoldKind::kFixedRank, m, n, r);
}

Eigen::Index Manifold::dimension() const {
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      return rows_ * cols_;
    case ManifoldKind::kStiefel:
      return rows_ * rank_ - rank_ * (rank_ + 1) / 2;
    case ManifoldKind::kFixedRank:
      return rank_ * (rows_ + cols_ - rank_);
  }
  return 0;
}

void Manifold::check_ambient(const Matrix& y, const char* what) const {
  if (y.rows() != rows_ || y.cols() != cols_) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows_) +
                     "x" + std::to_string(cols_) + ", got " +
                     std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
  }
}

void Manifold::check_point(const Point& x) const {
  check_ambient(x.ambient(), "point");
  if (kind_ == ManifoldKind::kFixedRank && !x.has_factors()) {
    throw InvariantError("fixed-rank point without SVD factors");
  }
}

Point Manifold::make_point(const Matrix& x) const {
  check_ambient(x, "make_point");
  if (!x.allFinite()) throw NonFiniteError("make_point: non-finite entries");
  Point p;
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      p.ambient_ = x;
      return p;
    case ManifoldKind::kStiefel: {
      const double err = orthonormality_error(x);
      if (err > tol_.stiefel_orthonormality) {
        throw InvariantError("Stiefel invariant X^T X = I violated: max error " +
                             std::to_string(err));
      }
      p.ambient_ = x;
      return p;
    }
    case ManifoldKind::kFixedRank: {
      Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector& s = svd.singularValues();
      if (s(rank_ - 1) <= tol_.rank_drop) {
        throw InvariantError("fixed-rank invariant violated: sigma_r = " +
                             std::to_string(s(rank_ - 1)));
      }
      if (s.size() > rank_ &&
          s(rank_) > tol_.rank_excess * std::max(1.0, s(0))) {
        throw InvariantError("fixed-rank invariant violated: rank exceeds " +
                             std::to_string(rank_) + " (sigma_{r+1} = " +
                             std::to_string(s(rank_)) + ")");
      }
      return make_fixed_rank(svd.matrixU().leftCols(rank_), s.head(rank_),
                             svd.matrixV().leftCols(rank_));
    }
  }
  return p;
}

Point Manifold::make_fixed_rank(const Matrix& u, const Vector& sigma,
                                const Matrix& v) const {
  if (kind_ != ManifoldKind::kFixedRank) {
    throw DomainError("make_fixed_rank on a non fixed-rank manifold");
  }
  if (u.rows() != rows_ || v.rows() != cols_ || u.cols() != rank_ ||
      v.cols() != rank_ || sigma.size() != rank_) {
    throw ShapeError("make_fixed_rank: factor shapes do not match Fr(m,n,r)");
  }
  if (orthonormality_error(u) > tol_.stiefel_orthonormality ||
      orthonormality_error(v) > tol_.stiefel_orthonormality) {
    throw InvariantError("fixed-rank factors U, V must have orthonormal columns");
  }
  for (Eigen::Index i = 0; i < rank_; ++i) {
    if (!(sigma(i) > 0.0)) {
      throw InvariantError("fixed-rank singular values must be positive");
    }
    if (i > 0 && sigma(i) > sigma(i - 1)) {
      throw InvariantError("fixed-rank singular values must be nonincreasing");
    }
  }
  Point p;
  p.u_ = u;
  p.sigma_ = sigma;
  p.v_ = v;
  p.ambient_ = u * sigma.asDiagonal() * v.transpose();
  return p;
}

Matrix Manifold::project(const Point& x, const Matrix& y) const {
  check_point(x);
  check_ambient(y, "project");
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      return y;
    case ManifoldKind::kStiefel: {
      const Matrix& X = x.ambient();
      return y - X * sym(X.transpose() * y);
    }
    case ManifoldKind::kFixedRank:
      return from_factored(x, to_factored(x, y));
  }
  return y;
}

FactoredTangent Manifold::to_factored(const Point& x, const Matrix& xi) const {
  if (kind_ != ManifoldKind::kFixedRank) {
    throw DomainError("to_factored requires a fixed-rank manifold");
  }
  check_point(x);
  check_ambient(xi, "to_factored");
  const Matrix& U = x.u();
  const Matrix& V = x.v();
  FactoredTangent t;
  const Matrix yv = xi * V;
  const Matrix ytu = xi.transpose() * U;
  t.m = U.transpose() * yv;
  t.up = yv - U * t.m;
  t.vp = ytu - V * t.m.transpose();
  return t;
}

Matrix Manifold::from_factored(const Point& x, const FactoredTangent& t) const {
  const Matrix& U = x.u();
  const Matrix& V = x.v();
  return U * t.m * V.transpose() + t.up * V.transpose() +
         U * t.vp.transpose();
}

Point Manifold::retract(const Point& x, const Matrix& xi) const {
  check_point(x);
  check_ambient(xi, "retract");
  if (!xi.allFinite()) throw NonFiniteError("retract: non-finite step");
  Point p;
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      p.ambient_ = x.ambient() + xi;
      return p;
    case ManifoldKind::kStiefel: {
      // Polar factor of X + xi.
      Eigen::JacobiSVD<Matrix> svd(x.ambient() + xi,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
      p.ambient_ = svd.matrixU() * svd.matrixV().transpose();
      return p;
    }
    case ManifoldKind::kFixedRank: {
      // X + xi = [U Up] [[S + M, I], [I, 0]] [V Vp]^T, reduced to a small SVD.
      const FactoredTangent t = to_factored(x, xi);
      const Eigen::Index r = rank_;
      Matrix left(rows_, 2 * r);
      left << x.u(), t.up;
      Matrix right(cols_, 2 * r);
      right << x.v(), t.vp;
      Eigen::HouseholderQR<Matrix> qr_l(left);
      Eigen::HouseholderQR<Matrix> qr_r(right);
      const Eigen::Index kl = std::min(rows_, 2 * r);
      const Eigen::Index kr = std::min(cols_, 2 * r);
      const Matrix ql = qr_l.householderQ() * Matrix::Identity(rows_, kl);
      const Matrix qrm = qr_r.householderQ() * Matrix::Identity(cols_, kr);
      const Matrix rl = qr_l.matrixQR().topRows(kl).triangularView<Eigen::Upper>();
      const Matrix rr = qr_r.matrixQR().topRows(kr).triangularView<Eigen::Upper>();
      Matrix core = Matrix::Zero(2 * r, 2 * r);
      core.topLeftCorner(r, r) = t.m;
      core.topLeftCorner(r, r).diagonal() += x.sigma();
      core.topRightCorner(r, r).setIdentity();
      core.bottomLeftCorner(r, r).setIdentity();
      const Matrix small = rl * core * rr.transpose();
      Eigen::JacobiSVD<Matrix> svd(small, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector& s = svd.singularValues();
      if (!(s(r - 1) > tol_.rank_drop)) {
        throw RankDropError("fixed-rank retraction: sigma_r = " +
                            std::to_string(s(r - 1)) + " below chart threshold");
      }
      return make_fixed_rank(ql * svd.matrixU().leftCols(r), s.head(r),
                             qrm * svd.matrixV().leftCols(r));
    }
  }
  return p;
}

Matrix Manifold::rgrad(const Point& x, const Matrix& egrad) const {
  return project(x, egrad);
}

Matrix Manifold::rhess_vec(const Point& x, const Matrix& egrad,
                           const Matrix& ehess_vec, const Matrix& xi) const {
  check_point(x);
  check_ambient(egrad, "rhess_vec egrad");
  check_ambient(ehess_vec, "rhess_vec ehess_vec");
  check_ambient(xi, "rhess_vec xi");
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      return ehess_vec;
    case ManifoldKind::kStiefel: {
      const Matrix& X = x.ambient();
      return project(x, ehess_vec - xi * sym(X.transpose() * egrad));
    }
    case ManifoldKind::kFixedRank: {
      const Vector& s = x.sigma();
      if (s.minCoeff() < tol_.rank_drop) {
        throw DomainError("rhess_vec: singular value below 1e-12 at base point");
      }
      const Matrix& U = x.u();
      const Matrix& V = x.v();
      const FactoredTangent t = to_factored(x, xi);
      const Vector s_inv = s.cwiseInverse();
      FactoredTangent h = to_factored(x, ehess_vec);
      // Curvature terms from the Euclidean gradient.
      Matrix cu = (egrad * t.vp) * s_inv.asDiagonal();
      cu -= U * (U.transpose() * cu);
      Matrix cv = (egrad.transpose() * t.up) * s_inv.asDiagonal();
      cv -= V * (V.transpose() * cv);
      h.up += cu;
      h.vp += cv;
      return from_factored(x, h);
    }
  }
  return ehess_vec;
}

double Manifold::inner(const Matrix& a, const Matrix& b) const {
  require_same_shape(a, b, "inner");
  return frob_inner(a, b);
}

double Manifold::norm(const Matrix& a) const { return a.norm(); }

Matrix Manifold::random_tangent(const Point& x, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    Matrix xi = project(x, gaussian(rows_, cols_, rng));
    const double n = xi.norm();
    if (n > 1e-8) return xi / n;
  }
  throw Error("random_tangent: tangent space appears trivial");
}

Point Manifold::random_point(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      return make_point(gaussian(rows_, cols_, rng));
    case ManifoldKind::kStiefel:
      return make_point(thin_q(gaussian(rows_, cols_, rng)));
    case ManifoldKind::kFixedRank: {
      const Matrix u = thin_q(gaussian(rows_, rank_, rng));
      const Matrix v = thin_q(gaussian(cols_, rank_, rng));
      std::uniform_real_distribution<double> unif(1.0, 2.0);
      Vector s(rank_);
      for (Eigen::Index i = 0; i < rank_; ++i) s(i) = unif(rng);
      std::sort(s.data(), s.data() + s.size(), std::greater<double>());
      return make_fixed_rank(u, s, v);
    }
  }
  return Point();
}

std::vector<Matrix> Manifold::tangent_basis(const Point& x) const {
  check_point(x);
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(dimension()));
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      for (Eigen::Index j = 0; j < cols_; ++j) {
        for (Eigen::Index i = 0; i < rows_; ++i) {
          Matrix e = Matrix::Zero(rows_, cols_);
          e(i, j) = 1.0;
          basis.push_back(std::move(e));
        }
      }
      break;
    case ManifoldKind::kStiefel: {
      const Matrix& X = x.ambient();
      const Matrix xperp = orthonormal_complement(X);
      const double w = 1.0 / std::sqrt(2.0);
      for (Eigen::Index i = 0; i < rank_; ++i) {
        for (Eigen::Index j = i + 1; j < rank_; ++j) {
          Matrix e = Matrix::Zero(rows_, cols_);
          e.col(j) += w * X.col(i);
          e.col(i) -= w * X.col(j);
          basis.push_back(std::move(e));
        }
      }
      for (Eigen::Index j = 0; j < rank_; ++j) {
        for (Eigen::Index a = 0; a < xperp.cols(); ++a) {
          Matrix e = Matrix::Zero(rows_, cols_);
          e.col(j) = xperp.col(a);
          basis.push_back(std::move(e));
        }
      }
      break;
    }
    case ManifoldKind::kFixedRank: {
      const Matrix& U = x.u();
      const Matrix& V = x.v();
      const Matrix uperp = orthonormal_complement(U);
      const Matrix vperp = orthonormal_complement(V);
      for (Eigen::Index i = 0; i < rank_; ++i) {
        for (Eigen::Index j = 0; j < rank_; ++j) {
          basis.push_back(U.col(i) * V.col(j).transpose());
        }
      }
      for (Eigen::Index a = 0; a < uperp.cols(); ++a) {
        for (Eigen::Index j = 0; j < rank_; ++j) {
          basis.push_back(uperp.col(a) * V.col(j).transpose());
        }
      }
      for (Eigen::Index i = 0; i < rank_; ++i) {
        for (Eigen::Index b = 0; b < vperp.cols(); ++b) {
          basis.push_back(U.col(i) * vperp.col(b).transpose());
        }
      }
      break;
    }
  }
  return basis;
}

double Manifold::tangent_violation(const Point& x, const Matrix& xi) const {
  check_point(x);
  check_ambient(xi, "tangent_violation");
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      return 0.0;
    case ManifoldKind::kStiefel: {
      const Matrix a = x.ambient().transpose() * xi;
      return (a + a.transpose()).cwiseAbs().maxCoeff();
    }
    case ManifoldKind::kFixedRank:
      return (xi - project(x, xi)).cwiseAbs().maxCoeff();
  }
  return 0.0;
}

double Manifold::point_violation(const Point& x) const {
  check_ambient(x.ambient(), "point_violation");
  switch (kind_) {
    case ManifoldKind::kEuclidean:
      return 0.0;
    case ManifoldKind::kStiefel:
      return orthonormality_error(x.ambient());
    case ManifoldKind::kFixedRank: {
      if (!x.has_factors()) return std::numeric_limits<double>::infinity();
      const Vector& s = x.sigma();
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!(s(i) > 0.0) || (i > 0 && s(i) > s(i - 1))) {
          return std::numeric_limits<double>::infinity();
        }
      }
      return std::max(orthonormality_error(x.u()), orthonormality_error(x.v()));
    }
  }
  return 0.0;
}

}  // namespace ralmkit
