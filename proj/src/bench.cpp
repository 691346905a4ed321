#include "ralmkit/bench.hpp"

#include <cmath>
#include <random>

#include <Eigen/QR>

namespace ralmkit {

Matrix cm_hamiltonian(Eigen::Index n, double len) {
  if (n < 3) throw DomainError("cm: need n >= 3");
  if (!(len > 0.0)) throw DomainError("cm: domain length must be positive");
  const double h = len / static_cast<double>(n);
  const double diag = 1.0 / (h * h);
  const double off = -0.5 / (h * h);
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = diag;
    out(i, (i + 1) % n) += off;
    out(i, (i + n - 1) % n) += off;
  }
  return out;
}

CmInstance make_cm_instance(Eigen::Index n, Eigen::Index r, double mu, double len) {
  if (r < 1 || r > n) throw DomainError("cm: need 1 <= r <= n");
  if (!(mu > 0.0)) throw DomainError("cm: mu must be positive");
  CmInstance inst;
  inst.n = n;
  inst.r = r;
  inst.mu = mu;
  inst.len = len;
  inst.h = cm_hamiltonian(n, len);
  return inst;
}

Problem build_cm(const CmInstance& inst) {
  Problem p{Manifold::stiefel(inst.n, inst.r)};
  p.name = "cm";
  const Matrix h = inst.h;
  p.f = [h](const Point& x) {
    const Matrix& X = x.ambient();
    return frob_inner(X, h * X);
  };
  p.f_egrad = [h](const Point& x) -> Matrix { return 2.0 * (h * x.ambient()); };
  p.f_ehess_vec = [h](const Point&, const Matrix& xi) -> Matrix { return 2.0 * (h * xi); };
  p.g = [](const Point& x) -> Matrix { return x.ambient(); };
  p.g_jvp = [](const Point&, const Matrix& xi) -> Matrix { return xi; };
  p.g_vjp = [](const Point&, const Matrix& w) -> Matrix { return w; };
  p.theta = std::make_shared<L1Norm>(inst.mu);
  return p;
}

Problem build_cm(Eigen::Index n, Eigen::Index r, double mu, double len) {
  return build_cm(make_cm_instance(n, r, mu, len));
}

Matrix cm4_stationary_point() {
  const double a = std::sqrt(2.0) / 2.0;
  Matrix x(4, 2);
  x << 0, a,
       0, a,
       a, 0,
       a, 0;
  return x;
}

Matrix cm4_multiplier(double mu) {
  Matrix y(4, 2);
  y << 0, 1,
       0, 1,
       1, 0,
       1, 0;
  return mu * y;
}

Problem build_rmc(const RmcInstance& inst) {
  if (inst.a.rows() != inst.m || inst.a.cols() != inst.n) {
    throw ShapeError("rmc: observed matrix does not match m x n");
  }
  require_same_shape(inst.a, inst.omega, "rmc: omega vs A");
  if (inst.omega.sum() <= 0.0) throw DomainError("rmc: observation set is empty");
  Problem p{Manifold::fixed_rank(inst.m, inst.n, inst.r)};
  p.name = "rmc";
  const Matrix a = inst.a;
  const Matrix omega = inst.omega;
  const Eigen::Index m = inst.m;
  const Eigen::Index n = inst.n;
  p.f = [](const Point&) { return 0.0; };
  p.f_egrad = [m, n](const Point&) -> Matrix { return Matrix::Zero(m, n); };
  p.f_ehess_vec = [m, n](const Point&, const Matrix&) -> Matrix { return Matrix::Zero(m, n); };
  p.g = [a, omega](const Point& x) -> Matrix {
    return omega.cwiseProduct(x.ambient() - a);
  };
  p.g_jvp = [omega](const Point&, const Matrix& xi) -> Matrix {
    return omega.cwiseProduct(xi);
  };
  p.g_vjp = [omega](const Point&, const Matrix& w) -> Matrix {
    return omega.cwiseProduct(w);
  };
  p.theta = std::make_shared<L1Norm>(inst.mu);
  return p;
}

Problem build_rmc(const Matrix& a, const Matrix& omega, Eigen::Index r, double mu) {
  RmcInstance inst;
  inst.m = a.rows();
  inst.n = a.cols();
  inst.r = r;
  inst.a = a;
  inst.omega = omega;
  inst.mu = mu;
  return build_rmc(inst);
}

RmcToyFactors rmc_toy_factors() {
  const double a = std::sqrt(2.0) / 2.0;
  RmcToyFactors t;
  t.u = Matrix::Zero(5, 3);
  t.u(0, 0) = 1.0;
  t.u(1, 1) = -a;
  t.u(2, 1) = a;
  t.u(1, 2) = a;
  t.u(2, 2) = a;
  t.v = Matrix::Zero(5, 3);
  t.v(0, 0) = 1.0;
  t.v(1, 1) = 0.6;
  t.v(2, 1) = -0.8;
  t.v(1, 2) = 0.8;
  t.v(2, 2) = 0.6;
  t.s = Vector(3);
  t.s << 1.0, 2.0, 3.0;
  t.a_ex = t.u * t.s.asDiagonal() * t.v.transpose();
  return t;
}

RmcInstance rmc_toy_instance(const Matrix& e_block) {
  if (e_block.rows() != 2 || e_block.cols() != 2) {
    throw ShapeError("rmc toy: outlier block must be 2x2");
  }
  const RmcToyFactors t = rmc_toy_factors();
  RmcInstance inst;
  inst.m = 5;
  inst.n = 5;
  inst.r = 3;
  inst.a = t.a_ex;
  inst.a.bottomRightCorner(2, 2) += e_block;
  inst.omega = Matrix::Ones(5, 5);
  inst.mu = 1.0;
  return inst;
}

RmcInstance generate_rmc(const RmcGeneratorParams& prm, Matrix* truth) {
  if (prm.r < 1 || prm.r > std::min(prm.m, prm.n)) throw DomainError("rmc generator: bad rank");
  std::mt19937_64 rng(prm.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix l(prm.m, prm.r), rt(prm.n, prm.r);
  for (Eigen::Index j = 0; j < prm.r; ++j) {
    for (Eigen::Index i = 0; i < prm.m; ++i) l(i, j) = normal(rng);
    for (Eigen::Index i = 0; i < prm.n; ++i) rt(i, j) = normal(rng);
  }
  const Matrix clean = l * rt.transpose();
  RmcInstance inst;
  inst.m = prm.m;
  inst.n = prm.n;
  inst.r = prm.r;
  inst.omega = Matrix::Zero(prm.m, prm.n);
  inst.a = Matrix::Zero(prm.m, prm.n);
  for (Eigen::Index j = 0; j < prm.n; ++j) {
    for (Eigen::Index i = 0; i < prm.m; ++i) {
      if (unif(rng) >= prm.observed_fraction) continue;
      inst.omega(i, j) = 1.0;
      double v = clean(i, j);
      if (unif(rng) < prm.outlier_density) {
        v += unif(rng) < 0.5 ? -prm.outlier_magnitude : prm.outlier_magnitude;
      }
      inst.a(i, j) = v;
    }
  }
  if (inst.omega.sum() <= 0.0) throw DomainError("rmc generator: empty observation set");
  if (truth != nullptr) *truth = clean;
  return inst;
}

}  // namespace ralmkit
