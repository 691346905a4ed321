#pragma once

#include <cstdint>

#include "ralmkit/lagrangian.hpp"

namespace ralmkit {

// Periodic second-difference discretization of -1/2 Laplacian on [0, len]
// with n nodes: H_ii = 1/h^2, H_{i,i+-1 mod n} = -1/(2 h^2), h = len / n.
Matrix cm_hamiltonian(Eigen::Index n, double len);

struct CmInstance {
  Eigen::Index n = 0;
  Eigen::Index r = 0;
  double mu = 0.0;
  double len = 0.0;
  Matrix h;
};

CmInstance make_cm_instance(Eigen::Index n, Eigen::Index r, double mu, double len);

// Compressed modes: min tr(X^T H X) + mu ||X||_1 over St(n, r).
Problem build_cm(const CmInstance& inst);
Problem build_cm(Eigen::Index n, Eigen::Index r, double mu, double len);

// The n = 4, r = 2 stationary point on [0, 2] and its multiplier.
Matrix cm4_stationary_point();
Matrix cm4_multiplier(double mu);

struct RmcInstance {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::Index r = 0;
  Matrix a;
  // 0/1 indicator of observed entries.
  Matrix omega;
  double mu = 1.0;
};

// Robust matrix completion: min mu ||P_Omega(X - A)||_1 over Fr(m, n, r).
Problem build_rmc(const RmcInstance& inst);
Problem build_rmc(const Matrix& a, const Matrix& omega, Eigen::Index r,
                  double mu = 1.0);

// 5x5 rank-3 ground truth U S V^T with the factors U, V, S = diag(1, 2, 3)
// of the standard toy example.
struct RmcToyFactors {
  Matrix u;
  Matrix v;
  Vector s;
  Matrix a_ex;
};
RmcToyFactors rmc_toy_factors();

// Toy instance: A = A_ex + E with E supported in the lower-right 2x2 block.
RmcInstance rmc_toy_instance(const Matrix& e_block);

struct RmcGeneratorParams {
  Eigen::Index m = 20;
  Eigen::Index n = 20;
  Eigen::Index r = 2;
  double observed_fraction = 0.8;
  double outlier_density = 0.05;
  double outlier_magnitude = 1.0;
  std::uint64_t seed = 1;
};

// Random low-rank ground truth plus sparse +-magnitude outliers on observed
// entries. `truth` receives the clean low-rank matrix when non-null.
RmcInstance generate_rmc(const RmcGeneratorParams& params, Matrix* truth = nullptr);

}  // namespace ralmkit
