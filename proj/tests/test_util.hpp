#pragma once

#include "dlfdp/common.hpp"
#include "dlfdp/simgen.hpp"

#include <random>

namespace dlfdp::testing {

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Vector gaussian_vector(Index size, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(size);
  for (Index i = 0; i < size; ++i) v[i] = normal(rng);
  return v;
}

/// Random design with a planted sparse signal, i.i.d. N(0,1) entries.
inline Dataset random_dataset(Index n, Index p, Index s0, double beta1, double sigma,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x = gaussian_matrix(n, p, rng);
  Vector beta = Vector::Zero(p);
  beta.head(s0).setConstant(beta1);
  Vector y = x * beta + sigma * gaussian_vector(n, rng);
  return Dataset::make(std::move(x), std::move(y));
}

/// n x p design (n >= p) with X'X / n = I exactly.
inline Matrix orthonormal_design(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix g = gaussian_matrix(n, p, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, p);
  return std::sqrt(static_cast<double>(n)) * q;
}

}  // namespace dlfdp::testing
