#include "qig/random.hpp"

#include <Eigen/QR>

#include <cmath>

namespace qig {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix gaussian_symmetric(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double off = 1.0 / std::sqrt(2.0);
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      g(i, j) = off * normal(rng);
      g(j, i) = g(i, j);
    }
    g(i, i) = normal(rng);
  }
  return g;
}

Matrix haar_orthogonal(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Vector random_unit_vector(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  const double norm = v.norm();
  if (norm == 0.0) return random_unit_vector(n, rng);
  return v / norm;
}

}  // namespace qig
