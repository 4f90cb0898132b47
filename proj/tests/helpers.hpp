#pragma once

#include "qig/linalg.hpp"
#include "qig/models.hpp"
#include "qig/random.hpp"

#include <cmath>
#include <cstdint>

namespace testing {

inline qig::Matrix mat2(double a, double b, double c, double d) {
  qig::Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline double max_abs(const qig::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline qig::Vector vec(std::initializer_list<double> xs) {
  qig::Vector v(static_cast<qig::Index>(xs.size()));
  qig::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

/// Random SPD base (random_spd family) and a form-relative random X scaled to
/// norm_zero = scale; instance i of a seeded ensemble.
struct Pair {
  qig::ModelSpec spec;
  qig::BasePoint base;
  qig::HermitianOperator x;
};

inline Pair random_pair(std::uint64_t seed, std::uint64_t i, qig::Index dim, double scale,
                        double lambda_max = 50.0,
                        qig::PerturbationKind kind = qig::PerturbationKind::random_symmetric) {
  qig::ModelSpec spec;
  spec.family = qig::Family::random_spd;
  spec.dim = dim;
  spec.lambda_max = lambda_max;
  spec.seed = qig::split_seed(seed, i);
  spec.beta0 = 0.5;
  qig::BasePoint base = qig::make_base(spec);
  qig::HermitianOperator x = qig::make_perturbation(base, spec, kind, scale);
  return {spec, base, x};
}

}  // namespace testing
