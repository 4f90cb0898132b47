#include "qig/models.hpp"

#include "qig/error.hpp"
#include "qig/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qig {

namespace {

constexpr std::uint64_t kBaseStream = 0;

std::uint64_t perturbation_stream(PerturbationKind kind) {
  return 1 + static_cast<std::uint64_t>(kind);
}

Vector oscillator_levels(const ModelSpec& spec) {
  Vector h(spec.dim);
  for (Index n = 0; n < spec.dim; ++n) h(n) = 1.0 + spec.spacing * static_cast<double>(n);
  return h;
}

double grid_point(Index k, Index n) { return static_cast<double>(k + 1) / static_cast<double>(n + 1); }

Matrix laplacian_matrix(const ModelSpec& spec) {
  const Index n = spec.dim;
  Matrix l = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const double x = grid_point(k, n);
    l(k, k) = 2.0 + spec.potential_amplitude * (2.0 * x - 1.0) * (2.0 * x - 1.0);
    if (k + 1 < n) {
      l(k, k + 1) = -1.0;
      l(k + 1, k) = -1.0;
    }
  }
  const double lmin = eigenvalues(l)(0);
  l.diagonal().array() += 1.0 - lmin;
  return l;
}

// Matrix of a diagonal-in-spectral-coordinates construction: U T U^T, with
// the oscillator's basis taken as the standard one by construction.
Matrix from_spectral_coordinates(const ModelSpec& spec, const HermitianOperator* h, const Matrix& t) {
  if (spec.family == Family::oscillator) return t;
  const Matrix& u = h->eigenvectors();
  Matrix m = u * t * u.transpose();
  return 0.5 * (m + m.transpose());
}

Matrix direction(const ModelSpec& spec, PerturbationKind kind, const HermitianOperator* h) {
  const Index n = spec.dim;
  const Vector levels = spec.family == Family::oscillator ? oscillator_levels(spec) : h->eigenvalues();
  Rng rng(split_seed(spec.seed, perturbation_stream(kind)));
  switch (kind) {
    case PerturbationKind::bounded:
      return gaussian_symmetric(n, rng);
    case PerturbationKind::diagonal: {
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      Vector d(n);
      for (Index k = 0; k < n; ++k) d(k) = levels(k) * uniform(rng);
      return from_spectral_coordinates(spec, h, d.asDiagonal().toDenseMatrix());
    }
    case PerturbationKind::offdiagonal: {
      Matrix t = Matrix::Zero(n, n);
      for (Index k = 0; k + 1 < n; ++k) {
        t(k, k + 1) = std::sqrt(levels(k) * levels(k + 1));
        t(k + 1, k) = t(k, k + 1);
      }
      return from_spectral_coordinates(spec, h, t);
    }
    case PerturbationKind::potential: {
      Vector d(n);
      for (Index k = 0; k < n; ++k) d(k) = std::cos(2.0 * std::numbers::pi * grid_point(k, n));
      return d.asDiagonal().toDenseMatrix();
    }
    case PerturbationKind::random_symmetric: {
      const Matrix g = gaussian_symmetric(n, rng);
      if (spec.family == Family::oscillator) {
        const Vector s = levels.cwiseSqrt();
        return s.asDiagonal() * g * s.asDiagonal();
      }
      const Matrix root = function_matrix(h->spectral(), MatrixFunction::power(0.5));
      Matrix m = root * g * root;
      return 0.5 * (m + m.transpose());
    }
  }
  throw PreconditionError("unknown perturbation kind");
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::oscillator: return "oscillator";
    case Family::laplacian1d: return "laplacian1d";
    case Family::random_spd: return "random_spd";
  }
  return "?";
}

std::string to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::bounded: return "bounded";
    case PerturbationKind::diagonal: return "diagonal";
    case PerturbationKind::offdiagonal: return "offdiagonal";
    case PerturbationKind::potential: return "potential";
    case PerturbationKind::random_symmetric: return "random_symmetric";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::oscillator, Family::laplacian1d, Family::random_spd}) {
    if (to_string(f) == name) return f;
  }
  throw PreconditionError("unknown model family '" + name +
                          "' (expected oscillator, laplacian1d or random_spd)");
}

PerturbationKind parse_perturbation_kind(const std::string& name) {
  for (PerturbationKind k : {PerturbationKind::bounded, PerturbationKind::diagonal,
                             PerturbationKind::offdiagonal, PerturbationKind::potential,
                             PerturbationKind::random_symmetric}) {
    if (to_string(k) == name) return k;
  }
  throw PreconditionError("unknown perturbation kind '" + name + "'");
}

void validate(const ModelSpec& spec) {
  std::ostringstream os;
  if (spec.dim < 1) os << "model dim must be >= 1 (got " << spec.dim << "); ";
  if (!(spec.beta0 > 0.0 && spec.beta0 < 1.0)) os << "beta0 must lie in (0,1) (got " << spec.beta0 << "); ";
  if (spec.family == Family::oscillator && !(spec.spacing > 0.0 && std::isfinite(spec.spacing))) {
    os << "oscillator spacing must be positive and finite (got " << spec.spacing << "); ";
  }
  if (spec.family == Family::laplacian1d && !std::isfinite(spec.potential_amplitude)) {
    os << "potential amplitude must be finite; ";
  }
  if (spec.family == Family::random_spd && !(spec.lambda_max >= 1.0 && std::isfinite(spec.lambda_max))) {
    os << "lambda_max must be finite and >= 1 (got " << spec.lambda_max << "); ";
  }
  const std::string problems = os.str();
  if (!problems.empty()) throw PreconditionError("invalid model spec: " + problems.substr(0, problems.size() - 2));
}

HermitianOperator base_hamiltonian(const ModelSpec& spec) {
  validate(spec);
  switch (spec.family) {
    case Family::oscillator:
      return HermitianOperator::diagonal(oscillator_levels(spec));
    case Family::laplacian1d: {
      const HermitianOperator l(laplacian_matrix(spec));
      // Pin the smallest eigenvalue to exactly 1 after re-diagonalizing.
      return l.shifted(1.0 - l.min_eigenvalue());
    }
    case Family::random_spd: {
      Rng rng(split_seed(spec.seed, kBaseStream));
      std::uniform_real_distribution<double> uniform(0.0, std::log(spec.lambda_max));
      Vector lambda(spec.dim);
      for (Index k = 0; k < spec.dim; ++k) lambda(k) = std::exp(uniform(rng));
      lambda.array() += 1.0 - lambda.minCoeff();
      return HermitianOperator::from_spectrum(lambda, haar_orthogonal(spec.dim, rng));
    }
  }
  throw PreconditionError("unknown model family");
}

BasePoint make_base(const ModelSpec& spec) { return BasePoint(base_hamiltonian(spec), spec.beta0); }

Matrix perturbation_direction(const ModelSpec& spec, PerturbationKind kind) {
  validate(spec);
  if (spec.family == Family::oscillator) return direction(spec, kind, nullptr);
  const HermitianOperator h = base_hamiltonian(spec);
  return direction(spec, kind, &h);
}

HermitianOperator make_perturbation(const BasePoint& base, const ModelSpec& spec,
                                    PerturbationKind kind, double scale, NormKind norm_kind) {
  validate(spec);
  if (base.dim() != spec.dim) throw DimensionError("base dimension does not match the model spec");
  if (!std::isfinite(scale)) throw PreconditionError("perturbation scale must be finite");
  const HermitianOperator dir(direction(spec, kind, &base.hamiltonian()));
  const double n = norm(base, dir, norm_kind);
  if (!(n > 0.0)) {
    throw PreconditionError("perturbation direction '" + to_string(kind) +
                            "' is zero at this model and cannot be scaled");
  }
  return dir * (scale / n);
}

HermitianOperator make_perturbation(const ModelSpec& spec, PerturbationKind kind, double scale,
                                    NormKind norm_kind) {
  return make_perturbation(make_base(spec), spec, kind, scale, norm_kind);
}

SpectrumFamily truncation_family(const ModelSpec& spec, PerturbationKind kind, double factor) {
  validate(spec);
  return [spec, kind, factor](Index n) {
    ModelSpec truncated = spec;
    truncated.dim = n;
    Matrix m;
    Matrix dir;
    switch (spec.family) {
      case Family::oscillator:
        m = oscillator_levels(truncated).asDiagonal().toDenseMatrix();
        dir = direction(truncated, kind, nullptr);
        break;
      case Family::laplacian1d:
        m = laplacian_matrix(truncated);
        if (kind == PerturbationKind::potential || kind == PerturbationKind::bounded) {
          dir = direction(truncated, kind, nullptr);
        } else {
          const HermitianOperator h(m);
          dir = direction(truncated, kind, &h);
        }
        break;
      case Family::random_spd: {
        const HermitianOperator h = base_hamiltonian(truncated);
        m = h.matrix();
        dir = direction(truncated, kind, &h);
        break;
      }
    }
    return eigenvalues(m + factor * dir);
  };
}

}  // namespace qig
