#include "qig/perturbation.hpp"

#include "qig/error.hpp"
#include "qig/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <sstream>

namespace qig {

namespace {

constexpr double kMinEigenvalueSlack = 1e-12;
constexpr int kBisectionSteps = 40;

BaseId hash_bytes(BaseId h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_dims(const BasePoint& base, const HermitianOperator& x) {
  if (base.dim() != x.dim()) {
    std::ostringstream os;
    os << "perturbation dimension " << x.dim() << " does not match base dimension " << base.dim();
    throw DimensionError(os.str());
  }
}

// X expressed in the eigenbasis of H.
Matrix in_eigenbasis(const BasePoint& base, const HermitianOperator& x) {
  const Matrix& u = base.hamiltonian().eigenvectors();
  return u.transpose() * x.matrix() * u;
}

std::pair<double, double> weights_for(NormKind kind) {
  switch (kind.type) {
    case NormKind::Type::omega: return {0.0, 1.0};
    case NormKind::Type::zero: return {0.5, 0.5};
    case NormKind::Type::eps: return {0.5 + kind.eps, 0.5 - kind.eps};
  }
  return {0.5, 0.5};
}

// R^left X R^right in H's eigenbasis, where R is diagonal. The pair is
// canonicalized to left <= right (the two orders are transposes of each
// other), so eps = 1/2 runs the exact same arithmetic as the omega norm.
struct Weighted {
  Matrix m;
  Vector identity_diagonal;  // R^left I R^right
  bool symmetric;
};

Weighted weighted(const BasePoint& base, const HermitianOperator& x, double left, double right) {
  check_dims(base, x);
  if (left > right) std::swap(left, right);
  const Vector& h = base.hamiltonian().eigenvalues();
  const Vector wl = h.array().pow(-left);
  const Vector wr = h.array().pow(-right);
  return {wl.asDiagonal() * in_eigenbasis(base, x) * wr.asDiagonal(), wl.cwiseProduct(wr), left == right};
}

double norm_of(const Matrix& m, bool symmetric) {
  if (symmetric) {
    const Vector ev = eigenvalues(0.5 * (m + m.transpose()));
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  return operator_norm(m);
}

double weighted_norm(const BasePoint& base, const HermitianOperator& x, double left, double right) {
  const Weighted w = weighted(base, x, left, right);
  return norm_of(w.m, w.symmetric);
}

}  // namespace

BasePoint::BasePoint(HermitianOperator hamiltonian, double beta0)
    : h_(std::move(hamiltonian)),
      r_(HermitianOperator::zero(1)),
      rho_(HermitianOperator::zero(1)),
      log_z_(0.0),
      beta0_(beta0) {
  if (!(beta0 > 0.0 && beta0 < 1.0)) {
    std::ostringstream os;
    os << "beta0 must lie in (0,1), got " << beta0;
    throw PreconditionError(os.str());
  }
  if (h_.min_eigenvalue() < 1.0 - kMinEigenvalueSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "base Hamiltonian must satisfy H >= I; min eigenvalue is " << h_.min_eigenvalue();
    throw PreconditionError(os.str());
  }
  const Vector& lambda = h_.eigenvalues();
  r_ = HermitianOperator::from_spectrum(lambda.cwiseInverse(), h_.eigenvectors());
  const double lmin = lambda(0);
  Vector w = (-(lambda.array() - lmin)).exp();
  const double total = w.sum();
  log_z_ = -lmin + std::log(total);
  rho_ = HermitianOperator::from_spectrum(w / total, h_.eigenvectors());

  BaseId id = 0xcbf29ce484222325ULL;
  const Index n = h_.dim();
  id = hash_bytes(id, &n, sizeof n);
  id = hash_bytes(id, h_.matrix().data(), sizeof(double) * static_cast<std::size_t>(h_.matrix().size()));
  id = hash_bytes(id, &beta0_, sizeof beta0_);
  id_ = id;
}

std::string NormKind::name() const {
  switch (type) {
    case Type::omega: return "omega";
    case Type::zero: return "zero";
    case Type::eps: {
      std::ostringstream os;
      os << "eps:" << eps;
      return os.str();
    }
  }
  return "?";
}

NormKind NormKind::parse(const std::string& text) {
  if (text == "omega") return omega();
  if (text == "zero") return zero();
  if (text.rfind("eps:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double e = std::stod(text.substr(4), &used);
      if (used == text.size() - 4 && e >= 0.0 && e <= 0.5) return epsilon(e);
    } catch (const std::exception&) {
    }
  }
  throw PreconditionError("unknown norm kind '" + text + "' (expected omega, zero or eps:<0..0.5>)");
}

double norm_omega(const BasePoint& base, const HermitianOperator& x) {
  return weighted_norm(base, x, 0.0, 1.0);
}

double norm_zero(const BasePoint& base, const HermitianOperator& x) {
  return weighted_norm(base, x, 0.5, 0.5);
}

double norm_eps(const BasePoint& base, const HermitianOperator& x, double eps) {
  if (!(eps >= 0.0 && eps <= 0.5)) {
    std::ostringstream os;
    os << "eps must lie in [0, 1/2], got " << eps;
    throw PreconditionError(os.str());
  }
  return weighted_norm(base, x, 0.5 + eps, 0.5 - eps);
}

double norm(const BasePoint& base, const HermitianOperator& x, NormKind kind) {
  switch (kind.type) {
    case NormKind::Type::omega: return norm_omega(base, x);
    case NormKind::Type::zero: return norm_zero(base, x);
    case NormKind::Type::eps: return norm_eps(base, x, kind.eps);
  }
  return norm_zero(base, x);
}

std::vector<double> eps_grid(int points) {
  if (points < 2) throw PreconditionError("eps grid needs at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = 0.5 * i / (points - 1);
  grid.back() = 0.5;
  return grid;
}

PerturbationNorms perturbation_norms(const BasePoint& base, const HermitianOperator& x,
                                     int grid_points) {
  PerturbationNorms out;
  out.omega = norm_omega(base, x);
  out.zero = norm_zero(base, x);
  for (double e : eps_grid(grid_points)) out.eps_grid.emplace_back(e, norm_eps(base, x, e));
  return out;
}

namespace {

// H^{-1/2} X H^{-1/2} in H's eigenbasis, and the diagonal of H^{-1} there.
struct FormPencil {
  Matrix s;
  Vector r;
};

FormPencil form_pencil(const BasePoint& base, const HermitianOperator& x) {
  check_dims(base, x);
  const Vector& h = base.hamiltonian().eigenvalues();
  const Vector w = h.array().rsqrt();
  return {w.asDiagonal() * in_eigenbasis(base, x) * w.asDiagonal(), h.cwiseInverse()};
}

double form_bound_at(const FormPencil& p, double b) {
  Matrix plus = p.s;
  plus.diagonal() -= b * p.r;
  Matrix minus = -p.s;
  minus.diagonal() -= b * p.r;
  const Vector ep = eigenvalues(0.5 * (plus + plus.transpose()));
  const Vector em = eigenvalues(0.5 * (minus + minus.transpose()));
  return std::max({0.0, ep(ep.size() - 1), em(em.size() - 1)});
}

}  // namespace

double form_bound_at(const BasePoint& base, const HermitianOperator& x, double b) {
  return form_bound_at(form_pencil(base, x), b);
}

std::span<const double> default_b_grid() {
  static constexpr std::array<double, 5> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  return grid;
}

RelativeBound relative_bound_form(const BasePoint& base, const HermitianOperator& x,
                                  std::span<const double> b_grid) {
  if (b_grid.empty()) throw PreconditionError("b grid must be nonempty");
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    if (!(b_grid[i] >= 0.0) || (i > 0 && b_grid[i] < b_grid[i - 1])) {
      throw PreconditionError("b grid must be nonnegative and ascending");
    }
  }
  const FormPencil pencil = form_pencil(base, x);
  std::vector<double> a(b_grid.size());
  for (std::size_t i = 0; i < b_grid.size(); ++i) a[i] = form_bound_at(pencil, b_grid[i]);
  const double best = *std::min_element(a.begin(), a.end());
  const double tol = 1e-12 * (1.0 + best);
  std::size_t k = 0;
  while (a[k] > best + tol) ++k;

  RelativeBound out{a[k], b_grid[k], BoundKind::form_bound};
  if (k == 0) return out;
  double lo = b_grid[k - 1];
  double hi = b_grid[k];
  double a_hi = a[k];
  for (int step = 0; step < kBisectionSteps && hi - lo > 0.0; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double a_mid = form_bound_at(pencil, mid);
    if (a_mid <= best) {
      hi = mid;
      a_hi = a_mid;
    } else {
      lo = mid;
    }
  }
  out.a = a_hi;
  out.b = hi;
  return out;
}

RelativeBound relative_bound_operator(const BasePoint& base, const HermitianOperator& x) {
  return {norm_omega(base, x), 0.0, BoundKind::operator_bound};
}

bool bound_holds(const BasePoint& base, const HermitianOperator& x, const RelativeBound& bound,
                 std::uint64_t seed, int samples) {
  check_dims(base, x);
  const Matrix& h = base.hamiltonian().matrix();
  const double tol = 1e-9 * std::max(1.0, base.hamiltonian().max_eigenvalue());
  if (bound.kind == BoundKind::form_bound) {
    Matrix upper = bound.a * h - x.matrix();
    upper.diagonal().array() += bound.b;
    Matrix lower = bound.a * h + x.matrix();
    lower.diagonal().array() += bound.b;
    return eigenvalues(upper)(0) >= -tol && eigenvalues(lower)(0) >= -tol;
  }
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) {
    const Vector psi = random_unit_vector(x.dim(), rng);
    const double lhs = (x.matrix() * psi).norm();
    const double rhs = bound.a * (h * psi).norm() + bound.b;
    if (lhs > rhs + tol) return false;
  }
  return true;
}

bool is_small(const BasePoint& base, const HermitianOperator& x, NormKind kind) {
  return norm(base, x, kind) < base.hood_radius();
}

ClassNorm class_norm(const BasePoint& base, const HermitianOperator& x, NormKind kind) {
  if (kind.type == NormKind::Type::eps) (void)norm_eps(base, x, kind.eps);  // range check
  const auto [left, right] = weights_for(kind);
  const Weighted w = weighted(base, x, left, right);
  auto f = [&](double alpha) {
    Matrix m = w.m;
    m.diagonal() += alpha * w.identity_diagonal;
    return norm_of(m, w.symmetric);
  };
  const double at_zero = norm_of(w.m, w.symmetric);
  if (at_zero == 0.0) return {0.0, 0.0};
  // Golden-section search; the norm is convex in alpha.
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -2.0 * at_zero, hi = 2.0 * at_zero;
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > 1e-13 * at_zero) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  ClassNorm out{0.5 * (lo + hi), 0.0};
  out.value = f(out.alpha);
  if (at_zero <= out.value) return {0.0, at_zero};
  return out;
}

HermitianOperator small_representative(const BasePoint& base, const HermitianOperator& x,
                                       NormKind kind) {
  const double direct = norm(base, x, kind);
  if (direct < base.hood_radius()) return x;
  const ClassNorm cn = class_norm(base, x, kind);
  if (!(cn.value < base.hood_radius())) {
    std::ostringstream os;
    os.precision(17);
    os << "perturbation is not small: min over identity shifts of ||X + alpha I||_" << kind.name()
       << " = " << cn.value << " >= 1 - beta0 = " << base.hood_radius();
    throw SmallnessError(os.str(), cn.value, base.hood_radius());
  }
  return x.shifted(cn.alpha);
}

}  // namespace qig
