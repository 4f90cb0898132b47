#pragma once

// Perturbation norms at a base Hamiltonian H >= I with resolvent R = H^{-1}:
//
//   omega norm   ||X R||
//   zero norm    ||R^{1/2} X R^{1/2}||
//   eps norm     ||R^{1/2+eps} X R^{1/2-eps}||,  0 <= eps <= 1/2
//
// The eps norm interpolates between the form norm (eps = 0) and the operator
// norm (eps = 1/2) and is nondecreasing in eps.

#include "qig/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qig {

using BaseId = std::uint64_t;

/// Base Hamiltonian H >= I with cached resolvent and Gibbs state
/// rho = exp(-H)/Z, and the declared trace-class exponent beta0 in (0,1).
class BasePoint {
 public:
  /// Throws PreconditionError if min eig(H) < 1 - 1e-12 or beta0 is not in (0,1).
  BasePoint(HermitianOperator hamiltonian, double beta0);

  Index dim() const { return h_.dim(); }
  const HermitianOperator& hamiltonian() const { return h_; }
  const HermitianOperator& resolvent() const { return r_; }
  /// exp(-H)/Tr exp(-H)
  const HermitianOperator& state() const { return rho_; }
  double log_partition() const { return log_z_; }
  double beta0() const { return beta0_; }
  /// 1 - beta0
  double hood_radius() const { return 1.0 - beta0_; }
  /// Content hash of (H, beta0); equal inputs give equal ids.
  BaseId id() const { return id_; }

 private:
  HermitianOperator h_;
  HermitianOperator r_;
  HermitianOperator rho_;
  double log_z_;
  double beta0_;
  BaseId id_;
};

struct NormKind {
  enum class Type { omega, zero, eps };
  Type type = Type::zero;
  double eps = 0.0;

  static NormKind omega() { return {Type::omega, 0.5}; }
  static NormKind zero() { return {Type::zero, 0.0}; }
  static NormKind epsilon(double e) { return {Type::eps, e}; }

  /// "omega", "zero" or "eps:<value>"
  std::string name() const;
  /// Inverse of name(); throws PreconditionError on unknown input.
  static NormKind parse(const std::string& text);
};

double norm_omega(const BasePoint& base, const HermitianOperator& x);
double norm_zero(const BasePoint& base, const HermitianOperator& x);
/// Throws PreconditionError unless 0 <= eps <= 1/2.
double norm_eps(const BasePoint& base, const HermitianOperator& x, double eps);
double norm(const BasePoint& base, const HermitianOperator& x, NormKind kind);

/// `points` equally spaced values covering [0, 1/2]; points >= 2.
std::vector<double> eps_grid(int points = 21);

struct PerturbationNorms {
  double omega = 0.0;
  double zero = 0.0;
  std::vector<std::pair<double, double>> eps_grid;
};

PerturbationNorms perturbation_norms(const BasePoint& base, const HermitianOperator& x,
                                     int grid_points = 21);

enum class BoundKind { operator_bound, form_bound };

/// Constants in |X(psi,psi)| <= a q_H(psi,psi) + b |psi|^2 (form) or
/// |X psi| <= a |H psi| + b |psi| (operator).
struct RelativeBound {
  double a = 0.0;
  double b = 0.0;
  BoundKind kind = BoundKind::form_bound;
};

/// Smallest a with -aH - bI <= X <= aH + bI, clipped at 0.
double form_bound_at(const BasePoint& base, const HermitianOperator& x, double b);

/// Scans `b_grid` (nonempty, nonnegative, ascending) and returns the smallest
/// b attaining the least a on the grid, refined by bisection inside the grid
/// interval where that least a is first reached. a(b) is nonincreasing.
RelativeBound relative_bound_form(const BasePoint& base, const HermitianOperator& x,
                                  std::span<const double> b_grid);

/// {0, 0.25, 0.5, 0.75, 1}
std::span<const double> default_b_grid();

/// (||X R||, 0, operator): the b = 0 operator bound.
RelativeBound relative_bound_operator(const BasePoint& base, const HermitianOperator& x);

/// Checks the bound numerically: as a matrix inequality for form bounds, on
/// `samples` random unit vectors for operator bounds. Tolerance 1e-9 scaled
/// by max(1, |H|).
bool bound_holds(const BasePoint& base, const HermitianOperator& x, const RelativeBound& bound,
                 std::uint64_t seed = 0, int samples = 1000);

/// True iff the selected norm is strictly below 1 - beta0.
bool is_small(const BasePoint& base, const HermitianOperator& x, NormKind kind);

/// The norm of the class {X + alpha I}: its minimum over alpha, and the
/// minimizing shift. The norm is convex in alpha and, because |I| = |R| = 1
/// at a base with min eigenvalue 1, the minimizer satisfies |alpha| <= 2|X|.
struct ClassNorm {
  double alpha = 0.0;
  double value = 0.0;
};
ClassNorm class_norm(const BasePoint& base, const HermitianOperator& x, NormKind kind);

/// A representative of X's class that is strictly inside the hood: X itself
/// when it is small, otherwise X + alpha* I at the class-norm minimizer.
/// Throws SmallnessError when no representative is small.
HermitianOperator small_representative(const BasePoint& base, const HermitianOperator& x,
                                       NormKind kind);

}  // namespace qig
