#pragma once

// The exponential (+1) affine structure: mixtures are linear in the
// Hamiltonian perturbation, and parallel transport re-centers the same
// un-centered representative at the new base. Transport therefore does not
// look at the path at all; the flatness of the connection is exactly that.

#include "qig/gibbs.hpp"
#include "qig/manifold.hpp"

#include <span>

namespace qig {

struct TangentVector {
  Score score;
  BaseId base_id() const { return score.base_id; }
};

/// rho_{lambda X + (1-lambda) Y}. X, Y and the mixture must all be small.
GibbsState exp_mixture(const BasePoint& base, const HermitianOperator& x,
                       const HermitianOperator& y, double lambda,
                       NormKind kind = NormKind::zero());

/// lambda rho_X + (1-lambda) rho_Y, the ordinary (-1) convex combination.
HermitianOperator mix_mixture(const GibbsState& sx, const GibbsState& sy, double lambda);

/// (1/2) |A - B|_1
double trace_distance(const HermitianOperator& a, const HermitianOperator& b);

/// Moves Z - (rho_from . Z) I to Z - (rho_to . Z) I. `path` must start at
/// `from` and end at `to`; its interior is not used.
TangentVector parallel_transport(const TangentVector& v, const BasePoint& from, const BasePoint& to,
                                 std::span<const BasePoint* const> path);

struct MembershipProbe {
  bool singular = false;
  double min_eigenvalue = 0.0;
  /// Norm at the base of K - H0 with K = -log sigma shifted to min eig 1.
  double norm_normalized = 0.0;
  /// Minimum of the norm over identity shifts K - H0 + alpha I.
  double norm_min_shift = 0.0;
  double best_shift = 0.0;
  double radius = 0.0;
  bool in_hood = false;
};

/// Diagnostic only: does the (-1) mixture of two hood states happen to be in
/// the hood of `base` at this truncation? A numerically singular mixture
/// (min eigenvalue < 1e-300) is reported, not thrown.
MembershipProbe mixture_membership_probe(const BasePoint& base, const GibbsState& sx,
                                         const GibbsState& sy, double lambda,
                                         NormKind kind = NormKind::zero());

}  // namespace qig
