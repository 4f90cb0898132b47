#include "qig/geometry.hpp"

#include "qig/error.hpp"

#include <cmath>
#include <sstream>

namespace qig {

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    std::ostringstream os;
    os << "mixture weight must lie in [0,1], got " << lambda;
    throw PreconditionError(os.str());
  }
}

void require_small(const BasePoint& base, const HermitianOperator& x, NormKind kind, const char* what) {
  const double n = norm(base, x, kind);
  if (!(n < base.hood_radius())) {
    std::ostringstream os;
    os.precision(17);
    os << what << " is not small: norm " << n << " >= " << base.hood_radius();
    throw SmallnessError(os.str(), n, base.hood_radius());
  }
}

}  // namespace

GibbsState exp_mixture(const BasePoint& base, const HermitianOperator& x,
                       const HermitianOperator& y, double lambda, NormKind kind) {
  check_lambda(lambda);
  require_small(base, x, kind, "X");
  require_small(base, y, kind, "Y");
  const HermitianOperator mixed(Matrix(lambda * x.matrix() + (1.0 - lambda) * y.matrix()));
  require_small(base, mixed, kind, "mixture");
  return gibbs_state(base, mixed);
}

HermitianOperator mix_mixture(const GibbsState& sx, const GibbsState& sy, double lambda) {
  check_lambda(lambda);
  if (sx.dim() != sy.dim()) throw DimensionError("state dimensions differ");
  return HermitianOperator(Matrix(lambda * sx.rho.matrix() + (1.0 - lambda) * sy.rho.matrix()));
}

double trace_distance(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionError("operator dimensions differ");
  return 0.5 * trace_norm(a.matrix() - b.matrix());
}

TangentVector parallel_transport(const TangentVector& v, const BasePoint& from, const BasePoint& to,
                                 std::span<const BasePoint* const> path) {
  if (v.base_id() != from.id()) throw ProvenanceError("tangent vector is not based at `from`");
  if (from.dim() != to.dim()) throw DimensionError("endpoints have different dimensions");
  if (path.empty() || path.front() == nullptr || path.back() == nullptr ||
      path.front()->id() != from.id() || path.back()->id() != to.id()) {
    throw PreconditionError("path endpoints do not match the transport endpoints");
  }
  // Any representative of the line {Z + alpha I} works; the score is one.
  return {center(to, v.score.xhat)};
}

MembershipProbe mixture_membership_probe(const BasePoint& base, const GibbsState& sx,
                                         const GibbsState& sy, double lambda, NormKind kind) {
  const HermitianOperator sigma = mix_mixture(sx, sy, lambda);
  if (sigma.dim() != base.dim()) throw DimensionError("state dimension does not match base");
  MembershipProbe out;
  out.radius = base.hood_radius();
  out.min_eigenvalue = sigma.min_eigenvalue();
  if (!(out.min_eigenvalue >= 1e-300)) {
    out.singular = true;
    return out;
  }
  const Vector k = -sigma.eigenvalues().array().log();
  // -log is decreasing, so the smallest entry of k is the last.
  const Vector normalized = k.array() - k.minCoeff() + 1.0;
  const HermitianOperator kop = HermitianOperator::from_spectrum(normalized, sigma.eigenvectors());
  const HermitianOperator p(Matrix(kop.matrix() - base.hamiltonian().matrix()));
  out.norm_normalized = norm(base, p, kind);

  const ClassNorm cn = class_norm(base, p, kind);
  out.best_shift = cn.alpha;
  out.norm_min_shift = cn.value;
  out.in_hood = out.norm_min_shift < out.radius;
  return out;
}

}  // namespace qig
