#pragma once

#include "qig/linalg.hpp"
#include "qig/perturbation.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace qig {

/// Perturbed Gibbs state rho_X = exp(-(H0 + X)) / Z_X.
struct GibbsState {
  HermitianOperator rho;
  /// log Tr exp(-(H0 + X)), the free energy of the unshifted generator.
  double log_z;
  /// H0 + X + offset * I, shifted so its smallest eigenvalue is 1.
  HermitianOperator h_eff;
  double offset;
  /// beta0 / (1 - a) with a the form relative bound of X.
  double beta_class;
  RelativeBound bound;
  /// Provenance: the base the state was built over and the perturbation used.
  BaseId base_id;
  HermitianOperator perturbation;

  Index dim() const { return rho.dim(); }
};

/// Requires some representative X + alpha I with norm_zero < 1 - beta0 (X
/// itself is tried first); throws SmallnessError otherwise. The relative
/// bound behind beta_class is computed for that representative.
GibbsState gibbs_state(const BasePoint& base, const HermitianOperator& x,
                       std::span<const double> b_grid = default_b_grid());

/// min eig(H0 + X) >= -b - 1e-9
bool semibound_check(const BasePoint& base, const HermitianOperator& x, const RelativeBound& bound);

/// Tr(rho^lambda X rho^(1-lambda)) for 0 < lambda < 1, computed from the
/// eigendecomposition of rho.
double regularized_mean(const HermitianOperator& rho, const HermitianOperator& x, double lambda);
inline double regularized_mean(const GibbsState& state, const HermitianOperator& x, double lambda) {
  return regularized_mean(state.rho, x, lambda);
}

/// Spectrum of the dim-N truncation of some fixed model.
using SpectrumFamily = std::function<Vector(Index)>;

/// Adapts a generator of truncated matrices into a SpectrumFamily.
SpectrumFamily spectrum_of(std::function<Matrix(Index)> matrices);

struct TraceTailReport {
  double beta = 0.0;
  std::vector<Index> dims;
  /// Tr_N exp(-beta H^(N)) for every N in dims.
  std::vector<double> partial_traces;
  bool converged = false;
  /// The last increment of the partial traces.
  double tail_estimate = 0.0;
};

/// Partial traces of exp(-beta H^(N)) over ascending `dims`. Converged iff the
/// last two increments (the first partial trace counts as an increment from 0)
/// are below `tail_tol`.
TraceTailReport trace_tail(const SpectrumFamily& family, double beta, std::span<const Index> dims,
                           double tail_tol);

/// (true, sum_i lambda_i^p): a finite truncation is always in C_p; the sum is
/// the quantity whose growth across truncations is diagnostic. 0 < p < 1.
std::pair<bool, double> cp_membership(const HermitianOperator& rho, double p);
inline std::pair<bool, double> cp_membership(const GibbsState& state, double p) {
  return cp_membership(state.rho, p);
}

}  // namespace qig
