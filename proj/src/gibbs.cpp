#include "qig/gibbs.hpp"

#include "qig/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qig {

GibbsState gibbs_state(const BasePoint& base, const HermitianOperator& x,
                       std::span<const double> b_grid) {
  // rho_X only depends on the class of X modulo identity shifts, so the
  // smallness hypothesis is checked on the best representative.
  const HermitianOperator small = small_representative(base, x, NormKind::zero());
  const RelativeBound bound = relative_bound_form(base, small, b_grid);

  // Removing the trace part first makes X and X + alpha I diagonalize the
  // same matrix up to rounding in the subtraction.
  const Index n = x.dim();
  const double mean = x.trace() / static_cast<double>(n);
  Matrix k = base.hamiltonian().matrix() + x.matrix();
  k.diagonal().array() -= mean;
  const SpectralDecomposition s = spectral(0.5 * (k + k.transpose()));

  const double lmin = s.eigenvalues(0);
  const Vector gap = s.eigenvalues.array() - lmin;
  const Vector w = (-gap.array()).exp();
  const double total = w.sum();

  GibbsState out{
      HermitianOperator::from_spectrum(w / total, s.eigenvectors),
      -lmin + std::log(total) - mean,
      HermitianOperator::from_spectrum(gap.array() + 1.0, s.eigenvectors),
      1.0 - lmin - mean,
      base.beta0() / (1.0 - bound.a),
      bound,
      base.id(),
      x,
  };
  return out;
}

bool semibound_check(const BasePoint& base, const HermitianOperator& x, const RelativeBound& bound) {
  if (base.dim() != x.dim()) throw DimensionError("perturbation dimension does not match base");
  const Matrix k = base.hamiltonian().matrix() + x.matrix();
  return eigenvalues(k)(0) >= -bound.b - 1e-9;
}

double regularized_mean(const HermitianOperator& rho, const HermitianOperator& x, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    std::ostringstream os;
    os << "lambda must lie in (0,1), got " << lambda;
    throw PreconditionError(os.str());
  }
  if (rho.dim() != x.dim()) throw DimensionError("state and perturbation dimensions differ");
  const Matrix left = function_matrix(rho.spectral(), MatrixFunction::power(lambda));
  const Matrix right = function_matrix(rho.spectral(), MatrixFunction::power(1.0 - lambda));
  // Tr(A X B) = sum_ij (A X)_ij B_ji
  return (left * x.matrix()).cwiseProduct(right.transpose()).sum();
}

SpectrumFamily spectrum_of(std::function<Matrix(Index)> matrices) {
  return [gen = std::move(matrices)](Index n) { return eigenvalues(gen(n)); };
}

TraceTailReport trace_tail(const SpectrumFamily& family, double beta, std::span<const Index> dims,
                           double tail_tol) {
  if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
  if (dims.empty()) throw PreconditionError("trace_tail needs at least one truncation dimension");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1 || (i > 0 && dims[i] <= dims[i - 1])) {
      throw PreconditionError("truncation dimensions must be positive and strictly ascending");
    }
  }
  TraceTailReport report;
  report.beta = beta;
  std::vector<double> increments;
  double previous = 0.0;
  for (Index n : dims) {
    const Vector spectrum = family(n);
    if (spectrum.size() != n) throw DimensionError("spectrum family returned the wrong size");
    const double total = (-beta * spectrum.array()).exp().sum();
    report.dims.push_back(n);
    report.partial_traces.push_back(total);
    increments.push_back(total - previous);
    previous = total;
  }
  const std::size_t m = increments.size();
  const std::size_t checked = std::min<std::size_t>(2, m);
  report.converged = true;
  for (std::size_t i = m - checked; i < m; ++i) {
    if (!(std::abs(increments[i]) < tail_tol)) report.converged = false;
  }
  report.tail_estimate = increments.back();
  return report;
}

std::pair<bool, double> cp_membership(const HermitianOperator& rho, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << "p must lie in (0,1), got " << p;
    throw PreconditionError(os.str());
  }
  double total = 0.0;
  for (Index i = 0; i < rho.dim(); ++i) {
    const double lambda = rho.eigenvalues()(i);
    if (lambda > 0.0) total += std::pow(lambda, p);
  }
  return {std::isfinite(total), total};
}

}  // namespace qig
