#pragma once

// Base Hamiltonians and perturbation families at chosen truncation sizes.
//
//   oscillator   diag(1, 1+s, 1+2s, ...); block-nested across dims
//   laplacian1d  tridiag(-1, 2, -1) + V * (2x - 1)^2 on x_k = k/(n+1),
//                shifted to min eigenvalue 1; refines the grid, NOT nested
//   random_spd   log-uniform eigenvalues in [1, lambda_max], Haar basis

#include "qig/gibbs.hpp"
#include "qig/perturbation.hpp"

#include <cstdint>
#include <string>

namespace qig {

enum class Family { oscillator, laplacian1d, random_spd };

enum class PerturbationKind { bounded, diagonal, offdiagonal, potential, random_symmetric };

struct ModelSpec {
  Family family = Family::oscillator;
  Index dim = 8;
  double spacing = 1.0;              // oscillator
  double potential_amplitude = 0.0;  // laplacian1d
  double lambda_max = 100.0;         // random_spd
  std::uint64_t seed = 0;
  /// Declared trace-class exponent of the infinite model.
  double beta0 = 0.5;
};

std::string to_string(Family f);
std::string to_string(PerturbationKind k);
/// Throw PreconditionError on unknown names.
Family parse_family(const std::string& name);
PerturbationKind parse_perturbation_kind(const std::string& name);

/// Throws PreconditionError on an invalid spec.
void validate(const ModelSpec& spec);

/// The truncated base Hamiltonian, min eigenvalue shifted to 1.
HermitianOperator base_hamiltonian(const ModelSpec& spec);
BasePoint make_base(const ModelSpec& spec);

/// Unscaled perturbation direction of the given kind at spec.dim.
///
///   bounded           GOE matrix G
///   diagonal          diag(h_n u_n), u_n uniform in [-1, 1]
///   offdiagonal       X_{n,n+1} = sqrt(h_n h_{n+1}) in H's eigenbasis
///   potential         diag(cos(2 pi x_k)), x_k = k/(n+1)
///   random_symmetric  H^{1/2} G H^{1/2}
///
/// For the oscillator every kind except `potential` is block-nested: the
/// dim-N direction is the leading block of the dim-(N+k) one.
Matrix perturbation_direction(const ModelSpec& spec, PerturbationKind kind);

/// The direction scaled so that norm(base, X, norm_kind) == scale. Throws
/// PreconditionError if the direction is zero or scale is not finite.
HermitianOperator make_perturbation(const BasePoint& base, const ModelSpec& spec,
                                    PerturbationKind kind, double scale,
                                    NormKind norm_kind = NormKind::zero());
HermitianOperator make_perturbation(const ModelSpec& spec, PerturbationKind kind, double scale,
                                    NormKind norm_kind = NormKind::zero());

/// Spectra of H^(N) + factor * direction^(N) for the model with dim = N.
/// Tridiagonal truncations are diagonalized in O(N^2).
SpectrumFamily truncation_family(const ModelSpec& spec, PerturbationKind kind, double factor);

}  // namespace qig
