#pragma once

// Charts, hoods and atlas extension. A hood around a base H0 is the set of
// states rho_X with ||X|| < 1 - beta0; the chart sends rho_X to the centered
// score X - (rho0 . X) I, which does not depend on the representative of
// X ~ X + alpha I.

#include "qig/gibbs.hpp"
#include "qig/perturbation.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace qig {

/// Centered chart coordinate: regularized mean of `xhat` at its base is zero.
struct Score {
  HermitianOperator xhat;
  BaseId base_id;
};

/// X - (rho0 . X) I with the regularized mean taken at lambda = 1/2.
Score center(const BasePoint& base, const HermitianOperator& x);

/// True iff X - Y is within `tol` (operator norm) of a multiple of I.
bool equivalent_mod_identity(const HermitianOperator& x, const HermitianOperator& y,
                             double tol = 1e-10);

/// Recovers X + alpha I from H_eff - H0 and centers it. Throws
/// ProvenanceError if the state was built over a different base.
Score chart(const BasePoint& base, const GibbsState& state);

/// gibbs_state(base, s.xhat); throws SmallnessError unless the class of
/// s.xhat has a representative with norm(base, ., kind) < 1 - beta0.
GibbsState inverse_chart(const BasePoint& base, const Score& s, NormKind kind = NormKind::zero());

/// The norm of Y with every Hamiltonian replaced by the one of `base_x`.
double norm_at(const BasePoint& base_x, const HermitianOperator& y, NormKind kind);

/// The base point of a perturbed state: H_eff (>= I) with beta0 = beta_X.
BasePoint rebase(const GibbsState& state);

struct EquivalenceConstants {
  double c_low = 0.0;
  double c_high = 0.0;
  int samples = 0;
};

/// Empirical min and max of norm_at(base_x, Y)/norm_at(base0, Y) over random
/// symmetric Y drawn from `seed`. With `include_identity` the ensemble starts
/// with Y = I, whose ratio is 1 for any two bases with min eigenvalue 1.
EquivalenceConstants equivalence_constants(const BasePoint& base0, const BasePoint& base_x,
                                           NormKind kind, int ensemble_size, std::uint64_t seed,
                                           bool include_identity = true);

struct AtlasStep {
  HermitianOperator perturbation;
  double norm;   // at the base it was applied to
  double a;      // form relative bound there
  double beta;   // trace-class exponent after the step
};

/// The root base point and the chain of small extension steps that reach the
/// current base. Immutable; extend() returns a new atlas.
class Atlas {
 public:
  explicit Atlas(BasePoint root, NormKind kind = NormKind::zero());

  const BasePoint& root() const { return root_; }
  const BasePoint& current() const { return current_; }
  const std::vector<AtlasStep>& steps() const { return steps_; }
  NormKind norm_kind() const { return kind_; }
  double beta() const { return current_.beta0(); }

 private:
  friend Atlas extend(const Atlas& atlas, const HermitianOperator& y,
                      std::span<const double> b_grid);
  BasePoint root_;
  BasePoint current_;
  std::vector<AtlasStep> steps_;
  NormKind kind_;
};

/// Adds one step: requires ||Y|| at the current base < 1 - beta_current
/// (SmallnessError reports both numbers). The new current base is the
/// normalized H_{X+Y} and beta becomes beta / (1 - a_Y).
Atlas extend(const Atlas& atlas, const HermitianOperator& y,
             std::span<const double> b_grid = default_b_grid());

nlohmann::json atlas_to_json(const Atlas& atlas);
/// Rebuilds the atlas by replaying its steps; throws PreconditionError if the
/// recorded betas do not reproduce.
Atlas atlas_from_json(const nlohmann::json& doc);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc);

}  // namespace qig
