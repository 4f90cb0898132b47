#include "qig/manifold.hpp"

#include "qig/error.hpp"
#include "qig/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qig {

namespace {

void require_same_base(const BasePoint& base, BaseId id, Index dim, const char* what) {
  if (dim != base.dim()) {
    std::ostringstream os;
    os << what << " has dimension " << dim << " but the base has dimension " << base.dim();
    throw DimensionError(os.str());
  }
  if (id != base.id()) {
    throw ProvenanceError(std::string(what) + " was not built over this base point");
  }
}

}  // namespace

Score center(const BasePoint& base, const HermitianOperator& x) {
  if (x.dim() != base.dim()) throw DimensionError("perturbation dimension does not match base");
  const double mean = regularized_mean(base.state(), x, 0.5);
  return {x.shifted(-mean), base.id()};
}

bool equivalent_mod_identity(const HermitianOperator& x, const HermitianOperator& y, double tol) {
  if (x.dim() != y.dim()) throw DimensionError("operator dimensions differ");
  Matrix d = x.matrix() - y.matrix();
  d.diagonal().array() -= d.trace() / static_cast<double>(d.rows());
  return operator_norm(d) <= tol;
}

Score chart(const BasePoint& base, const GibbsState& state) {
  require_same_base(base, state.base_id, state.dim(), "state");
  const HermitianOperator recovered(Matrix(state.h_eff.matrix() - base.hamiltonian().matrix()));
  return center(base, recovered);
}

GibbsState inverse_chart(const BasePoint& base, const Score& s, NormKind kind) {
  require_same_base(base, s.base_id, s.xhat.dim(), "score");
  (void)small_representative(base, s.xhat, kind);
  return gibbs_state(base, s.xhat);
}

double norm_at(const BasePoint& base_x, const HermitianOperator& y, NormKind kind) {
  return norm(base_x, y, kind);
}

BasePoint rebase(const GibbsState& state) { return BasePoint(state.h_eff, state.beta_class); }

EquivalenceConstants equivalence_constants(const BasePoint& base0, const BasePoint& base_x,
                                           NormKind kind, int ensemble_size, std::uint64_t seed,
                                           bool include_identity) {
  if (base0.dim() != base_x.dim()) throw DimensionError("base dimensions differ");
  if (ensemble_size < 1) throw PreconditionError("ensemble size must be at least 1");
  const Index n = base0.dim();
  Rng rng(seed);
  EquivalenceConstants out{std::numeric_limits<double>::infinity(), 0.0, 0};
  auto consider = [&](const HermitianOperator& y) {
    const double denom = norm(base0, y, kind);
    if (!(denom > 0.0)) return;
    const double ratio = norm(base_x, y, kind) / denom;
    out.c_low = std::min(out.c_low, ratio);
    out.c_high = std::max(out.c_high, ratio);
    ++out.samples;
  };
  if (include_identity) consider(HermitianOperator::identity(n));
  for (int i = 0; i < ensemble_size; ++i) consider(HermitianOperator(gaussian_symmetric(n, rng)));
  return out;
}

Atlas::Atlas(BasePoint root, NormKind kind) : root_(root), current_(std::move(root)), kind_(kind) {}

Atlas extend(const Atlas& atlas, const HermitianOperator& y, std::span<const double> b_grid) {
  const BasePoint& here = atlas.current();
  if (y.dim() != here.dim()) throw DimensionError("perturbation dimension does not match atlas");
  const double n = norm(here, y, atlas.norm_kind());
  const double radius = here.hood_radius();
  if (!(n < radius)) {
    std::ostringstream os;
    os.precision(17);
    os << "extension step is not small at the current base: ||Y||_" << atlas.norm_kind().name()
       << " = " << n << " >= 1 - beta = " << radius;
    throw SmallnessError(os.str(), n, radius);
  }
  const GibbsState state = gibbs_state(here, y, b_grid);
  Atlas next = atlas;
  next.current_ = rebase(state);
  next.steps_.push_back({y, n, state.bound.a, state.beta_class});
  return next;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& doc) {
  if (!doc.is_array() || doc.empty()) throw PreconditionError("matrix must be a nonempty array of rows");
  const auto rows = static_cast<Index>(doc.size());
  const auto cols = static_cast<Index>(doc.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = doc.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw PreconditionError("matrix rows must all have the same length");
    }
    for (Index j = 0; j < cols; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

nlohmann::json atlas_to_json(const Atlas& atlas) {
  nlohmann::json doc;
  doc["dim"] = atlas.root().dim();
  doc["norm_kind"] = atlas.norm_kind().name();
  const Vector& spectrum = atlas.root().hamiltonian().eigenvalues();
  doc["root"] = {
      {"hamiltonian", matrix_to_json(atlas.root().hamiltonian().matrix())},
      {"spectrum", std::vector<double>(spectrum.data(), spectrum.data() + spectrum.size())},
      {"beta0", atlas.root().beta0()},
  };
  nlohmann::json steps = nlohmann::json::array();
  for (const AtlasStep& step : atlas.steps()) {
    steps.push_back({{"perturbation", matrix_to_json(step.perturbation.matrix())},
                     {"norm", step.norm},
                     {"a", step.a},
                     {"beta", step.beta}});
  }
  doc["steps"] = std::move(steps);
  doc["beta"] = atlas.beta();
  return doc;
}

Atlas atlas_from_json(const nlohmann::json& doc) {
  try {
    const auto& root = doc.at("root");
    Atlas atlas(BasePoint(HermitianOperator(matrix_from_json(root.at("hamiltonian"))),
                          root.at("beta0").get<double>()),
                NormKind::parse(doc.at("norm_kind").get<std::string>()));
    for (const auto& step : doc.at("steps")) {
      atlas = extend(atlas, HermitianOperator(matrix_from_json(step.at("perturbation"))));
      const double recorded = step.at("beta").get<double>();
      if (std::abs(atlas.beta() - recorded) > 1e-10 * std::max(1.0, std::abs(recorded))) {
        std::ostringstream os;
        os.precision(17);
        os << "atlas replay diverged: beta " << atlas.beta() << " vs recorded " << recorded;
        throw PreconditionError(os.str());
      }
    }
    return atlas;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed atlas document: ") + e.what());
  }
}

}  // namespace qig
