// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Expected values come from tests/oracles.hpp or closed forms.

#include "helpers.hpp"
#include "oracles.hpp"

#include "qig/error.hpp"
#include "qig/geometry.hpp"
#include "qig/gibbs.hpp"
#include "qig/manifold.hpp"
#include "qig/models.hpp"
#include "qig/perturbation.hpp"
#include "qig/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace qig;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // <= 0: no runtime limit
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// Shared random ensemble for the monotonicity, relative-bound and semiboundedness checks.

struct EnsembleMember {
  Index dim;
  testing::Pair pair;
};

const std::vector<EnsembleMember>& ensemble() {
  static const std::vector<EnsembleMember> members = [] {
    std::vector<EnsembleMember> out;
    const Index dims[] = {8, 64, 256};
    for (Index d : dims) {
      Rng rng(split_seed(kSeed, static_cast<std::uint64_t>(d)));
      std::uniform_real_distribution<double> scale(0.05, 1.5);
      for (std::uint64_t i = 0; i < 100; ++i) {
        const double s = scale(rng);
        out.push_back({d, testing::random_pair(split_seed(kSeed, 1000 + d), i, d, s)});
      }
    }
    return out;
  }();
  return members;
}

// ---------------------------------------------------------------------------

Outcome worked_norms() {
  const BasePoint base(HermitianOperator::diagonal(testing::vec({1.0, 2.0})), 0.5);
  const HermitianOperator x(testing::mat2(0.0, 1.0, 1.0, 0.0));
  const double e_omega = std::abs(norm_omega(base, x) - 1.0);
  const double e_zero = std::abs(norm_zero(base, x) - std::pow(2.0, -0.5));
  const double e_eps = std::abs(norm_eps(base, x, 0.25) - std::pow(2.0, -0.25));
  const double worst = std::max({e_omega, e_zero, e_eps});
  return {worst <= 1e-12, "max |norm - closed form| = " + fmt("%.3e", worst)};
}

Outcome monotonicity() {
  const std::vector<double> grid = eps_grid(21);
  double worst = 0.0;
  int violations = 0;
  double oracle_err = 0.0;
  for (const auto& m : ensemble()) {
    double prev = -1.0;
    for (double e : grid) {
      const double n = norm_eps(m.pair.base, m.pair.x, e);
      if (prev >= 0.0) {
        const double drop = (prev - n) / std::max(prev, std::numeric_limits<double>::min());
        worst = std::max(worst, drop);
        if (drop > 1e-10) ++violations;
      }
      prev = n;
    }
    if (m.dim == 8) {
      for (double e : {0.0, 0.25, 0.5}) {
        const double ref = oracle::eps_norm(m.pair.base.hamiltonian().matrix(), m.pair.x.matrix(), e);
        oracle_err = std::max(oracle_err, std::abs(norm_eps(m.pair.base, m.pair.x, e) - ref) / ref);
      }
    }
  }
  return {violations == 0 && oracle_err <= 1e-10,
          std::to_string(ensemble().size()) + " pairs, largest relative drop " + fmt("%.3e", worst) + ", " +
              std::to_string(violations) + " violations, dim-8 oracle rel err " + fmt("%.2e", oracle_err)};
}

Outcome relative_bound() {
  double worst_excess = -std::numeric_limits<double>::infinity();
  double oracle_err = 0.0;
  int violations = 0;
  for (const auto& m : ensemble()) {
    const RelativeBound rb = relative_bound_form(m.pair.base, m.pair.x, default_b_grid());
    const double n0 = norm_zero(m.pair.base, m.pair.x);
    worst_excess = std::max(worst_excess, rb.a - n0);
    if (!(rb.a <= n0 + 1e-9)) ++violations;
    const double ref = oracle::form_bound(m.pair.base.hamiltonian().matrix(), m.pair.x.matrix(), rb.b);
    oracle_err = std::max(oracle_err, std::abs(rb.a - ref));
  }
  return {violations == 0 && oracle_err <= 1e-9,
          "max(a - |X|_0) = " + fmt("%.3e", worst_excess) + ", " + std::to_string(violations) +
              " violations, |a - oracle a(b)| <= " + fmt("%.2e", oracle_err)};
}

Outcome semibounded() {
  int small = 0, weak = 0, sharp = 0;
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& m : ensemble()) {
    if (!is_small(m.pair.base, m.pair.x, NormKind::zero())) continue;
    ++small;
    const RelativeBound rb = relative_bound_form(m.pair.base, m.pair.x, default_b_grid());
    const Matrix sum = m.pair.base.hamiltonian().matrix() + m.pair.x.matrix();
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(sum, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (!(lmin >= -rb.b - 1e-9)) ++weak;
    if (!(lmin >= (1.0 - rb.a) - rb.b - 1e-9)) ++sharp;
    slack = std::min(slack, lmin - ((1.0 - rb.a) - rb.b));
  }
  return {small > 0 && weak == 0 && sharp == 0,
          std::to_string(small) + " small instances, min eig >= -b failures " + std::to_string(weak) +
              ", min eig >= (1-a)-b failures " + std::to_string(sharp) + ", least slack " + fmt("%.3e", slack)};
}

Outcome trace_tail_oscillator() {
  ModelSpec spec;
  spec.family = Family::oscillator;
  spec.dim = 64;
  spec.beta0 = 0.5;
  const BasePoint base = make_base(spec);
  const HermitianOperator x = make_perturbation(base, spec, PerturbationKind::offdiagonal, 0.4);
  const RelativeBound rb = relative_bound_form(base, x, default_b_grid());
  if (!(rb.a < 1.0)) return {false, "a = " + fmt("%.6f", rb.a) + " is not below 1"};
  const double beta_x = base.beta0() / (1.0 - rb.a);
  const double direction = norm_zero(base, HermitianOperator(perturbation_direction(spec, PerturbationKind::offdiagonal)));
  const SpectrumFamily family = truncation_family(spec, PerturbationKind::offdiagonal, 0.4 / direction);
  const std::vector<Index> dims{25, 50, 100, 200, 400, 800, 1600, 3200, 5000};
  bool all = true;
  std::ostringstream detail;
  detail << "a = " << fmt("%.6f", rb.a) << ", beta_X = " << fmt("%.6f", beta_x) << ";";
  for (double f : {1.05, 1.2, 2.0}) {
    const TraceTailReport rep = trace_tail(family, f * beta_x, dims, 1e-12);
    Index first = -1;
    for (std::size_t j = 1; j < rep.dims.size(); ++j) {
      if (rep.partial_traces[j] - rep.partial_traces[j - 1] < 1e-12 && first < 0) first = rep.dims[j];
    }
    all = all && rep.converged;
    detail << " x" << f << ": " << (rep.converged ? "converged" : "not converged")
           << " (increments < 1e-12 from N = " << first << ")";
  }
  return {all, detail.str()};
}

Outcome lambda_independence() {
  const std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double worst = 0.0, oracle_err = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Index dim = 4 + static_cast<Index>(i % 5) * 6;
    const testing::Pair p = testing::random_pair(split_seed(kSeed, 6), i, dim, 0.4);
    ModelSpec other = p.spec;
    other.seed = split_seed(p.spec.seed, 1);
    const HermitianOperator x = make_perturbation(p.base, other, PerturbationKind::random_symmetric, 2.0);
    const GibbsState state = gibbs_state(p.base, p.x);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double l : lambdas) {
      const double m = regularized_mean(state, x, l);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    const double mid = regularized_mean(state, x, 0.5);
    const double ref = oracle::eigenbasis_mean(state.rho.matrix(), x.matrix());
    Eigen::SelfAdjointEigenSolver<Matrix> xs(x.matrix());
    const Matrix abs_x = xs.eigenvectors() * xs.eigenvalues().cwiseAbs().asDiagonal() * xs.eigenvectors().transpose();
    const double denom = std::max(std::abs(ref), (state.rho.matrix() * abs_x).trace());
    worst = std::max(worst, (hi - lo) / denom);
    oracle_err = std::max(oracle_err, std::abs(mid - ref) / denom);
  }
  return {worst <= 1e-9 && oracle_err <= 1e-9,
          "100 pairs, max relative spread " + fmt("%.3e", worst) + ", max rel err vs oracle mean " +
              fmt("%.2e", oracle_err)};
}

Outcome shift_and_chart() {
  double shift = 0.0, klass = 0.0, roundtrip = 0.0, oracle_err = 0.0;
  Rng rng(split_seed(kSeed, 7));
  std::uniform_real_distribution<double> alpha(-10.0, 10.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Index dim = 3 + static_cast<Index>(i % 4) * 5;
    const testing::Pair p = testing::random_pair(split_seed(kSeed, 70), i, dim, 0.45);
    const double a = alpha(rng);
    const GibbsState s = gibbs_state(p.base, p.x);
    const GibbsState t = gibbs_state(p.base, p.x.shifted(a));
    shift = std::max(shift, max_abs(s.rho.matrix() - t.rho.matrix()));
    klass = std::max(klass, max_abs(chart(p.base, s).xhat.matrix() - chart(p.base, t).xhat.matrix()));
    const Matrix ref = oracle::gibbs(p.base.hamiltonian().matrix() + p.x.matrix());
    oracle_err = std::max(oracle_err, max_abs(s.rho.matrix() - ref));
    // Hood sample: a centered score, pushed through the inverse chart and back.
    const Score sc = center(p.base, p.x);
    const Score back = chart(p.base, inverse_chart(p.base, sc));
    roundtrip = std::max(roundtrip, max_abs(back.xhat.matrix() - sc.xhat.matrix()));
  }
  return {shift <= 1e-12 && klass <= 1e-9 && roundtrip <= 1e-9 && oracle_err <= 1e-10,
          "|rho_X - rho_{X+aI}| = " + fmt("%.2e", shift) + ", chart spread over class " + fmt("%.2e", klass) +
              ", chart(inverse_chart) err " + fmt("%.2e", roundtrip) + " (100 samples), rho vs oracle " +
              fmt("%.2e", oracle_err)};
}

Outcome equivalence() {
  const double eps = 0.25;
  int failures = 0, checks = 0, bounded = 0;
  double min_shrink = std::numeric_limits<double>::infinity();
  std::ostringstream worst;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const testing::Pair p = testing::random_pair(split_seed(kSeed, 8), i, 12, 0.35);
    const std::uint64_t ratio_seed = split_seed(p.spec.seed, 200);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k <= 4; ++k) {
      const HermitianOperator xk = p.x * std::ldexp(1.0, -k);
      const BasePoint bx = rebase(gibbs_state(p.base, xk));
      const EquivalenceConstants ec = equivalence_constants(p.base, bx, NormKind::epsilon(eps), 200, ratio_seed);
      if (ec.c_low > 0.0 && std::isfinite(ec.c_high)) ++bounded;
      const double width = ec.c_high - ec.c_low;
      if (k > 0) {
        ++checks;
        const double shrink = prev / width;
        if (shrink < min_shrink) {
          min_shrink = shrink;
          worst.str("");
          worst << "X" << i << " halving " << k;
        }
        if (!(width == 0.0 || prev >= 2.0 * width)) ++failures;
      }
      prev = width;
    }
  }
  return {bounded == 50 && failures == 0,
          std::to_string(bounded) + "/50 intervals positive and bounded, " + std::to_string(failures) + "/" +
              std::to_string(checks) + " halvings shrink < 2x, smallest shrink " + fmt("%.4f", min_shrink) + " at " +
              worst.str()};
}

Outcome transport() {
  int identical_fail = 0;
  double roundtrip = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const testing::Pair p = testing::random_pair(split_seed(kSeed, 9), i, 6 + static_cast<Index>(i), 0.4);
    const BasePoint to = rebase(gibbs_state(p.base, p.x));
    ModelSpec other = p.spec;
    other.seed = split_seed(p.spec.seed, 1);
    const TangentVector v{center(p.base, make_perturbation(p.base, other, PerturbationKind::bounded, 0.4))};
    Rng rng(split_seed(p.spec.seed, 2));
    std::uniform_real_distribution<double> t(0.0, 1.0);
    Matrix first;
    for (int k = 0; k < 5; ++k) {
      std::vector<BasePoint> interior;
      for (int j = 0; j <= k % 4; ++j) interior.push_back(rebase(gibbs_state(p.base, p.x * t(rng))));
      std::vector<const BasePoint*> path{&p.base};
      for (const BasePoint& b : interior) path.push_back(&b);
      path.push_back(&to);
      const TangentVector moved = parallel_transport(v, p.base, to, path);
      const std::vector<const BasePoint*> back{&to, &p.base};
      const TangentVector home = parallel_transport(moved, to, p.base, back);
      if (k == 0) first = moved.score.xhat.matrix();
      if (!(moved.score.xhat.matrix().array() == first.array()).all()) ++identical_fail;
      roundtrip = std::max(roundtrip, max_abs(home.score.xhat.matrix() - v.score.xhat.matrix()));
    }
  }
  return {identical_fail == 0 && roundtrip <= 1e-12,
          "10 instances x 5 paths, " + std::to_string(identical_fail) + " paths not bitwise equal, round trip err " +
              fmt("%.2e", roundtrip)};
}

double oracle_trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Outcome mixtures() {
  double endpoint = 0.0, linear = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const testing::Pair p = testing::random_pair(split_seed(kSeed, 10), i, 5 + static_cast<Index>(i % 6), 0.3);
    ModelSpec other = p.spec;
    other.seed = split_seed(p.spec.seed, 1);
    const HermitianOperator y = make_perturbation(p.base, other, PerturbationKind::bounded, 0.3);
    const GibbsState sx = gibbs_state(p.base, p.x);
    const GibbsState sy = gibbs_state(p.base, y);
    const Matrix hx = center(p.base, p.x).xhat.matrix();
    const Matrix hy = center(p.base, y).xhat.matrix();
    for (double l : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const GibbsState s = exp_mixture(p.base, p.x, y, l);
      if (l == 1.0) endpoint = std::max(endpoint, max_abs(s.rho.matrix() - sx.rho.matrix()));
      if (l == 0.0) endpoint = std::max(endpoint, max_abs(s.rho.matrix() - sy.rho.matrix()));
      linear = std::max(linear, max_abs(chart(p.base, s).xhat.matrix() - (l * hx + (1.0 - l) * hy)));
    }
  }
  const Matrix h = testing::mat2(1.0, 0.0, 0.0, 2.0);
  const Matrix wx = testing::mat2(0.0, 0.3, 0.3, 0.0);
  const Matrix wy = testing::mat2(0.3, 0.0, 0.0, -0.3);
  const BasePoint base(HermitianOperator(h), 0.5);
  const HermitianOperator x(wx), y(wy);
  const double td = trace_distance(exp_mixture(base, x, y, 0.5).rho,
                                   mix_mixture(gibbs_state(base, x), gibbs_state(base, y), 0.5));
  const double td_ref =
      oracle_trace_distance(oracle::gibbs(h + 0.5 * (wx + wy)), 0.5 * (oracle::gibbs(h + wx) + oracle::gibbs(h + wy)));
  return {endpoint <= 1e-9 && linear <= 1e-9 && td > 1e-6 && std::abs(td - td_ref) <= 1e-12,
          "endpoint err " + fmt("%.2e", endpoint) + ", linearity err " + fmt("%.2e", linear) +
              ", witness trace distance " + fmt("%.6e", td) + " (oracle " + fmt("%.6e", td_ref) + ")"};
}

bool rejected(const Atlas& a, const HermitianOperator& y) {
  try {
    (void)extend(a, y);
  } catch (const SmallnessError&) {
    return true;
  }
  return false;
}

Outcome atlas() {
  int admissible = 0, boundary_fail = 0, beyond_fail = 0;
  double distance = 0.0;
  for (std::uint64_t i = 0; i < 30; ++i) {
    const testing::Pair p = testing::random_pair(split_seed(kSeed, 11), i, 4 + static_cast<Index>(i % 5) * 3, 0.3);
    ModelSpec other = p.spec;
    other.seed = split_seed(p.spec.seed, 1);
    const HermitianOperator y = make_perturbation(p.base, other, PerturbationKind::bounded, 0.3);
    const Atlas root(p.base);
    const Atlas after_x = extend(root, p.x);
    const bool ok = norm(after_x.current(), y, root.norm_kind()) < after_x.current().hood_radius() &&
                    norm(p.base, p.x + y, root.norm_kind()) < p.base.hood_radius();
    if (ok) {
      ++admissible;
      const Atlas two = extend(after_x, y);
      const Atlas one = extend(root, p.x + y);
      distance = std::max(distance, trace_distance(two.current().state(), one.current().state()));
    }
    const double radius = p.base.hood_radius();
    const HermitianOperator edge = y * (radius / norm(p.base, y, root.norm_kind()));
    if (rejected(root, edge) != (norm(p.base, edge, root.norm_kind()) >= radius)) ++boundary_fail;
    if (!rejected(root, edge * 1.5)) ++beyond_fail;
  }
  // Exact boundary on H = I: the zero norm of a diagonal step is its largest |entry|.
  const Atlas unit(BasePoint(HermitianOperator::identity(3), 0.5));
  const bool at_edge = rejected(unit, HermitianOperator::diagonal(testing::vec({0.5, -0.25, 0.0})));
  const bool inside = !rejected(unit, HermitianOperator::diagonal(testing::vec({std::nextafter(0.5, 0.0), -0.25, 0.0})));
  return {admissible > 0 && distance <= 1e-10 && boundary_fail == 0 && beyond_fail == 0 && at_edge && inside,
          std::to_string(admissible) + "/30 admissible pairs, max state distance " + fmt("%.2e", distance) +
              ", boundary mismatches " + std::to_string(boundary_fail) + ", 1.5x accepted " +
              std::to_string(beyond_fail) + ", norm == 1-beta rejected: " + (at_edge ? "yes" : "no") +
              ", nextafter below accepted: " + (inside ? "yes" : "no")};
}

}  // namespace

int main() {
  set_warning_sink([](const std::string&) {});
  const std::vector<Criterion> criteria{
      {1, "worked 2x2 norms", 1.0, worked_norms},
      {2, "monotonicity in eps", 120.0, monotonicity},
      {3, "form bound below the zero norm", 120.0, relative_bound},
      {4, "semiboundedness of H0 + X", 0.0, semibounded},
      {5, "oscillator trace tail", 60.0, trace_tail_oscillator},
      {6, "lambda independence of the regularized mean", 0.0, lambda_independence},
      {7, "shift absorption and chart", 0.0, shift_and_chart},
      {8, "norm equivalence shrinks with X", 0.0, equivalence},
      {9, "flat transport", 0.0, transport},
      {10, "mixtures", 0.0, mixtures},
      {11, "atlas composition and boundary", 0.0, atlas},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += ", over the " + fmt("%.0f", c.budget_s) + " s budget";
    }
    if (!o.pass) ++failed;
    std::printf("%s [%2d] %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
