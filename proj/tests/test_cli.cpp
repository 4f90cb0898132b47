#include "qig/cli.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

using namespace qig;
using namespace qig::cli;

namespace {

std::string message_of(const std::string& text) {
  try {
    (void)parse_config(text, "t.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.model.family = Family::random_spd;
  c.model.dim = 5;
  c.model.lambda_max = 20.0;
  c.scale = 0.3;
  c.ensemble_size = 3;
  c.eps_grid_points = 5;
  c.seed = 4;
  c.ratio_samples = 20;
  c.halvings = 2;
  c.paths = 3;
  c.tail_dims = {10, 20, 40, 80, 160};
  return c;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (const char* old = std::getenv("QIG_THREADS")) saved = old;
    if (value) {
      setenv("QIG_THREADS", value, 1);
    } else {
      unsetenv("QIG_THREADS");
    }
  }
  ~EnvGuard() {
    if (saved.empty()) {
      unsetenv("QIG_THREADS");
    } else {
      setenv("QIG_THREADS", saved.c_str(), 1);
    }
  }
  std::string saved;
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse_config: full document") {
  const ExperimentConfig c = parse_config(R"({
    "experiment": "monotonicity",
    "model": {"family": "laplacian1d", "dim": 12, "potential_amplitude": 2.5, "beta0": 0.4},
    "perturbation": {"kind": "potential", "scale": 0.2},
    "ensemble_size": 7,
    "eps_grid_points": 11,
    "seed": 123,
    "output_path": "x.csv",
    "format": "json",
    "params": {"lambdas": [0.25, 0.75], "tail_dims": [5, 10], "eps": 0.1, "halvings": 3}
  })");
  CHECK(c.experiment == "monotonicity");
  CHECK(c.model.family == Family::laplacian1d);
  CHECK(c.model.dim == 12);
  CHECK(c.model.potential_amplitude == 2.5);
  CHECK(c.model.beta0 == 0.4);
  CHECK(c.perturbation == PerturbationKind::potential);
  CHECK(c.scale == 0.2);
  CHECK(c.ensemble_size == 7);
  CHECK(c.eps_grid_points == 11);
  CHECK(c.seed == 123);
  CHECK(c.output_path == "x.csv");
  CHECK(c.format == Format::json);
  CHECK(c.lambdas == std::vector<double>{0.25, 0.75});
  CHECK(c.tail_dims == std::vector<Index>{5, 10});
  CHECK(c.eps == 0.1);
  CHECK(c.halvings == 3);
}

TEST_CASE("parse_config: defaults fill in omitted fields") {
  const ExperimentConfig c = parse_config(R"({"experiment": "norms"})");
  CHECK(c.ensemble_size == 10);
  CHECK(c.eps_grid_points == 21);
  CHECK(c.format == Format::csv);
  CHECK(c.output_path.empty());
}

TEST_CASE("parse_config: errors name the line and the field") {
  CHECK(message_of("{\n\"experiment\": \"norms\",\n\"ensemble_size\": 0\n}") ==
        "t.json:3: field 'ensemble_size': must be at least 1, got 0");
  CHECK(message_of("{\n\"experiment\": \"norms\",\n\"eps_grid_points\": 1\n}").find("t.json:3: field 'eps_grid_points'") == 0);
  CHECK(message_of("{\"experiment\": \"norms\",\n \"model\": {\n  \"dim\": 2.5}}").find("t.json:3: field 'model.dim'") == 0);
  CHECK(message_of("{\"experiment\": \"norms\", \"colour\": 1}").find("field 'colour': unknown field") !=
        std::string::npos);
  CHECK(message_of("{\"experiment\": \"norms\",\n\n \"model\": {\"family\": \"coulomb\"}}").find(
            "t.json:3: field 'model.family'") == 0);
  CHECK(message_of("{\"experiment\": \"fly\"}").find("unknown experiment 'fly'") != std::string::npos);
  CHECK(message_of("{\n\"experiment\": \n}").find("t.json:3: malformed JSON") == 0);
  CHECK(message_of("[1, 2]").find("must be a JSON object") != std::string::npos);
  CHECK(message_of("{\"experiment\": \"norms\", \"seed\": -1}").find("field 'seed'") != std::string::npos);
  CHECK(message_of("{\"experiment\": \"norms\", \"format\": \"xml\"}").find("field 'format'") != std::string::npos);
}

TEST_CASE("validate: smallness is required only where a Gibbs state is built") {
  ExperimentConfig c = small("norms");
  c.scale = 3.0;
  CHECK_NOTHROW(validate(c));
  c.experiment = "gibbs";
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.scale = 0.3;
  c.tail_dims = {10, 10};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.tail_dims = {10};
  c.lambdas = {0.0};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.lambdas = {0.5};
  c.model.beta0 = 1.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("config_to_json round trips through parse_config") {
  const ExperimentConfig c = small("atlas");
  const ExperimentConfig d = parse_config(config_to_json(c).dump());
  CHECK(config_to_json(d) == config_to_json(c));
}

TEST_CASE("format_cell: 17 significant digits") {
  CHECK(format_cell(0.1) == "0.10000000000000001");
  CHECK(format_cell(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_cell(std::int64_t{42}) == "42");
  CHECK(format_cell(true) == "true");
  CHECK(format_cell(std::string("a,b")) == "\"a,b\"");
  CHECK(std::stod(format_cell(2.0 / 7.0)) == 2.0 / 7.0);
}

TEST_CASE("write_csv: header row then records") {
  Table t{{"instance", "value"}, {{std::int64_t{0}, 0.5}, {std::int64_t{1}, 1e-20}}};
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str() == "instance,value\n0,0.5\n1,9.9999999999999995e-21\n");
}

TEST_CASE("thread_count honours QIG_THREADS") {
  {
    EnvGuard g("3");
    CHECK(thread_count() == 3);
  }
  {
    EnvGuard g("0");
    CHECK(thread_count() >= 1);
  }
  {
    EnvGuard g(nullptr);
    CHECK(thread_count() >= 1);
  }
  {
    EnvGuard g("junk");
    CHECK(thread_count() >= 1);
  }
}

TEST_CASE("parallel_for visits every index once and rethrows the first failure") {
  EnvGuard g("4");
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  try {
    parallel_for(20, [](std::size_t i) {
      if (i == 7 || i == 13) throw std::runtime_error("boom " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "boom 7");
  }
}

TEST_CASE("run_experiment: every passing experiment passes on a small ensemble") {
  for (const std::string& name : experiment_names()) {
    // random_spd spectra stay in [1, lambda_max] at every N, so no tail converges.
    if (name == "equivalence" || name == "trace-tail") continue;
    CAPTURE(name);
    const RunResult r = run_experiment(small(name));
    CHECK(r.passed);
    CHECK_FALSE(r.table.rows.empty());
    for (const auto& row : r.table.rows) CHECK(row.size() == r.table.columns.size());
  }
}

TEST_CASE("run_experiment: equivalence reports intervals for every halving") {
  const RunResult r = run_experiment(small("equivalence"));
  CHECK(r.table.rows.size() == 3 * 3);
  for (const auto& row : r.table.rows) {
    const double lo = std::get<double>(row[3]), hi = std::get<double>(row[4]);
    CHECK(lo > 0.0);
    CHECK(lo <= 1.0);
    CHECK(hi >= 1.0);
  }
  for (const auto& v : r.violations) CHECK(v.contains("property"));
}

TEST_CASE("run_experiment: output is identical across thread counts") {
  const ExperimentConfig c = small("mixtures");
  RunResult a, b;
  {
    EnvGuard g("1");
    a = run_experiment(c);
  }
  {
    EnvGuard g("3");
    b = run_experiment(c);
  }
  std::ostringstream sa, sb;
  write_csv(sa, a.table);
  write_csv(sb, b.table);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("run_experiment: trace-tail rows converge above beta_X") {
  ExperimentConfig c = small("trace-tail");
  c.model.family = Family::oscillator;
  c.perturbation = PerturbationKind::offdiagonal;
  c.beta_factors = {1.05, 2.0};
  c.tail_dims = {25, 50, 100, 200, 400};
  const RunResult r = run_experiment(c);
  CHECK(r.passed);
  CHECK(r.summary.at("beta_x").get<double>() > 0.5);
  CHECK(std::get<bool>(r.table.rows.back().back()));
}

}
