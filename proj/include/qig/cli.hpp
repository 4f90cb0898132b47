#pragma once

// Experiment harness behind the `qig` executable: a JSON config, one runner
// per property suite, and CSV/JSON tables.

#include "qig/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qig::cli {

enum class Format { csv, json };

/// Names accepted by `--experiment`, in a fixed order.
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment;
  ModelSpec model;
  PerturbationKind perturbation = PerturbationKind::random_symmetric;
  /// Zero norm of the generated X at the instance base.
  double scale = 0.3;
  int ensemble_size = 10;
  int eps_grid_points = 21;
  std::uint64_t seed = 0;
  std::string output_path;  // empty writes to stdout
  Format format = Format::csv;

  // Experiment-specific knobs, all optional in the file.
  std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> beta_factors{1.05, 1.2, 2.0};
  std::vector<Index> tail_dims{25, 50, 100, 200, 400, 800, 1600, 3200, 5000};
  double tail_tol = 1e-12;
  double eps = 0.25;
  int ratio_samples = 200;
  int halvings = 4;
  int paths = 5;
  std::vector<double> mixture_lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
};

/// Invalid config: malformed JSON, wrong field type, or out-of-range value.
/// The message names the field and, where it can be located, the line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
/// Range checks shared by the file parser and command-line overrides.
void validate(const ExperimentConfig& config);
nlohmann::json config_to_json(const ExperimentConfig& config);

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunResult {
  Table table;
  bool passed = true;
  int checks = 0;
  /// One entry per violated property, each a self-contained dump.
  std::vector<nlohmann::json> violations;
  nlohmann::json summary = nlohmann::json::object();
};

RunResult run_experiment(const ExperimentConfig& config);

/// 17 significant digits for doubles.
std::string format_cell(const Cell& cell);
void write_csv(std::ostream& out, const Table& table);
void write_json(std::ostream& out, const ExperimentConfig& config, const RunResult& result);

/// QIG_THREADS, where unset or 0 means the hardware concurrency.
unsigned thread_count();
/// Calls body(i) for i in [0, n) on up to thread_count() threads. The first
/// exception by index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Entry point of the executable; returns the process exit status
/// (0 pass, 1 property violated, 2 invalid config or usage).
int main(int argc, char** argv);

}  // namespace qig::cli
