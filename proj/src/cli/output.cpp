#include "qig/cli.hpp"

#include "qig/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace qig::cli {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

nlohmann::json cell_json(const Cell& cell) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, cell);
}

}  // namespace

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
  return csv_field(std::get<std::string>(cell));
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << csv_field(table.columns[j]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_cell(row[j]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const ExperimentConfig& config, const RunResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t j = 0; j < row.size(); ++j) obj[result.table.columns[j]] = cell_json(row[j]);
    rows.push_back(std::move(obj));
  }
  nlohmann::json doc{
      {"experiment", config.experiment},
      {"config", config_to_json(config)},
      {"passed", result.passed},
      {"checks", result.checks},
      {"summary", result.summary},
      {"columns", result.table.columns},
      {"rows", std::move(rows)},
      {"violations", result.violations},
  };
  out << doc.dump(2) << '\n';
}

unsigned thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const char* env = std::getenv("QIG_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) return hw;
  return v == 0 ? hw : static_cast<unsigned>(v);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::mutex m;
    std::size_t next = 0;
    auto work = [&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(m);
          if (next >= n) return;
          i = next++;
        }
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Perturbation norms, Gibbs states and exponential geometry on finite truncations"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  std::string config_path;
  std::optional<std::string> experiment, out_path, format;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "Path to the JSON config")->required();
  run->add_option("--experiment", experiment, "Experiment name (overrides the config)");
  run->add_option("--seed", seed, "Ensemble seed (overrides the config)");
  run->add_option("--out", out_path, "Output file; stdout if empty (overrides the config)");
  run->add_option("--format", format, "csv or json (overrides the config)")
      ->check(CLI::IsMember({"csv", "json"}));
  CLI::App* list = app.add_subcommand("list", "Print the experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& name : experiment_names()) std::cout << name << '\n';
    return 0;
  }

  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (experiment) config.experiment = *experiment;
    if (seed) config.seed = *seed;
    if (out_path) config.output_path = *out_path;
    if (format) config.format = *format == "json" ? Format::json : Format::csv;
    validate(config);
  } catch (const ConfigError& e) {
    std::cerr << "qig: invalid config: " << e.what() << '\n';
    return 2;
  }

  RunResult result;
  try {
    result = run_experiment(config);
  } catch (const PreconditionError& e) {
    std::cerr << "qig: invalid config for experiment '" << config.experiment << "': " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qig: experiment '" << config.experiment << "' failed: " << e.what() << '\n';
    return 1;
  }

  std::ofstream file;
  if (!config.output_path.empty()) {
    file.open(config.output_path);
    if (!file) {
      std::cerr << "qig: cannot open output file '" << config.output_path << "'\n";
      return 2;
    }
  }
  std::ostream& out = config.output_path.empty() ? std::cout : file;
  if (config.format == Format::csv) {
    write_csv(out, result.table);
  } else {
    write_json(out, config, result);
  }
  out.flush();

  nlohmann::json brief = result.summary;
  brief.erase("per_instance");
  std::cerr << config.experiment << ": " << (result.passed ? "PASS" : "FAIL") << " (" << result.checks
            << " checks, " << result.violations.size() << " violations) " << brief.dump() << '\n';
  constexpr std::size_t kShown = 3;
  for (std::size_t i = 0; i < std::min(kShown, result.violations.size()); ++i) {
    std::cerr << "violation: " << result.violations[i].dump() << '\n';
  }
  if (result.violations.size() > kShown) {
    std::cerr << "... " << result.violations.size() - kShown
              << " more violations; --format json writes all of them\n";
  }
  return result.passed ? 0 : 1;
}

}  // namespace qig::cli
