#include "qig/cli.hpp"

#include "qig/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qig::cli {

namespace {

using nlohmann::json;

// Line of the key at the end of `path`, found by scanning for each quoted
// segment after the previous one. Returns 0 if a segment cannot be found.
int line_of(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const std::string& seg : path) {
    const std::size_t hit = text.find('"' + seg + '"', pos);
    if (hit == std::string::npos) return 0;
    pos = hit + 1;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

int line_at_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

std::string dotted(const std::vector<std::string>& path) {
  std::string out;
  for (const std::string& seg : path) out += (out.empty() ? "" : ".") + seg;
  return out;
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& why) const {
    std::ostringstream os;
    os << source_;
    if (const int line = line_of(text_, path); line > 0) os << ":" << line;
    os << ": field '" << dotted(path) << "': " << why;
    throw ConfigError(os.str());
  }

  void only_keys(const json& obj, const std::vector<std::string>& path,
                 std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
      if (!ok.contains(key)) {
        std::vector<std::string> p = path;
        p.push_back(key);
        fail(p, "unknown field");
      }
    }
  }

  template <class T>
  void read(const json& obj, std::vector<std::string> path, T& out) const {
    const std::string key = path.back();
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(path, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(path, "expected a number");
      out = v.get<double>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) fail(path, "expected a nonnegative integer");
      out = v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(path, "expected an integer");
      const auto wide = v.get<std::int64_t>();
      if (wide < std::numeric_limits<T>::min() || wide > std::numeric_limits<T>::max()) {
        fail(path, "integer out of range");
      }
      out = static_cast<T>(wide);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) fail(path, "expected an array of numbers");
      out.clear();
      for (const json& e : v) {
        if (!e.is_number()) fail(path, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    } else if constexpr (std::is_same_v<T, std::vector<Index>>) {
      if (!v.is_array()) fail(path, "expected an array of integers");
      out.clear();
      for (const json& e : v) {
        if (!e.is_number_integer()) fail(path, "expected an array of integers");
        out.push_back(e.get<Index>());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported field type");
    }
  }

 private:
  const std::string& text_;
  std::string source_;
};

template <class F>
void field_check(const std::string& source, const std::string& field, bool ok, F&& why) {
  if (!ok) throw ConfigError(source + ": field '" + field + "': " + why());
}

bool needs_small_x(const std::string& experiment) {
  return experiment != "norms" && experiment != "monotonicity" && experiment != "relative-bound" &&
         experiment != "trace-tail";
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("format must be 'csv' or 'json', got '" + s + "'");
}

std::string to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "norms",       "monotonicity", "relative-bound", "gibbs",     "trace-tail", "lambda-independence",
      "equivalence", "atlas",        "transport",      "mixtures", "probe"};
  return names;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << line_at_byte(text, e.byte) << ": malformed JSON: " << e.what();
    throw ConfigError(os.str());
  }
  const Reader r(text, source);
  if (!doc.is_object()) throw ConfigError(source + ":1: the config must be a JSON object");
  r.only_keys(doc, {}, {"experiment", "model", "perturbation", "ensemble_size", "eps_grid_points", "seed",
                        "output_path", "format", "params"});

  ExperimentConfig c;
  r.read(doc, {"experiment"}, c.experiment);
  r.read(doc, {"ensemble_size"}, c.ensemble_size);
  r.read(doc, {"eps_grid_points"}, c.eps_grid_points);
  r.read(doc, {"seed"}, c.seed);
  r.read(doc, {"output_path"}, c.output_path);
  std::string format = "csv";
  r.read(doc, {"format"}, format);
  try {
    c.format = parse_format(format);
  } catch (const ConfigError& e) {
    r.fail({"format"}, e.what());
  }

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    r.only_keys(m, {"model"}, {"family", "dim", "spacing", "potential_amplitude", "lambda_max", "beta0"});
    std::string family = to_string(c.model.family);
    r.read(m, {"model", "family"}, family);
    try {
      c.model.family = parse_family(family);
    } catch (const PreconditionError& e) {
      r.fail({"model", "family"}, e.what());
    }
    r.read(m, {"model", "dim"}, c.model.dim);
    r.read(m, {"model", "spacing"}, c.model.spacing);
    r.read(m, {"model", "potential_amplitude"}, c.model.potential_amplitude);
    r.read(m, {"model", "lambda_max"}, c.model.lambda_max);
    r.read(m, {"model", "beta0"}, c.model.beta0);
  }
  if (doc.contains("perturbation")) {
    const json& p = doc.at("perturbation");
    r.only_keys(p, {"perturbation"}, {"kind", "scale"});
    std::string kind = to_string(c.perturbation);
    r.read(p, {"perturbation", "kind"}, kind);
    try {
      c.perturbation = parse_perturbation_kind(kind);
    } catch (const PreconditionError& e) {
      r.fail({"perturbation", "kind"}, e.what());
    }
    r.read(p, {"perturbation", "scale"}, c.scale);
  }
  if (doc.contains("params")) {
    const json& p = doc.at("params");
    r.only_keys(p, {"params"}, {"lambdas", "beta_factors", "tail_dims", "tail_tol", "eps", "ratio_samples",
                                "halvings", "paths", "mixture_lambdas"});
    r.read(p, {"params", "lambdas"}, c.lambdas);
    r.read(p, {"params", "beta_factors"}, c.beta_factors);
    r.read(p, {"params", "tail_dims"}, c.tail_dims);
    r.read(p, {"params", "tail_tol"}, c.tail_tol);
    r.read(p, {"params", "eps"}, c.eps);
    r.read(p, {"params", "ratio_samples"}, c.ratio_samples);
    r.read(p, {"params", "halvings"}, c.halvings);
    r.read(p, {"params", "paths"}, c.paths);
    r.read(p, {"params", "mixture_lambdas"}, c.mixture_lambdas);
  }

  // Range errors are reported against the line of the offending field.
  try {
    validate(c);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    const std::string tag = "field '";
    const std::size_t at = msg.find(tag);
    if (at != std::string::npos) {
      const std::size_t end = msg.find('\'', at + tag.size());
      std::vector<std::string> path;
      std::stringstream ss(msg.substr(at + tag.size(), end - at - tag.size()));
      for (std::string seg; std::getline(ss, seg, '.');) path.push_back(seg);
      if (const int line = line_of(text, path); line > 0) {
        throw ConfigError(source + ":" + std::to_string(line) + ": " + msg.substr(at));
      }
      throw ConfigError(source + ": " + msg.substr(at));
    }
    throw;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void validate(const ExperimentConfig& c) {
  const std::string s = "config";
  const auto& names = experiment_names();
  field_check(s, "experiment", std::find(names.begin(), names.end(), c.experiment) != names.end(), [&] {
    std::string all;
    for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
    return "unknown experiment '" + c.experiment + "' (expected one of: " + all + ")";
  });
  field_check(s, "ensemble_size", c.ensemble_size >= 1,
              [&] { return "must be at least 1, got " + std::to_string(c.ensemble_size); });
  field_check(s, "eps_grid_points", c.eps_grid_points >= 2,
              [&] { return "must be at least 2, got " + std::to_string(c.eps_grid_points); });
  try {
    qig::validate(c.model);
  } catch (const PreconditionError& e) {
    throw ConfigError(s + ": field 'model': " + e.what());
  }
  field_check(s, "perturbation.scale", std::isfinite(c.scale) && c.scale >= 0.0,
              [&] { return "must be finite and nonnegative"; });
  if (needs_small_x(c.experiment)) {
    field_check(s, "perturbation.scale", c.scale < 1.0 - c.model.beta0, [&] {
      std::ostringstream os;
      os << "experiment '" << c.experiment << "' needs a small X: scale " << c.scale << " must be below 1 - beta0 = "
         << 1.0 - c.model.beta0;
      return os.str();
    });
  }
  field_check(s, "params.lambdas",
              !c.lambdas.empty() && std::all_of(c.lambdas.begin(), c.lambdas.end(),
                                                [](double l) { return l > 0.0 && l < 1.0; }),
              [] { return "must be a nonempty list of values in (0,1)"; });
  field_check(s, "params.beta_factors",
              !c.beta_factors.empty() && std::all_of(c.beta_factors.begin(), c.beta_factors.end(),
                                                     [](double f) { return f > 0.0 && std::isfinite(f); }),
              [] { return "must be a nonempty list of positive numbers"; });
  field_check(s, "params.tail_dims",
              !c.tail_dims.empty() && c.tail_dims.front() >= 1 &&
                  std::adjacent_find(c.tail_dims.begin(), c.tail_dims.end(),
                                     [](Index a, Index b) { return b <= a; }) == c.tail_dims.end(),
              [] { return "must be a nonempty strictly increasing list of positive integers"; });
  field_check(s, "params.tail_tol", c.tail_tol > 0.0, [] { return "must be positive"; });
  field_check(s, "params.eps", c.eps >= 0.0 && c.eps <= 0.5, [] { return "must lie in [0, 0.5]"; });
  field_check(s, "params.ratio_samples", c.ratio_samples >= 1, [] { return "must be at least 1"; });
  field_check(s, "params.halvings", c.halvings >= 1, [] { return "must be at least 1"; });
  field_check(s, "params.paths", c.paths >= 1, [] { return "must be at least 1"; });
  field_check(s, "params.mixture_lambdas",
              !c.mixture_lambdas.empty() &&
                  std::all_of(c.mixture_lambdas.begin(), c.mixture_lambdas.end(),
                              [](double l) { return l >= 0.0 && l <= 1.0; }),
              [] { return "must be a nonempty list of values in [0,1]"; });
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {
      {"experiment", c.experiment},
      {"model",
       {{"family", to_string(c.model.family)},
        {"dim", c.model.dim},
        {"spacing", c.model.spacing},
        {"potential_amplitude", c.model.potential_amplitude},
        {"lambda_max", c.model.lambda_max},
        {"beta0", c.model.beta0}}},
      {"perturbation", {{"kind", to_string(c.perturbation)}, {"scale", c.scale}}},
      {"ensemble_size", c.ensemble_size},
      {"eps_grid_points", c.eps_grid_points},
      {"seed", c.seed},
      {"output_path", c.output_path},
      {"format", to_string(c.format)},
      {"params",
       {{"lambdas", c.lambdas},
        {"beta_factors", c.beta_factors},
        {"tail_dims", c.tail_dims},
        {"tail_tol", c.tail_tol},
        {"eps", c.eps},
        {"ratio_samples", c.ratio_samples},
        {"halvings", c.halvings},
        {"paths", c.paths},
        {"mixture_lambdas", c.mixture_lambdas}}},
  };
}

}  // namespace qig::cli
