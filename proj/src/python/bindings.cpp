#include "qig/cli.hpp"
#include "qig/error.hpp"
#include "qig/geometry.hpp"
#include "qig/gibbs.hpp"
#include "qig/manifold.hpp"
#include "qig/models.hpp"
#include "qig/perturbation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace qig;

namespace {

HermitianOperator op(const Matrix& m) { return HermitianOperator(m); }

NormKind kind_of(const std::string& name) { return NormKind::parse(name); }

GibbsState gibbs(const BasePoint& base, const Matrix& x, std::optional<std::vector<double>> b_grid) {
  if (b_grid) return gibbs_state(base, op(x), *b_grid);
  return gibbs_state(base, op(x));
}

ModelSpec model_spec(const std::string& family, Index dim, double beta0, std::uint64_t seed, double spacing,
                     double potential_amplitude, double lambda_max) {
  ModelSpec spec;
  spec.family = parse_family(family);
  spec.dim = dim;
  spec.beta0 = beta0;
  spec.seed = seed;
  spec.spacing = spacing;
  spec.potential_amplitude = potential_amplitude;
  spec.lambda_max = lambda_max;
  validate(spec);
  return spec;
}

std::string run_json(const std::string& config_text) {
  cli::ExperimentConfig config = cli::parse_config(config_text, "<python>");
  cli::validate(config);
  cli::RunResult result;
  {
    py::gil_scoped_release release;
    result = cli::run_experiment(config);
  }
  std::ostringstream os;
  cli::write_json(os, config, result);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_qig, m) {
  m.doc() = "Perturbation norms, Gibbs states and exponential-family geometry on finite truncations";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  auto precondition = py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", precondition.ptr());
  py::register_exception<ProvenanceError>(m, "ProvenanceError", precondition.ptr());
  py::register_exception<SmallnessError>(m, "SmallnessError", precondition.ptr());
  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);
  (void)numerical;

  py::class_<BasePoint>(m, "BasePoint")
      .def(py::init([](const Matrix& h, double beta0) { return BasePoint(op(h), beta0); }), py::arg("hamiltonian"),
           py::arg("beta0"))
      .def_property_readonly("dim", &BasePoint::dim)
      .def_property_readonly("hamiltonian", [](const BasePoint& b) { return b.hamiltonian().matrix(); })
      .def_property_readonly("resolvent", [](const BasePoint& b) { return b.resolvent().matrix(); })
      .def_property_readonly("state", [](const BasePoint& b) { return b.state().matrix(); })
      .def_property_readonly("log_partition", &BasePoint::log_partition)
      .def_property_readonly("beta0", &BasePoint::beta0)
      .def_property_readonly("hood_radius", &BasePoint::hood_radius)
      .def_property_readonly("id", &BasePoint::id);

  m.def("norm_omega", [](const BasePoint& b, const Matrix& x) { return norm_omega(b, op(x)); });
  m.def("norm_zero", [](const BasePoint& b, const Matrix& x) { return norm_zero(b, op(x)); });
  m.def("norm_eps", [](const BasePoint& b, const Matrix& x, double eps) { return norm_eps(b, op(x), eps); },
        py::arg("base"), py::arg("x"), py::arg("eps"));
  m.def("norm", [](const BasePoint& b, const Matrix& x, const std::string& kind) { return norm(b, op(x), kind_of(kind)); },
        py::arg("base"), py::arg("x"), py::arg("kind") = "zero",
        "kind is 'omega', 'zero' or 'eps:<value>'");
  m.def("eps_grid", &eps_grid, py::arg("points") = 21);
  m.def(
      "perturbation_norms",
      [](const BasePoint& b, const Matrix& x, int points) {
        const PerturbationNorms n = perturbation_norms(b, op(x), points);
        py::dict d;
        d["omega"] = n.omega;
        d["zero"] = n.zero;
        d["eps_grid"] = n.eps_grid;
        return d;
      },
      py::arg("base"), py::arg("x"), py::arg("grid_points") = 21);
  m.def("form_bound_at", [](const BasePoint& b, const Matrix& x, double bb) { return form_bound_at(b, op(x), bb); });
  m.def(
      "relative_bound_form",
      [](const BasePoint& b, const Matrix& x, std::optional<std::vector<double>> grid) {
        const RelativeBound r = grid ? relative_bound_form(b, op(x), *grid) : relative_bound_form(b, op(x), default_b_grid());
        return py::make_tuple(r.a, r.b);
      },
      py::arg("base"), py::arg("x"), py::arg("b_grid") = py::none(), "Returns (a, b).");
  m.def("is_small", [](const BasePoint& b, const Matrix& x, const std::string& kind) { return is_small(b, op(x), kind_of(kind)); },
        py::arg("base"), py::arg("x"), py::arg("kind") = "zero");
  m.def(
      "class_norm",
      [](const BasePoint& b, const Matrix& x, const std::string& kind) {
        const ClassNorm c = class_norm(b, op(x), kind_of(kind));
        return py::make_tuple(c.alpha, c.value);
      },
      py::arg("base"), py::arg("x"), py::arg("kind") = "zero", "Returns (alpha, min ||X + alpha I||).");

  py::class_<GibbsState>(m, "GibbsState")
      .def_property_readonly("rho", [](const GibbsState& s) { return s.rho.matrix(); })
      .def_readonly("log_z", &GibbsState::log_z)
      .def_property_readonly("h_eff", [](const GibbsState& s) { return s.h_eff.matrix(); })
      .def_readonly("offset", &GibbsState::offset)
      .def_readonly("beta_class", &GibbsState::beta_class)
      .def_property_readonly("a", [](const GibbsState& s) { return s.bound.a; })
      .def_property_readonly("b", [](const GibbsState& s) { return s.bound.b; })
      .def_readonly("base_id", &GibbsState::base_id)
      .def_property_readonly("perturbation", [](const GibbsState& s) { return s.perturbation.matrix(); });

  m.def("gibbs_state", &gibbs, py::arg("base"), py::arg("x"), py::arg("b_grid") = py::none());
  m.def("regularized_mean",
        [](const Matrix& rho, const Matrix& x, double lambda) { return regularized_mean(op(rho), op(x), lambda); },
        py::arg("rho"), py::arg("x"), py::arg("lam") = 0.5);
  m.def("cp_membership", [](const Matrix& rho, double p) { return cp_membership(op(rho), p); });

  m.def("center", [](const BasePoint& b, const Matrix& x) { return center(b, op(x)).xhat.matrix(); });
  m.def("chart", [](const BasePoint& b, const GibbsState& s) { return chart(b, s).xhat.matrix(); });
  m.def(
      "inverse_chart",
      [](const BasePoint& b, const Matrix& xhat, const std::string& kind) {
        return inverse_chart(b, Score{op(xhat), b.id()}, kind_of(kind));
      },
      py::arg("base"), py::arg("xhat"), py::arg("kind") = "zero");
  m.def("equivalent_mod_identity",
        [](const Matrix& x, const Matrix& y, double tol) { return equivalent_mod_identity(op(x), op(y), tol); },
        py::arg("x"), py::arg("y"), py::arg("tol") = 1e-10);
  m.def("rebase", &rebase);
  m.def("norm_at", [](const BasePoint& b, const Matrix& y, const std::string& kind) { return norm_at(b, op(y), kind_of(kind)); },
        py::arg("base"), py::arg("y"), py::arg("kind") = "zero");
  m.def(
      "equivalence_constants",
      [](const BasePoint& b0, const BasePoint& bx, const std::string& kind, int n, std::uint64_t seed) {
        const EquivalenceConstants e = equivalence_constants(b0, bx, kind_of(kind), n, seed);
        return py::make_tuple(e.c_low, e.c_high);
      },
      py::arg("base0"), py::arg("base_x"), py::arg("kind"), py::arg("ensemble_size"), py::arg("seed"),
      "Returns (c_low, c_high).");

  m.def("exp_mixture",
        [](const BasePoint& b, const Matrix& x, const Matrix& y, double lambda) { return exp_mixture(b, op(x), op(y), lambda); },
        py::arg("base"), py::arg("x"), py::arg("y"), py::arg("lam"));
  m.def("mix_mixture",
        [](const GibbsState& sx, const GibbsState& sy, double lambda) { return mix_mixture(sx, sy, lambda).matrix(); },
        py::arg("sx"), py::arg("sy"), py::arg("lam"));
  m.def("trace_distance", [](const Matrix& a, const Matrix& b) { return trace_distance(op(a), op(b)); });
  m.def(
      "parallel_transport",
      [](const Matrix& xhat, const BasePoint& from, const BasePoint& to, const std::vector<const BasePoint*>& path) {
        const TangentVector v{Score{op(xhat), from.id()}};
        return parallel_transport(v, from, to, path).score.xhat.matrix();
      },
      py::arg("xhat"), py::arg("source"), py::arg("target"), py::arg("path"));

  m.def(
      "make_base",
      [](const std::string& family, Index dim, double beta0, std::uint64_t seed, double spacing, double amp,
         double lambda_max) { return make_base(model_spec(family, dim, beta0, seed, spacing, amp, lambda_max)); },
      py::arg("family"), py::arg("dim"), py::arg("beta0") = 0.5, py::arg("seed") = 0, py::arg("spacing") = 1.0,
      py::arg("potential_amplitude") = 0.0, py::arg("lambda_max") = 100.0);
  m.def(
      "make_perturbation",
      [](const std::string& family, Index dim, const std::string& kind, double scale, double beta0, std::uint64_t seed,
         double spacing, double amp, double lambda_max) {
        const ModelSpec spec = model_spec(family, dim, beta0, seed, spacing, amp, lambda_max);
        return make_perturbation(spec, parse_perturbation_kind(kind), scale).matrix();
      },
      py::arg("family"), py::arg("dim"), py::arg("kind"), py::arg("scale"), py::arg("beta0") = 0.5,
      py::arg("seed") = 0, py::arg("spacing") = 1.0, py::arg("potential_amplitude") = 0.0,
      py::arg("lambda_max") = 100.0);

  m.def("experiment_names", &cli::experiment_names);
  m.def("_run_json", &run_json);
}
