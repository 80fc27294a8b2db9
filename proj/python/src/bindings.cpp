#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "config.hpp"
#include "conecalc/cones.hpp"
#include "conecalc/errors.hpp"
#include "conecalc/io.hpp"
#include "conecalc/riesz.hpp"
#include "conecalc/solver.hpp"
#include "conecalc/viscosity.hpp"

namespace py = pybind11;
using namespace conecalc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

SymMatrix to_sym(const Array& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw py::value_error("expected a square matrix");
  const auto n = static_cast<std::size_t>(a.shape(0));
  SymMatrix m(n, std::span<const double>(a.data(), n * n));
  return m;
}

Array from_sym(const SymMatrix& m) {
  const auto n = static_cast<py::ssize_t>(m.dim());
  Array out({n, n});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Vector to_vec(const Array& a) { return Vector(a.data(), a.data() + a.size()); }

Array from_vec(std::span<const double> v) {
  Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array grid_values(const GridFunction& g) {
  std::vector<py::ssize_t> shape(g.dims().begin(), g.dims().end());
  Array out(shape);
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

py::dict membership(const MembershipReport& r) {
  py::dict d;
  d["member"] = r.member;
  d["margin"] = r.margin;
  d["tolerance"] = r.tolerance;
  if (r.witness) d["witness"] = py::make_tuple(r.witness->kind, r.witness->index);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native bindings for conecalc";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<UnsupportedPolarError>(m, "UnsupportedPolarError", PyExc_ValueError);
  py::register_exception<ConsistencyError>(m, "ConsistencyError", PyExc_RuntimeError);

  m.def("eigenvalues", [](const Array& a) { return from_vec(eigenvalues(to_sym(a))); }, py::arg("a"),
        "Ascending eigenvalues of a symmetric matrix.");
  m.def("partial_sum", [](const Array& a, double p) { return partial_sum(to_sym(a), p); }, py::arg("a"),
        py::arg("p"), "Sum of the floor(p) smallest eigenvalues plus the fractional part times the next.");

  py::class_<ConeSpec>(m, "Cone")
      .def(py::init([](const std::string& spec, int dim) { return parse_cone(spec, dim); }), py::arg("spec"),
           py::arg("dim"))
      .def_property_readonly("dim", &ConeSpec::dim)
      .def_property_readonly("o_n_invariant", &ConeSpec::o_n_invariant)
      .def("describe", &ConeSpec::describe)
      .def("dual_description", [](const ConeSpec& c) { return dual_description(c); })
      .def("contains",
           [](const ConeSpec& c, const Array& a, bool interior) {
             return membership(contains(c, to_sym(a), interior ? Mode::interior : Mode::closed));
           },
           py::arg("a"), py::arg("interior") = false)
      .def("dual_contains", [](const ConeSpec& c, const Array& a) { return membership(dual_contains(c, to_sym(a))); },
           py::arg("a"))
      .def("riesz_characteristic",
           [](const ConeSpec& c, double tol) {
             const RieszResult r = riesz_characteristic(c, tol);
             py::dict d;
             d["value"] = r.value;
             d["closed_form"] = r.closed_form ? py::cast(*r.closed_form) : py::none();
             d["at_least_n"] = r.at_least_n;
             d["lower_bound_only"] = r.sampled;
             return d;
           },
           py::arg("tol") = 1e-8)
      .def("pp_subset",
           [](const ConeSpec& c, double p) {
             const SubsetResult r = pp_subset_test(c, p);
             py::dict d;
             d["pass"] = r.pass;
             d["worst_margin"] = r.worst_margin;
             d["witness"] = r.witness ? py::cast(*r.witness) : py::none();
             return d;
           },
           py::arg("p"))
      .def("__repr__", [](const ConeSpec& c) { return "Cone('" + c.describe() + "', " + std::to_string(c.dim()) + ")"; });

  m.def("check_relation",
        [](const std::string& f, const std::string& mono, int dim, std::size_t samples, std::uint64_t seed) {
          const RelationResult r =
              check_relation(parse_cone(f, dim), parse_cone(mono, dim), {seed, samples, 1.0, 1});
          return r.pass;
        },
        py::arg("f"), py::arg("m"), py::arg("dim"), py::arg("samples") = 1000, py::arg("seed") = 0,
        "True when F + M stays inside F on every sample.");

  m.def("kernel_value", [](double p, const Array& x) {
    return kernel_value(RieszKernelSpec(p, static_cast<int>(x.size())), to_vec(x));
  }, py::arg("p"), py::arg("x"));
  m.def("kernel_hessian", [](double p, const Array& x) {
    return from_sym(kernel_jet(RieszKernelSpec(p, static_cast<int>(x.size())), to_vec(x)).hess);
  }, py::arg("p"), py::arg("x"));

  m.def("solve_json",
        [](const std::string& config, const std::string& base) {
          const auto cfg = app::parse_problem(nlohmann::json::parse(config), base);
          SolveReport r;
          {
            py::gil_scoped_release release;
            r = solve(cfg.problem, cfg.stencil, cfg.solve);
          }
          return py::make_tuple(grid_values(r.solution), app::solve_json(r, cfg.problem.op).dump());
        },
        py::arg("config"), py::arg("base") = ".",
        "Solves a problem JSON; returns (values, report JSON). Punctured nodes hold -inf.");

  m.def("read_grid", [](const std::string& path) {
    const GridFunction g = io::read_grid(path);
    return py::make_tuple(grid_values(g), g.origin(), g.h());
  }, py::arg("path"), "Returns (values, origin, h).");
}
