#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "config.hpp"
#include "conecalc/cones.hpp"
#include "conecalc/errors.hpp"
#include "conecalc/io.hpp"
#include "conecalc/riesz.hpp"
#include "conecalc/solver.hpp"
#include "conecalc/viscosity.hpp"

namespace conecalc::app {
namespace fs = std::filesystem;

namespace {

/// Thrown by commands to report a mathematical failure (exit 1) after output.
struct Failed {};

Vector parse_vector(const std::string& text) {
  const auto rows = io::parse_points_csv(text);
  if (rows.size() != 1) throw ParseError("expected one comma-separated vector, got '" + text + "'", 0);
  return rows.front();
}

std::vector<int> parse_shape(const std::string& text) {
  std::vector<int> out;
  for (double d : parse_vector(text)) {
    if (d != std::floor(d) || d < 1) throw ParseError("grid shape entries must be positive integers", 0);
    out.push_back(static_cast<int>(d));
  }
  return out;
}

json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  return {{"kind", w->kind}, {"index", w->index}};
}

json membership_json(const MembershipReport& r) {
  return {{"member", r.member},
          {"margin", number(r.margin)},
          {"tolerance", number(r.tolerance)},
          {"witness", witness_json(r.witness)}};
}

struct Common {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string output;
  std::string report;
};

class Emitter {
 public:
  Emitter(std::ostream& out, const Common& c) : out_(out), c_(c) {}

  /// JSON goes to --output when it names the report, else stdout.
  void json_to_output(const json& j) const { write(j, c_.output); }
  /// JSON goes to --report (when set) or stdout; --output is taken by a data file.
  void json_to_report(const json& j) const { write(j, c_.report); }

 private:
  void write(const json& j, const std::string& path) const {
    if (path.empty() || path == "-") {
      out_ << j.dump(2) << '\n';
      return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << j.dump(2) << '\n';
  }
  std::ostream& out_;
  const Common& c_;
};

SymMatrix read_matrix_arg(const std::string& path) { return io::read_matrix_csv(path); }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"conecalc: cones of symmetric matrices, Riesz potentials and removable singularities"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Seed for randomized certifications (default 0)")
      ->envname("CONECALC_SEED");
  app.add_option("--workers", common.workers, "Worker threads for sampling")->check(CLI::Range(1u, 256u));
  app.add_option("--output", common.output, "Output path (JSON, grid file or directory)");
  app.add_option("--report", common.report, "JSON report path for commands whose --output is a data file");

  const Emitter emit(out, common);
  std::function<int()> action;

  // cone ---------------------------------------------------------------------------
  auto* cone_cmd = app.add_subcommand("cone", "Riesz characteristic, dual and membership report for a cone");
  std::string spec;
  int dim = 0;
  double tol = 1e-8;
  std::string matrix_path;
  std::size_t sphere = 200;
  cone_cmd->add_option("--spec", spec, "Cone descriptor, e.g. pp:2.5, pucci:1:2, enl:pp:2:0.1")->required();
  cone_cmd->add_option("--dim", dim, "Ambient dimension n")->required()->check(CLI::PositiveNumber);
  cone_cmd->add_option("--tol", tol, "Bisection tolerance for the Riesz characteristic");
  cone_cmd->add_option("--matrix", matrix_path, "CSV matrix to test for membership");
  cone_cmd->add_option("--sphere-samples", sphere, "Sphere sample size for non-invariant cones");
  cone_cmd->callback([&] {
    action = [&] {
      const ConeSpec c = parse_cone(spec, dim);
      json r{{"cone", c.describe()},
             {"dim", dim},
             {"o_n_invariant", c.o_n_invariant()},
             {"dual_description", dual_description(c)},
             {"seed", common.seed}};
      try {
        const RieszResult rr = riesz_characteristic(c, tol, 60, sphere);
        r["riesz_characteristic"] = rr.value;
        r["characteristic_at_least_n"] = rr.at_least_n;
        r["lower_bound_only"] = rr.sampled;
      } catch (const DomainError& e) {
        r["riesz_characteristic"] = nullptr;
        r["riesz_error"] = e.what();
      }
      const auto cf = riesz_closed_form(c);
      r["closed_form"] = cf ? json(*cf) : json(nullptr);
      if (!matrix_path.empty()) {
        const SymMatrix a = read_matrix_arg(matrix_path);
        Witness w;
        const auto closed = contains(c, a, Mode::closed);
        const auto interior = contains(c, a, Mode::interior);
        r["member"] = closed.member;
        r["interior_member"] = interior.member;
        r["margin"] = number(closed.margin);
        r["tolerance"] = number(closed.tolerance);
        r["witness"] = witness_json(closed.witness);
        r["dual_member"] = membership_json(dual_contains(c, a));
        const Spectrum s = eigh(a);
        json vecs = json::array();
        for (const auto& v : s.eigenvectors) vecs.push_back(vector_json(v));
        r["spectrum"] = {{"eigenvalues", vector_json(s.eigenvalues)}, {"eigenvectors", vecs}};
      }
      emit.json_to_output(r);
      return 0;
    };
  });

  // check --------------------------------------------------------------------------
  auto* check_cmd = app.add_subcommand("check", "Randomized certifications");
  check_cmd->require_subcommand(1);
  std::string f_spec, m_spec;
  std::size_t samples = 1000;
  double magnitude = 1.0;
  double p_value = 1.0;
  auto sampling_opts = [&](CLI::App* sub) {
    sub->add_option("--dim", dim, "Ambient dimension n")->required()->check(CLI::PositiveNumber);
    sub->add_option("--samples", samples, "Number of seeded samples")->check(CLI::PositiveNumber);
    sub->add_option("--magnitude", magnitude, "Scale of the random matrices");
  };
  auto relation_json = [&](const RelationResult& rr, const ConeSpec& f, const ConeSpec& m) {
    json r{{"kind", "relation"},         {"f", f.describe()},      {"m", m.describe()}, {"dim", dim},
           {"samples", rr.samples},      {"seed", common.seed},    {"pass", rr.pass}};
    if (!rr.pass) {
      r["counterexample"] = {{"index", *rr.failing_index},
                             {"a", matrix_json(*rr.a)},
                             {"b", matrix_json(*rr.b)},
                             {"margin_a", number(rr.margin_a)},
                             {"margin_b", number(rr.margin_b)},
                             {"margin_sum", number(rr.margin_sum)}};
    }
    return r;
  };
  auto cfg = [&] { return SampleConfig{common.seed, samples, magnitude, common.workers}; };

  auto* pos_cmd = check_cmd->add_subcommand("positivity", "F + P subset F");
  pos_cmd->add_option("--f", f_spec, "Cone descriptor")->required();
  sampling_opts(pos_cmd);
  pos_cmd->callback([&] {
    action = [&] {
      const ConeSpec f = parse_cone(f_spec, dim), m = ConeSpec::positivity(dim);
      const auto rr = check_relation(f, m, cfg());
      json r = relation_json(rr, f, m);
      r["kind"] = "positivity";
      emit.json_to_output(r);
      return rr.pass ? 0 : 1;
    };
  });

  auto* mono_cmd = check_cmd->add_subcommand("monotone", "F + M subset F");
  mono_cmd->add_option("--f", f_spec, "Cone descriptor F")->required();
  mono_cmd->add_option("--m", m_spec, "Monotonicity cone descriptor M")->required();
  sampling_opts(mono_cmd);
  mono_cmd->callback([&] {
    action = [&] {
      const ConeSpec f = parse_cone(f_spec, dim), m = parse_cone(m_spec, dim);
      const auto rr = check_relation(f, m, cfg());
      json r = relation_json(rr, f, m);
      r["kind"] = "monotone";
      emit.json_to_output(r);
      return rr.pass ? 0 : 1;
    };
  });

  auto* dual_cmd = check_cmd->add_subcommand("duality", "Definitional dual vs closed-form dual");
  dual_cmd->add_option("--f", f_spec, "Cone descriptor")->required();
  sampling_opts(dual_cmd);
  dual_cmd->callback([&] {
    action = [&] {
      const ConeSpec f = parse_cone(f_spec, dim);
      const DualityResult d = check_duality(f, cfg());
      json r{{"kind", "duality"},
             {"f", f.describe()},
             {"dim", dim},
             {"dual_description", dual_description(f)},
             {"reference", d.reference},
             {"samples", d.samples},
             {"banded", d.banded},
             {"disagreements", d.disagreements},
             {"seed", common.seed},
             {"pass", d.pass}};
      if (!d.pass) r["counterexample"] = {{"index", *d.failing_index}, {"a", matrix_json(*d.a)}};
      emit.json_to_output(r);
      return d.pass ? 0 : 1;
    };
  });

  auto* sub_cmd = check_cmd->add_subcommand("pp-subset", "I - p P_e in M for all unit e");
  sub_cmd->add_option("--m", m_spec, "Cone descriptor M")->required();
  sub_cmd->add_option("--dim", dim, "Ambient dimension n")->required()->check(CLI::PositiveNumber);
  sub_cmd->add_option("--p", p_value, "Exponent p in [1, n]")->required();
  sub_cmd->add_option("--sphere-samples", sphere, "Sphere sample size for non-invariant cones");
  sub_cmd->callback([&] {
    action = [&] {
      const ConeSpec m = parse_cone(m_spec, dim);
      const SubsetResult s = pp_subset_test(m, p_value, sphere);
      json r{{"kind", "pp-subset"},       {"m", m.describe()},         {"dim", dim},
             {"p", p_value},              {"directions", s.directions}, {"sampled", s.sampled},
             {"worst_margin", number(s.worst_margin)}, {"seed", common.seed}, {"pass", s.pass}};
      if (!s.pass) r["witness"] = vector_json(*s.witness);
      emit.json_to_output(r);
      return s.pass ? 0 : 1;
    };
  });

  // kernel -------------------------------------------------------------------------
  auto* kernel_cmd = app.add_subcommand("kernel", "Riesz kernel or potential 2-jets at points");
  std::vector<std::string> xs;
  std::string points_path, measure_path;
  kernel_cmd->add_option("--p", p_value, "Riesz exponent p in [1, n]")->required();
  kernel_cmd->add_option("--dim", dim, "Ambient dimension n")->required()->check(CLI::PositiveNumber);
  kernel_cmd->add_option("--x", xs, "Evaluation point, comma separated (repeatable)");
  kernel_cmd->add_option("--points", points_path, "CSV of evaluation points");
  kernel_cmd->add_option("--measure", measure_path, "CSV measure (points plus weight column); default unit atom at 0");
  kernel_cmd->callback([&] {
    action = [&] {
      const RieszKernelSpec k(p_value, dim);
      std::vector<Vector> pts;
      for (const auto& s : xs) pts.push_back(parse_vector(s));
      if (!points_path.empty()) {
        auto more = io::read_points_csv(points_path);
        pts.insert(pts.end(), more.begin(), more.end());
      }
      if (pts.empty()) throw ParseError("kernel: give --x or --points", 0);
      const DiscreteMeasure mu = measure_path.empty()
                                     ? DiscreteMeasure({Atom{Vector(static_cast<std::size_t>(dim), 0.0), 1.0}})
                                     : parse_measure_csv(io::read_file(measure_path));
      json rows = json::array();
      for (const auto& x : pts) {
        if (x.size() != static_cast<std::size_t>(dim)) throw DomainError("kernel: point dimension differs from --dim");
        json row{{"x", vector_json(x)}, {"value", number(potential_value(k, mu, x))}};
        try {
          const auto j = potential_jet(k, mu, x);
          row["pole"] = !j.has_value();
          if (j) {
            row["grad"] = vector_json(j->grad);
            row["hess"] = matrix_json(j->hess);
            row["partial_sum_p"] = number(partial_sum(j->hess, p_value));
          }
        } catch (const PoleError&) {
          row["pole"] = true;
        }
        rows.push_back(row);
      }
      emit.json_to_output({{"p", p_value}, {"dim", dim}, {"c_p", k.c_p()}, {"atoms", mu.atoms().size()}, {"points", rows}});
      return 0;
    };
  });

  // polar --------------------------------------------------------------------------
  auto* polar_cmd = app.add_subcommand("polar", "Riesz polar function of a finite set, optionally on a grid");
  std::string shape_text, origin_text, scales_text;
  double h = 0.0;
  polar_cmd->add_option("--p", p_value, "Riesz exponent p >= 2")->required();
  polar_cmd->add_option("--x", xs, "Point of E, comma separated (repeatable)");
  polar_cmd->add_option("--points", points_path, "CSV of the points of E");
  polar_cmd->add_option("--shape", shape_text, "Grid shape, e.g. 65,65 (writes the grid to --output)");
  polar_cmd->add_option("--origin", origin_text, "Grid origin");
  polar_cmd->add_option("--spacing", h, "Grid spacing h");
  polar_cmd->add_option("--scales", scales_text, "Box-counting scales, comma separated");
  polar_cmd->callback([&] {
    action = [&] {
      std::vector<Vector> pts;
      for (const auto& s : xs) pts.push_back(parse_vector(s));
      if (!points_path.empty()) {
        auto more = io::read_points_csv(points_path);
        pts.insert(pts.end(), more.begin(), more.end());
      }
      if (pts.empty()) throw ParseError("polar: give --x or --points", 0);
      const PolarFunction psi = build_polar(pts, p_value);
      std::vector<double> scales = scales_text.empty() ? default_box_scales(pts) : parse_vector(scales_text);
      const BoxDimensionReport box = box_dimension(pts, scales);
      json r{{"p", p_value},
             {"dim", psi.spec().n()},
             {"atoms", pts.size()},
             {"box_dimension",
              {{"dimension", box.dimension},
               {"scales", box.scales},
               {"counts", box.counts},
               {"advisory", true},
               {"at_most_p_minus_2", box.dimension <= p_value - 2.0}}}};
      if (!shape_text.empty()) {
        if (origin_text.empty() || !(h > 0.0)) throw ParseError("polar: --shape needs --origin and --spacing", 0);
        if (common.output.empty()) throw ParseError("polar: --shape needs --output for the grid file", 0);
        const GridFunction like(parse_shape(shape_text), parse_vector(origin_text), h);
        const GridFunction g = psi.sample(like);
        io::write_grid(common.output, g);
        r["grid"] = common.output;
        r["minus_inf_cells"] = g.masked_count();
      }
      emit.json_to_report(r);
      return 0;
    };
  });

  // grid ---------------------------------------------------------------------------
  auto* grid_cmd = app.add_subcommand("grid", "Operations on grid functions");
  grid_cmd->require_subcommand(1);
  std::string input;
  int radius_cap = 5;
  double min_radius = 0.0;
  std::optional<double> c_tol;
  std::size_t max_violations = 100;

  auto* ext_cmd = grid_cmd->add_subcommand("extend", "Canonical upper semicontinuous extension across the mask");
  ext_cmd->add_option("--input", input, "Grid file")->required();
  ext_cmd->add_option("--radius-cap", radius_cap, "Shells searched before a node counts as interior to E");
  ext_cmd->add_option("--min-radius", min_radius, "Physical radius of the sup ball (0: nearest shell)");
  ext_cmd->callback([&] {
    action = [&] {
      const GridFunction u = io::read_grid(input);
      const ExtensionReport rep = canonical_extension(u, {radius_cap, min_radius});
      if (!common.output.empty()) io::write_grid(common.output, rep.extended);
      emit.json_to_report({{"changed_points", rep.changed_points},
                           {"sup_change", number(rep.sup_change)},
                           {"interior_points", rep.interior_points},
                           {"masked", u.masked_count()},
                           {"grid", common.output.empty() ? json(nullptr) : json(common.output)}});
      return 0;
    };
  });

  auto verify_opts = [&](CLI::App* sub) {
    sub->add_option("--input", input, "Grid file")->required();
    sub->add_option("--spec", spec, "Cone descriptor")->required();
    sub->add_option("--c-tol", c_tol, "Enlargement c (default: pointwise third-difference estimate times h)");
    sub->add_option("--max-violations", max_violations, "Violations listed in the report");
  };
  auto* ver_cmd = grid_cmd->add_subcommand("verify", "Grid-scale subharmonicity check");
  verify_opts(ver_cmd);
  ver_cmd->callback([&] {
    action = [&] {
      const GridFunction u = io::read_grid(input);
      const ConeSpec c = parse_cone(spec, static_cast<int>(u.n()));
      const VerifyReport r = subharmonic_verify(u, c, c_tol);
      json j = verify_json(r, max_violations);
      j["cone"] = c.describe();
      emit.json_to_output(j);
      return r.pass ? 0 : 1;
    };
  });

  auto* harm_cmd = grid_cmd->add_subcommand("harmonic", "u in F and -u in the dual of F");
  verify_opts(harm_cmd);
  harm_cmd->callback([&] {
    action = [&] {
      const GridFunction u = io::read_grid(input);
      const ConeSpec c = parse_cone(spec, static_cast<int>(u.n()));
      const HarmonicReport r = harmonic_verify(u, c, c_tol);
      emit.json_to_output({{"cone", c.describe()},
                           {"harmonic", r.harmonic},
                           {"sub", verify_json(r.sub, max_violations)},
                           {"dual", verify_json(r.dual, max_violations)}});
      return r.harmonic ? 0 : 1;
    };
  });

  auto* cone_chk = grid_cmd->add_subcommand("upper-conical", "Search for a test quadratic above U + eps|x - q|");
  std::string x_text;
  double eps = 0.0, hess_bound = 0.0;
  int probe_radius = 1;
  cone_chk->add_option("--input", input, "Grid file")->required();
  cone_chk->add_option("--x", x_text, "Point q (snapped to its cell)")->required();
  cone_chk->add_option("--eps", eps, "Cone coefficient eps")->required();
  cone_chk->add_option("--hess-bound", hess_bound, "Bound on the test Hessian norm")->required();
  cone_chk->add_option("--probe-radius", probe_radius, "Probe neighbourhood radius in cells");
  cone_chk->callback([&] {
    action = [&] {
      const GridFunction u = io::read_grid(input);
      const Vector x = parse_vector(x_text);
      const auto q = u.cell_of(x);
      if (!q) throw DomainError("upper-conical: point is outside the grid");
      UpperConicalOptions o;
      o.probe_radius = probe_radius;
      const UpperConicalResult r = upper_conical_check(u, *q, eps, hess_bound, o);
      json j{{"result", r.test_found ? "test_found" : "no_test_function"},
             {"q", vector_json(u.coord(*q))},
             {"eps", eps},
             {"hess_bound", hess_bound},
             {"within_bound", true},
             {"probes", r.probes},
             {"optimum", number(r.optimum)}};
      if (r.witness)
        j["witness"] = {{"r", number(r.witness->r)}, {"grad", vector_json(r.witness->grad)}, {"hess", matrix_json(r.witness->hess)}};
      emit.json_to_output(j);
      return 0;
    };
  });

  // solve --------------------------------------------------------------------------
  auto* solve_cmd = app.add_subcommand("solve", "Wide-stencil Dirichlet solve from a problem JSON");
  std::string config_path, history_path;
  solve_cmd->add_option("--config", config_path, "Problem JSON")->required();
  solve_cmd->add_option("--history", history_path, "Convergence history CSV");
  solve_cmd->add_option("--tol", tol, "Override the residual tolerance");
  solve_cmd->callback([&] {
    action = [&] {
      const json j = json::parse(io::read_file(config_path));
      ProblemConfig pc = parse_problem(j, fs::path(config_path).parent_path());
      if (solve_cmd->count("--tol") > 0) pc.solve.tol = tol;
      pc.solve.workers = std::max(pc.solve.workers, common.workers);
      const SolveReport r = solve(pc.problem, pc.stencil, pc.solve);
      if (!common.output.empty()) io::write_grid(common.output, r.solution);
      if (!history_path.empty()) write_history_csv(history_path, r);
      json rep = solve_json(r, pc.problem.op);
      rep["shape"] = pc.problem.data.dims();
      rep["h"] = pc.problem.data.h();
      rep["tol"] = pc.solve.tol;
      emit.json_to_report(rep);
      return r.converged ? 0 : 1;
    };
  });

  // experiment ---------------------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("experiment", "Removability or convergence experiment from a config JSON");
  exp_cmd->add_option("--config", config_path, "Experiment JSON")->required();
  exp_cmd->callback([&] {
    action = [&] {
      const json j = json::parse(io::read_file(config_path));
      const fs::path dir = common.output.empty() ? fs::path(".") : fs::path(common.output);
      const ExperimentOutcome o =
          run_experiment(j, fs::path(config_path).parent_path(), dir, common.seed, common.workers);
      out << o.report.dump(2) << '\n';
      return o.pass ? 0 : 1;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  auto fail_json = [&](const char* kind, const std::exception& e, int code) {
    out << json{{"error", kind}, {"message", e.what()}, {"seed", common.seed}}.dump(2) << '\n';
    err << "conecalc: " << e.what() << '\n';
    return code;
  };
  try {
    return action();
  } catch (const UnsupportedPolarError& e) {
    return fail_json("unsupported_polar", e, 1);
  } catch (const ParseError& e) {
    return fail_json("parse", e, 2);
  } catch (const ConfigError& e) {
    return fail_json("config", e, 2);
  } catch (const json::exception& e) {
    return fail_json("config", e, 2);
  } catch (const DomainError& e) {
    return fail_json("domain", e, 2);
  } catch (const ConsistencyError& e) {
    return fail_json("consistency", e, 1);
  } catch (const SamplingError& e) {
    return fail_json("sampling", e, 1);
  } catch (const ConvergenceError& e) {
    return fail_json("convergence", e, 1);
  } catch (const DiscretizationError& e) {
    return fail_json("discretization", e, 1);
  } catch (const StencilError& e) {
    return fail_json("stencil", e, 1);
  } catch (const PoleError& e) {
    return fail_json("pole", e, 1);
  } catch (const ResourceError& e) {
    return fail_json("resource", e, 1);
  } catch (const std::exception& e) {
    return fail_json("io", e, 2);
  }
}

}  // namespace conecalc::app
