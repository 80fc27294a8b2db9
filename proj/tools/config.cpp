#include "config.hpp"

#include <cmath>
#include <fstream>

#include "conecalc/errors.hpp"
#include "conecalc/io.hpp"
#include "conecalc/riesz.hpp"

namespace conecalc::app {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError("config: " + what); }

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

Vector vec(const json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of numbers");
  Vector v;
  for (const auto& x : j) {
    if (!x.is_number()) bad(std::string(what) + " must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<Vector> points(const json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of points");
  std::vector<Vector> out;
  for (const auto& p : j) out.push_back(vec(p, what));
  return out;
}

struct Geometry {
  std::vector<int> shape;
  Vector origin;
  double h = 0.0;
};

Geometry geometry(const json& g, std::optional<std::vector<int>> shape_override) {
  Geometry geo;
  if (shape_override) {
    geo.shape = *shape_override;
  } else {
    for (const auto& d : need(g, "shape")) {
      if (!d.is_number_integer()) bad("grid.shape must hold integers");
      geo.shape.push_back(d.get<int>());
    }
  }
  const std::size_t n = geo.shape.size();
  if (n == 0) bad("grid.shape is empty");
  if (g.contains("lower")) {
    const Vector lo = vec(g.at("lower"), "grid.lower");
    const Vector hi = vec(need(g, "upper"), "grid.upper");
    if (lo.size() != n || hi.size() != n) bad("grid.lower/upper must match grid.shape");
    geo.origin = lo;
    for (std::size_t a = 0; a < n; ++a) {
      if (geo.shape[a] < 2) bad("grid.shape entries must be >= 2");
      const double h = (hi[a] - lo[a]) / (geo.shape[a] - 1);
      if (a == 0) geo.h = h;
      if (std::abs(h - geo.h) > 1e-12 * std::abs(geo.h)) bad("grid spacing must be equal along every axis");
    }
  } else {
    geo.origin = vec(need(g, "origin"), "grid.origin");
    geo.h = need(g, "h").get<double>();
    if (geo.origin.size() != n) bad("grid.origin must match grid.shape");
  }
  if (!(geo.h > 0.0)) bad("grid spacing must be positive");
  return geo;
}

}  // namespace

json number(double v) {
  if (std::isfinite(v)) return v;
  return io::format_double(v);
}

json vector_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json matrix_json(const SymMatrix& a) {
  json m = json::array();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.dim(); ++j) row.push_back(number(a(i, j)));
    m.push_back(row);
  }
  return m;
}

PointFunction point_function(const json& spec, int n, const fs::path& base) {
  const std::string type = need(spec, "type").get<std::string>();
  const auto dim = static_cast<std::size_t>(n);
  if (type == "quadratic") {
    SymMatrix a(dim);
    if (spec.contains("A")) {
      const auto rows = points(spec.at("A"), "A");
      if (rows.size() != dim) bad("quadratic.A must be n x n");
      Vector flat;
      for (const auto& r : rows) {
        if (r.size() != dim) bad("quadratic.A must be n x n");
        flat.insert(flat.end(), r.begin(), r.end());
      }
      a = SymMatrix(dim, flat);
    }
    const Vector b = spec.contains("b") ? vec(spec.at("b"), "quadratic.b") : Vector(dim, 0.0);
    if (b.size() != dim) bad("quadratic.b must have length n");
    const double c = spec.value("c", 0.0);
    return [a, b, c](std::span<const double> x) { return 0.5 * a.quadratic_form(x) + dot(b, x) + c; };
  }
  if (type == "riesz") {
    const RieszKernelSpec k(need(spec, "p").get<double>(), n);
    const Vector center = spec.contains("center") ? vec(spec.at("center"), "riesz.center") : Vector(dim, 0.0);
    if (center.size() != dim) bad("riesz.center must have length n");
    const double scale = spec.value("scale", 1.0);
    return [k, center, scale](std::span<const double> x) {
      Vector d(x.begin(), x.end());
      for (std::size_t a = 0; a < d.size(); ++a) d[a] -= center[a];
      return scale * kernel_value(k, d);
    };
  }
  if (type == "max_affine" || type == "min_affine") {
    std::vector<std::pair<Vector, double>> pieces;
    for (const auto& p : need(spec, "pieces")) {
      Vector a = vec(need(p, "a"), "piece.a");
      if (a.size() != dim) bad("affine piece gradient must have length n");
      pieces.emplace_back(std::move(a), p.value("c", 0.0));
    }
    if (pieces.empty()) bad("affine data needs at least one piece");
    const bool is_max = type == "max_affine";
    return [pieces, is_max](std::span<const double> x) {
      double best = is_max ? kMinusInfinity : std::numeric_limits<double>::infinity();
      for (const auto& [a, c] : pieces) best = is_max ? std::max(best, dot(a, x) + c) : std::min(best, dot(a, x) + c);
      return best;
    };
  }
  if (type == "file") {
    fs::path p = need(spec, "path").get<std::string>();
    if (p.is_relative()) p = base / p;
    auto g = std::make_shared<GridFunction>(io::read_grid(p.string()));
    if (g->n() != dim) bad("boundary grid file has the wrong dimension");
    return [g](std::span<const double> x) {
      const auto c = g->cell_of(x);
      if (!c) throw DomainError("boundary grid file does not cover the problem grid");
      return (*g)[*c];
    };
  }
  bad("unknown data type '" + type + "'");
}

namespace {

ProblemConfig build(const json& j, const fs::path& base, std::optional<std::vector<int>> shape) {
  const std::string op_name = need(j, "operator").get<std::string>();
  const Geometry geo = geometry(need(j, "grid"), std::move(shape));
  const int n = static_cast<int>(geo.shape.size());
  Operator op;
  if (op_name == "pp") {
    op = Operator::pp_op(need(j, "p").get<double>());
  } else if (op_name == "branch") {
    op = Operator::branch_op(need(j, "k").get<int>());
  } else {
    bad("operator must be 'pp' or 'branch'");
  }
  std::optional<std::pair<Vector, Vector>> hole;
  if (j.contains("hole")) {
    const auto& h = j.at("hole");
    hole = std::make_pair(vec(need(h, "lower"), "hole.lower"), vec(need(h, "upper"), "hole.upper"));
  }
  std::vector<Vector> punct;
  if (j.contains("puncture")) punct = points(j.at("puncture"), "puncture");

  ProblemConfig cfg{DirichletProblem{}, StencilSet::make(n, j.value("stencil_radius", 0)), SolveOptions{},
                    point_function(need(j, "boundary"), n, base)};
  cfg.problem = make_problem(geo.shape, geo.origin, geo.h, op, cfg.boundary, hole, punct);
  cfg.solve.tol = j.value("tol", cfg.solve.tol);
  cfg.solve.max_iter = j.value("max_iter", cfg.solve.max_iter);
  cfg.solve.workers = j.value("workers", 1u);
  const std::string method = j.value("method", std::string("policy"));
  if (method == "policy")
    cfg.solve.method = SolveMethod::policy;
  else if (method == "jacobi")
    cfg.solve.method = SolveMethod::jacobi;
  else
    bad("method must be 'policy' or 'jacobi'");
  return cfg;
}

}  // namespace

ProblemConfig parse_problem(const json& j, const fs::path& base) { return build(j, base, std::nullopt); }

ProblemConfig parse_problem_with_shape(const json& j, const fs::path& base, std::vector<int> shape) {
  return build(j, base, std::move(shape));
}

json verify_json(const VerifyReport& r, std::size_t max_violations) {
  json v = json::array();
  for (std::size_t i = 0; i < r.violations.size() && i < max_violations; ++i) {
    const auto& x = r.violations[i];
    v.push_back({{"index", x.index}, {"x", vector_json(x.x)}, {"margin", number(x.margin)}, {"c_tol", number(x.c_tol)}});
  }
  return {{"pass", r.pass},
          {"probed", r.probed},
          {"violation_count", r.violations.size()},
          {"violations", v},
          {"worst_margin", number(r.worst_margin)},
          {"max_c_tol", number(r.max_c_tol)},
          {"banner", r.banner}};
}

json solve_json(const SolveReport& r, const Operator& op) {
  return {{"operator", op.describe()},
          {"method", r.method},
          {"unknowns", r.unknowns},
          {"iterations", r.iterations},
          {"residual_sup", number(r.residual_sup)},
          {"converged", r.converged}};
}

void write_history_csv(const fs::path& path, const SolveReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "iteration,residual_sup\n";
  for (const auto& [it, res] : r.history) out << it << ',' << io::format_double(res) << '\n';
}

namespace {

ExperimentOutcome removability(const json& cfg, const fs::path& base, const fs::path& out, std::uint64_t seed,
                               unsigned workers) {
  ProblemConfig pc = parse_problem(need(cfg, "problem"), base);
  if (!pc.problem.puncture.empty()) bad("removability: put the singular set in 'E', not in problem.puncture");
  const std::vector<Vector> e = points(need(cfg, "E"), "E");
  RemovabilityOptions opts;
  if (cfg.contains("eps")) opts.eps = vec(cfg.at("eps"), "eps");
  opts.constant = cfg.value("constant", opts.constant);
  if (cfg.contains("polar_p")) opts.polar_p = cfg.at("polar_p").get<double>();
  opts.certification.seed = seed;
  opts.certification.workers = workers;
  opts.certification.count = cfg.value("certification_samples", opts.certification.count);
  opts.solve = pc.solve;
  if (cfg.contains("min_radius")) opts.extension.min_radius = cfg.at("min_radius").get<double>();

  const RemovabilityReport r = removability_experiment(pc.problem, e, pc.stencil, opts);
  json rep{{"kind", "removability"},
           {"seed", seed},
           {"operator", pc.problem.op.describe()},
           {"h", pc.problem.data.h()},
           {"polar_p", r.polar_p},
           {"puncture_nodes", r.puncture_nodes}};
  if (r.certification) {
    rep["certification"] = {{"pass", r.certification->pass},
                            {"samples", r.certification->samples},
                            {"against", "pp:" + io::format_double(r.polar_p)}};
    if (!r.certification->pass) {
      rep["pass"] = false;
      rep["reason"] = "operator cone is not certified P_p-monotone for the polar exponent";
      return {rep, false};
    }
  }
  rep["full"] = solve_json(r.full, pc.problem.op);
  rep["punctured"] = solve_json(r.punctured, pc.problem.op);
  rep["extension"] = {{"changed_points", r.extension.changed_points},
                      {"sup_change", number(r.extension.sup_change)},
                      {"interior_points", r.extension.interior_points}};
  rep["sup_gap"] = number(r.sup_gap);
  rep["sup_gap_off_e"] = number(r.sup_gap_off_e);
  rep["threshold"] = number(r.threshold);
  json pert = json::array();
  for (const auto& p : r.perturbations) {
    json v = verify_json(p.report, 20);
    v["eps"] = p.eps;
    pert.push_back(v);
  }
  rep["perturbations"] = pert;
  rep["perturbation_pass"] = r.perturbation_pass;
  bool pass = r.pass;
  if (cfg.contains("max_gap")) {
    const double g = cfg.at("max_gap").get<double>();
    rep["max_gap"] = g;
    pass = pass && r.sup_gap <= g;
  }
  rep["pass"] = pass;

  io::write_grid((out / "full.grid").string(), r.full.solution);
  io::write_grid((out / "punctured.grid").string(), r.punctured.solution);
  io::write_grid((out / "extended.grid").string(), r.extension.extended);
  write_history_csv(out / "history_full.csv", r.full);
  write_history_csv(out / "history_punctured.csv", r.punctured);
  return {rep, pass};
}

ExperimentOutcome convergence(const json& cfg, const fs::path& base, const fs::path& out, std::uint64_t seed) {
  const json& pj = need(cfg, "problem");
  std::vector<int> sizes;
  for (const auto& s : need(cfg, "sizes")) sizes.push_back(s.get<int>());
  if (sizes.size() < 2) bad("convergence: need at least two sizes");
  const int n = static_cast<int>(need(need(pj, "grid"), "lower").size());
  const PointFunction exact = point_function(cfg.contains("exact") ? cfg.at("exact") : need(pj, "boundary"), n, base);

  std::ofstream csv(out / "errors.csv");
  if (!csv) throw std::runtime_error("cannot write errors.csv");
  csv << "size,h,sup_abs_error,sup_rel_error,max_pointwise_rel_error,iterations,residual_sup,converged\n";
  json rows = json::array();
  std::vector<double> errs;
  bool all_converged = true;
  for (int size : sizes) {
    ProblemConfig pc = parse_problem_with_shape(pj, base, std::vector<int>(static_cast<std::size_t>(n), size));
    const SolveReport r = solve(pc.problem, pc.stencil, pc.solve);
    double abs_err = 0.0, sup_exact = 0.0, pointwise = 0.0;
    for (std::size_t i = 0; i < r.solution.size(); ++i) {
      if (pc.problem.is_fixed(i) || pc.problem.is_puncture(i)) continue;
      const double ex = exact(r.solution.coord(i));
      const double d = std::abs(r.solution[i] - ex);
      abs_err = std::max(abs_err, d);
      sup_exact = std::max(sup_exact, std::abs(ex));
      if (ex != 0.0) pointwise = std::max(pointwise, d / std::abs(ex));
    }
    const double rel = sup_exact > 0.0 ? abs_err / sup_exact : abs_err;
    errs.push_back(rel);
    all_converged = all_converged && r.converged;
    csv << size << ',' << io::format_double(pc.problem.data.h()) << ',' << io::format_double(abs_err) << ','
        << io::format_double(rel) << ',' << io::format_double(pointwise) << ',' << r.iterations << ','
        << io::format_double(r.residual_sup) << ',' << (r.converged ? 1 : 0) << '\n';
    rows.push_back({{"size", size},
                    {"h", pc.problem.data.h()},
                    {"sup_abs_error", number(abs_err)},
                    {"sup_rel_error", number(rel)},
                    {"max_pointwise_rel_error", number(pointwise)},
                    {"iterations", r.iterations},
                    {"converged", r.converged}});
    if (size == sizes.back()) io::write_grid((out / "solution.grid").string(), r.solution);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < errs.size(); ++i) monotone = monotone && errs[i] < errs[i - 1];
  bool pass = monotone && all_converged;
  json rep{{"kind", "convergence"}, {"seed", seed}, {"rows", rows}, {"monotone_decreasing", monotone}};
  if (cfg.contains("max_rel_error")) {
    const double lim = cfg.at("max_rel_error").get<double>();
    rep["max_rel_error"] = lim;
    pass = pass && errs.back() <= lim;
  }
  rep["pass"] = pass;
  return {rep, pass};
}

}  // namespace

ExperimentOutcome run_experiment(const json& cfg, const fs::path& base, const fs::path& out_dir, std::uint64_t seed,
                                 unsigned workers) {
  fs::create_directories(out_dir);
  const std::string kind = need(cfg, "kind").get<std::string>();
  ExperimentOutcome o;
  if (kind == "removability")
    o = removability(cfg, base, out_dir, seed, workers);
  else if (kind == "convergence")
    o = convergence(cfg, base, out_dir, seed);
  else
    bad("experiment kind must be 'removability' or 'convergence'");
  std::ofstream rep(out_dir / "report.json");
  rep << o.report.dump(2) << '\n';
  return o;
}

}  // namespace conecalc::app
