#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "conecalc/solver.hpp"
#include "json.hpp"

namespace conecalc::app {

using nlohmann::json;

/// Malformed experiment or problem configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  DirichletProblem problem;
  StencilSet stencil;
  SolveOptions solve;
  PointFunction boundary;
};

/// Boundary/exact-data descriptors: quadratic {A, b, c} meaning x^T A x / 2 + b.x + c,
/// riesz {p, center, scale}, max_affine {pieces: [{a, c}]}, file {path}.
PointFunction point_function(const json& spec, int n, const std::filesystem::path& base);

/// Problem JSON: {operator, p | k, grid {shape, origin, h} or {shape, lower, upper},
/// boundary, hole {lower, upper}, puncture [[...]], stencil_radius, tol, max_iter,
/// method, workers}. Throws ConfigError on malformed input.
ProblemConfig parse_problem(const json& j, const std::filesystem::path& base);

/// Same, with the grid shape replaced (convergence studies).
ProblemConfig parse_problem_with_shape(const json& j, const std::filesystem::path& base, std::vector<int> shape);

struct ExperimentOutcome {
  json report;
  bool pass = false;
};

/// Runs a removability or convergence experiment, writing grids, CSVs and
/// report.json into out_dir.
ExperimentOutcome run_experiment(const json& cfg, const std::filesystem::path& base,
                                 const std::filesystem::path& out_dir, std::uint64_t seed, unsigned workers);

json verify_json(const VerifyReport& r, std::size_t max_violations = 100);
json solve_json(const SolveReport& r, const Operator& op);
void write_history_csv(const std::filesystem::path& path, const SolveReport& r);
/// Finite numbers as numbers; -inf, inf and nan as strings.
json number(double v);
json vector_json(std::span<const double> v);
json matrix_json(const SymMatrix& a);

}  // namespace conecalc::app
