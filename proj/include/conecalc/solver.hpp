#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conecalc/cones.hpp"
#include "conecalc/grid.hpp"
#include "conecalc/viscosity.hpp"

namespace conecalc {

/// Lattice directions for a wide-stencil scheme plus ordered orthogonal frames.
/// In 2-D every direction v appears in the frames (v, v_perp) and (v_perp, v);
/// in 3-D frames are exact orthogonal lattice triples in every order.
class StencilSet {
 public:
  /// Coprime directions with max-norm <= radius, one per line. Default radius
  /// is 3 in 2-D (16 directions) and 2 in 3-D.
  static StencilSet make(int n, int radius = 0);

  int dim() const noexcept { return n_; }
  int radius() const noexcept { return radius_; }
  const std::vector<Index>& directions() const noexcept { return dirs_; }
  const std::vector<double>& lengths() const noexcept { return len_; }
  /// Ordered frames as direction indices; the first frame is the coordinate axes.
  const std::vector<std::vector<int>>& frames() const noexcept { return frames_; }
  /// Unordered orthogonal pairs (2-D view of the frame list).
  std::vector<std::pair<int, int>> ortho_pairs() const;

 private:
  int n_ = 0;
  int radius_ = 0;
  std::vector<Index> dirs_;
  std::vector<double> len_;
  std::vector<std::vector<int>> frames_;
};

/// pp(p): lambda_1 + ... + (p - [p]) lambda_{[p]+1} = 0; branch(k): lambda_k = 0.
struct Operator {
  enum class Kind { pp, branch };
  Kind kind = Kind::pp;
  double p = 2.0;
  int k = 1;

  static Operator pp_op(double p) { return {Kind::pp, p, 1}; }
  static Operator branch_op(int k) { return {Kind::branch, 0.0, k}; }
  /// The subequation whose harmonics the operator describes.
  ConeSpec cone(int n) const;
  std::string describe() const;
};

/// Frame weights clamp(p - i, 0, 1), i = 0..n-1.
std::vector<double> pp_weights(double p, int n);

/// Dirichlet problem on a rectangular grid. Values of `data` on the outer
/// boundary and on `hole` nodes are boundary data; interior values are the
/// initial guess. Punctured nodes are neither unknowns nor stencil points.
struct DirichletProblem {
  GridFunction data;
  Operator op;
  std::vector<std::uint8_t> hole;
  std::vector<std::uint8_t> puncture;

  bool is_hole(std::size_t i) const { return !hole.empty() && hole[i] != 0; }
  bool is_puncture(std::size_t i) const { return !puncture.empty() && puncture[i] != 0; }
  bool is_fixed(std::size_t i) const { return data.boundary_distance(i) == 0 || is_hole(i); }
};

using PointFunction = std::function<double(std::span<const double>)>;

/// Samples g on boundary and hole nodes and starts the interior at 0; `hole` is an
/// optional axis-aligned box [lower, upper] of extra Dirichlet nodes, `puncture` a
/// list of points whose cells are removed.
DirichletProblem make_problem(std::vector<int> dims, Vector origin, double h, Operator op,
                              const PointFunction& g,
                              std::optional<std::pair<Vector, Vector>> hole = std::nullopt,
                              const std::vector<Vector>& puncture = {});

enum class SolveMethod { policy, jacobi };

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;
  SolveMethod method = SolveMethod::policy;
  unsigned workers = 1;
  /// Record (iteration, residual_sup) every this many Jacobi sweeps.
  int history_stride = 1;
};

struct SolveReport {
  GridFunction solution;
  double residual_sup = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string method;
  std::vector<std::pair<int, double>> history;
  std::size_t unknowns = 0;
  double seconds = 0.0;
};

/// Scheme value at node i, using u's mask as the puncture set. Throws
/// StencilError on boundary nodes and DiscretizationError when no frame fits.
double residual(const GridFunction& u, std::size_t i, const Operator& op, const StencilSet& st);

/// Monotone fixed point of the wide-stencil scheme. `policy` runs Howard
/// iterations with a sparse direct solve per policy; `jacobi` runs damped
/// sweeps u += tau * residual with tau = h^2 / (2 * sum of weights).
/// The solution is masked (and -inf) on punctured nodes.
SolveReport solve(const DirichletProblem& prob, const StencilSet& st, const SolveOptions& opts = {});

struct HarmonicReport {
  VerifyReport sub;
  VerifyReport dual;
  bool harmonic = false;
};

/// u in F and -u in the dual of F, each at grid scale.
HarmonicReport harmonic_verify(const GridFunction& u, const ConeSpec& c,
                               std::optional<double> c_tol = std::nullopt);

struct RemovabilityOptions {
  std::vector<double> eps = {1e-2, 1e-3};
  double constant = 5.0;
  /// Polar exponent; defaults to p for pp operators and is required for branches.
  std::optional<double> polar_p;
  SampleConfig certification{0, 2000, 1.0, 1};
  SolveOptions solve;
  ExtensionOptions extension;
};

struct PerturbationCheck {
  double eps = 0.0;
  VerifyReport report;
};

struct RemovabilityReport {
  SolveReport full;
  SolveReport punctured;
  ExtensionReport extension;
  double sup_gap = 0.0;
  /// Gap on nodes outside E only.
  double sup_gap_off_e = 0.0;
  double threshold = 0.0;
  std::size_t puncture_nodes = 0;
  double polar_p = 0.0;
  std::optional<RelationResult> certification;
  std::vector<PerturbationCheck> perturbations;
  bool perturbation_pass = false;
  bool pass = false;
};

/// Full solve, punctured solve, canonical extension across E and the u + eps psi
/// check with psi the Riesz polar function of E. Passes iff the sup gap is at
/// most constant * (h + tol) and every perturbation verifies.
RemovabilityReport removability_experiment(const DirichletProblem& prob, const std::vector<Vector>& e,
                                           const StencilSet& st, const RemovabilityOptions& opts = {});

}  // namespace conecalc
