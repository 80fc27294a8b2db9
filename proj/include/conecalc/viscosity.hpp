#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conecalc/cones.hpp"
#include "conecalc/grid.hpp"
#include "conecalc/symmat.hpp"

namespace conecalc {

struct ExtensionOptions {
  /// Chebyshev shells searched before a masked node counts as interior to E.
  int radius_cap = 5;
  /// When > 0, the sup runs over every unmasked node within this physical
  /// Chebyshev radius (at least the nearest shell). Lets a limsup be probed on
  /// a ball of fixed size while h shrinks.
  double min_radius = 0.0;
};

struct ExtensionReport {
  GridFunction extended;
  std::size_t changed_points = 0;
  /// Largest |U - u| over changed nodes; inf when a finite value became -inf or back.
  double sup_change = 0.0;
  /// Masked nodes with no unmasked node within the cap, set to -inf.
  std::size_t interior_points = 0;
};

/// Discrete U(x) = limsup_{y -> x, y not in E} u(y): on masked nodes, the sup of
/// u over the nearest non-empty Chebyshev shell of unmasked nodes. Unmasked
/// values pass through bit-for-bit and the mask is kept, so the operation is
/// idempotent.
ExtensionReport canonical_extension(const GridFunction& u, const ExtensionOptions& opts = {});

/// Value, central-difference gradient and Hessian at node i. Mixed terms use
/// the symmetric 4-point stencil. Throws StencilError when the 3^n block
/// around i leaves the grid, touches the mask or holds a non-finite value.
Jet2 discrete_hessian(const GridFunction& u, std::size_t i);

/// Nodes whose 3^n block is inside the grid, unmasked and finite.
std::vector<std::size_t> probe_region(const GridFunction& u);

/// max over axes of the centered third difference at node i (one-sided
/// four-point variant when one side is unavailable); 0 when neither fits.
double third_difference(const GridFunction& u, std::size_t i);

inline const char* const kVerifyBanner =
    "grid-scale check only: viscosity subharmonicity of non-smooth data is not decidable from samples";

struct Violation {
  std::size_t index = 0;
  Vector x;
  double margin = 0.0;
  double c_tol = 0.0;
};

struct VerifyReport {
  bool pass = true;
  std::size_t probed = 0;
  std::vector<Violation> violations;
  double worst_margin = 0.0;
  double max_c_tol = 0.0;
  std::string banner = kVerifyBanner;
};

/// Tests discrete_hessian(u, x) in Enlarged(C, c_tol(x)) at every probed node.
/// With no c_tol the tolerance is pointwise kappa(x) * h, kappa the
/// third-difference magnitude at x, plus a 1e-9 floor.
VerifyReport subharmonic_verify(const GridFunction& u, const ConeSpec& c,
                                std::optional<double> c_tol = std::nullopt);

/// u + eps * psi with -inf absorbing; the result carries the union of masks.
/// eps == 0 returns u itself.
GridFunction perturb(const GridFunction& u, const GridFunction& psi, double eps);

/// A point (no frame) or the affine plane q + span(tangent).
struct FlatSet {
  Vector q;
  std::optional<Frame> tangent;
};

/// (dist, unit normal from the foot point, (1/dist) * projector onto the
/// normal space of E orthogonal to that normal). Second fundamental form is 0.
Jet2 distance_jet(const FlatSet& e, std::span<const double> x);

struct UpperConicalOptions {
  /// Probe neighbourhood: all nodes within this Chebyshev radius (cells).
  int probe_radius = 1;
  double tol = 1e-12;
  std::size_t max_combinations = 2'000'000;
};

struct UpperConicalResult {
  bool test_found = false;
  std::optional<Jet2> witness;
  /// max_g min_j slack; >= -tol iff a test quadratic exists.
  double optimum = 0.0;
  std::size_t probes = 0;
  double hess_bound = 0.0;
};

/// Searches for phi(x) = U(q) + <g, x-q> + (1/2)(x-q)^T H (x-q), ||H|| <= bound,
/// with phi >= U + eps|x - q| on the probe neighbourhood. Since raising H to
/// bound*I only helps, this is an LP in g, solved exactly by vertex enumeration.
/// The answer is relative to the Hessian bound and the probe neighbourhood.
UpperConicalResult upper_conical_check(const GridFunction& u, std::size_t q, double eps,
                                       double hess_bound, const UpperConicalOptions& opts = {});

}  // namespace conecalc
