#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conecalc/grid.hpp"
#include "conecalc/symmat.hpp"

namespace conecalc {

/// K_p(x) = |x|^{2-p} (p < 2), log|x| (p = 2), -|x|^{2-p} (p > 2) on R^n.
/// D^2 K_p = c_p |x|^{-p} (I - p P_{x/|x|}) with c_p = |p - 2|, c_2 = 1.
class RieszKernelSpec {
 public:
  RieszKernelSpec(double p, int n);

  double p() const noexcept { return p_; }
  int n() const noexcept { return n_; }
  double c_p() const noexcept { return c_; }

 private:
  double p_;
  int n_;
  double c_;
};

/// Jets closer than this to a pole are treated as at the pole.
inline constexpr double kPoleGuard = 1e-12;

/// K_p(x); -inf at the origin for p >= 2 and 0 for p < 2.
double kernel_value(const RieszKernelSpec& spec, std::span<const double> x);
/// Throws PoleError at the origin.
Jet2 kernel_jet(const RieszKernelSpec& spec, std::span<const double> x);

struct Atom {
  Vector point;
  double weight = 1.0;
};

class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(std::vector<Atom> atoms);
  static DiscreteMeasure uniform(const std::vector<Vector>& points);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t dim() const noexcept { return atoms_.front().point.size(); }
  /// Index of an atom within kPoleGuard of x.
  std::optional<std::size_t> atom_at(std::span<const double> x) const;

 private:
  std::vector<Atom> atoms_;
};

/// Points with a trailing weight column.
DiscreteMeasure parse_measure_csv(std::string_view text);

/// (K_p * mu)(x). Sums use a fixed pairwise tree, so results do not depend on
/// how the atom list is partitioned.
double potential_value(const RieszKernelSpec& spec, const DiscreteMeasure& mu,
                       std::span<const double> x);
/// nullopt stands for -inf (x on an atom, p >= 2). Throws PoleError on an
/// atom when p < 2: the value is finite but no jet exists.
std::optional<Jet2> potential_jet(const RieszKernelSpec& spec, const DiscreteMeasure& mu,
                                  std::span<const double> x);
/// Potential of the truncated kernel max(K_p, -alpha).
double truncated_potential(const RieszKernelSpec& spec, const DiscreteMeasure& mu,
                           std::span<const double> x, double alpha);

/// psi = K_p * mu with p >= 2: -inf exactly on the atoms, smooth elsewhere.
class PolarFunction {
 public:
  PolarFunction(RieszKernelSpec spec, DiscreteMeasure mu);

  const RieszKernelSpec& spec() const noexcept { return spec_; }
  const DiscreteMeasure& measure() const noexcept { return mu_; }
  double value(std::span<const double> x) const;
  std::optional<Jet2> jet(std::span<const double> x) const;
  /// Samples psi on the lattice of `like`. Cells containing an atom get -inf
  /// and are masked; everything else is evaluated at the node.
  GridFunction sample(const GridFunction& like) const;

 private:
  RieszKernelSpec spec_;
  DiscreteMeasure mu_;
};

/// Uniform-weight polar function on the points; p < 2 throws UnsupportedPolarError.
PolarFunction build_polar(const std::vector<Vector>& points, double p);

struct BoxDimensionReport {
  double dimension = 0.0;
  std::vector<double> scales;
  std::vector<std::size_t> counts;
};

/// Least-squares slope of log N(s) against log(1/s). Advisory only: finite
/// samples say nothing rigorous about Hausdorff measure.
BoxDimensionReport box_dimension(const std::vector<Vector>& points, std::vector<double> scales);
/// Dyadic scales from the bounding-box diameter down to where counts saturate.
std::vector<double> default_box_scales(const std::vector<Vector>& points);

}  // namespace conecalc
