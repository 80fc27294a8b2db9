#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "conecalc/symmat.hpp"

namespace conecalc {

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

using Index = std::vector<int>;

/// Extended-real samples on a uniform rectangular lattice, row-major with the
/// last axis fastest, plus an optional singular-set mask.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<int> dims, Vector origin, double h, double fill = 0.0);

  /// Samples f at every node.
  static GridFunction sample(std::vector<int> dims, Vector origin, double h,
                             const std::function<double(std::span<const double>)>& f);

  std::size_t n() const noexcept { return dims_.size(); }
  const std::vector<int>& dims() const noexcept { return dims_; }
  const Vector& origin() const noexcept { return origin_; }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool has_mask() const noexcept { return !mask_.empty(); }
  bool masked(std::size_t i) const { return !mask_.empty() && mask_[i] != 0; }
  void set_masked(std::size_t i, bool on);
  void clear_mask() { mask_.clear(); }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  std::size_t masked_count() const;

  std::size_t linear(std::span<const int> idx) const;
  Index multi(std::size_t i) const;
  Vector coord(std::size_t i) const;
  /// Node at idx + offset, or nullopt when outside the lattice.
  std::optional<std::size_t> shifted(std::size_t i, std::span<const int> offset) const;
  /// Chebyshev distance (in cells) from node i to the lattice boundary.
  int boundary_distance(std::size_t i) const;
  /// Node whose cell [x - h/2, x + h/2)^n contains the point, or nullopt.
  std::optional<std::size_t> cell_of(std::span<const double> x) const;

  bool same_geometry(const GridFunction& o) const;

 private:
  std::vector<int> dims_;
  Vector origin_;
  double h_ = 1.0;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> strides_;
};

}  // namespace conecalc
