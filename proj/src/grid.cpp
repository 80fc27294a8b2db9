#include "conecalc/grid.hpp"

#include <algorithm>
#include <cmath>

#include "conecalc/errors.hpp"

namespace conecalc {

GridFunction::GridFunction(std::vector<int> dims, Vector origin, double h, double fill)
    : dims_(std::move(dims)), origin_(std::move(origin)), h_(h) {
  if (dims_.empty()) throw DomainError("GridFunction: need at least one axis");
  if (origin_.size() != dims_.size()) throw DomainError("GridFunction: origin/shape dimension mismatch");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw DomainError("GridFunction: spacing must be positive");
  std::size_t total = 1;
  strides_.assign(dims_.size(), 1);
  for (std::size_t a = dims_.size(); a-- > 0;) {
    if (dims_[a] < 1) throw DomainError("GridFunction: every axis needs >= 1 node");
    strides_[a] = total;
    total *= static_cast<std::size_t>(dims_[a]);
  }
  values_.assign(total, fill);
}

GridFunction GridFunction::sample(std::vector<int> dims, Vector origin, double h,
                                  const std::function<double(std::span<const double>)>& f) {
  GridFunction g(std::move(dims), std::move(origin), h);
  for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = f(g.coord(i));
  return g;
}

void GridFunction::set_masked(std::size_t i, bool on) {
  if (mask_.empty()) {
    if (!on) return;
    mask_.assign(values_.size(), 0);
  }
  mask_[i] = on ? 1 : 0;
}

std::size_t GridFunction::masked_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::size_t GridFunction::linear(std::span<const int> idx) const {
  std::size_t i = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) i += static_cast<std::size_t>(idx[a]) * strides_[a];
  return i;
}

Index GridFunction::multi(std::size_t i) const {
  Index idx(dims_.size());
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    idx[a] = static_cast<int>(i / strides_[a]);
    i %= strides_[a];
  }
  return idx;
}

Vector GridFunction::coord(std::size_t i) const {
  const Index idx = multi(i);
  Vector x(dims_.size());
  for (std::size_t a = 0; a < dims_.size(); ++a) x[a] = origin_[a] + h_ * idx[a];
  return x;
}

std::optional<std::size_t> GridFunction::shifted(std::size_t i, std::span<const int> offset) const {
  std::size_t out = i;
  std::size_t rest = i;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    const int coord = static_cast<int>(rest / strides_[a]);
    rest %= strides_[a];
    const int moved = coord + offset[a];
    if (moved < 0 || moved >= dims_[a]) return std::nullopt;
    out = out + static_cast<std::size_t>(static_cast<long long>(offset[a]) *
                                         static_cast<long long>(strides_[a]));
  }
  return out;
}

int GridFunction::boundary_distance(std::size_t i) const {
  const Index idx = multi(i);
  int d = std::numeric_limits<int>::max();
  for (std::size_t a = 0; a < dims_.size(); ++a) d = std::min({d, idx[a], dims_[a] - 1 - idx[a]});
  return d;
}

std::optional<std::size_t> GridFunction::cell_of(std::span<const double> x) const {
  if (x.size() != dims_.size()) throw DomainError("cell_of: point dimension mismatch");
  Index idx(dims_.size());
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    const double t = (x[a] - origin_[a]) / h_;
    const int k = static_cast<int>(std::floor(t + 0.5));
    if (k < 0 || k >= dims_[a]) return std::nullopt;
    idx[a] = k;
  }
  return linear(idx);
}

bool GridFunction::same_geometry(const GridFunction& o) const {
  return dims_ == o.dims_ && origin_ == o.origin_ && h_ == o.h_;
}

}  // namespace conecalc
