#include "conecalc/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "conecalc/errors.hpp"
#include "conecalc/io.hpp"

namespace conecalc {

RieszKernelSpec::RieszKernelSpec(double p, int n) : p_(p), n_(n) {
  if (n < 1) throw DomainError("riesz: dimension must be >= 1");
  if (!(p >= 1.0 && p <= n)) throw DomainError("riesz: need 1 <= p <= n, got p = " + io::format_double(p));
  c_ = (p == 2.0) ? 1.0 : std::abs(p - 2.0);
}

namespace {

void check_point(const RieszKernelSpec& s, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(s.n()))
    throw DomainError("riesz: point has dimension " + std::to_string(x.size()) + ", kernel has " +
                      std::to_string(s.n()));
}

double radial(double p, double r) {
  if (p < 2.0) return std::pow(r, 2.0 - p);
  if (p == 2.0) return std::log(r);
  return -std::pow(r, 2.0 - p);
}

// Pairwise sum over [lo, hi) so the reduction tree depends only on the count.
template <class T, class F>
T tree_sum(std::size_t lo, std::size_t hi, const F& term) {
  if (hi - lo == 1) return term(lo);
  const std::size_t mid = lo + (hi - lo) / 2;
  T a = tree_sum<T>(lo, mid, term);
  a += tree_sum<T>(mid, hi, term);
  return a;
}

struct JetSum {
  double r = 0.0;
  Vector g;
  SymMatrix h;
  JetSum& operator+=(const JetSum& o) {
    r += o.r;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.g[i];
    h += o.h;
    return *this;
  }
};

Vector minus(std::span<const double> x, const Vector& y) {
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return d;
}

}  // namespace

double kernel_value(const RieszKernelSpec& spec, std::span<const double> x) {
  check_point(spec, x);
  const double r = norm2(x);
  if (r < kPoleGuard) return spec.p() >= 2.0 ? kMinusInfinity : 0.0;
  return radial(spec.p(), r);
}

Jet2 kernel_jet(const RieszKernelSpec& spec, std::span<const double> x) {
  check_point(spec, x);
  const double r = norm2(x);
  if (r < kPoleGuard) throw PoleError("kernel_jet: x is at the pole of K_p");
  const double p = spec.p();
  const double s = spec.c_p() * std::pow(r, -p);
  const std::size_t n = x.size();
  Jet2 j;
  j.r = radial(p, r);
  j.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) j.grad[i] = s * x[i];
  j.hess = SymMatrix(n);
  const double r2 = r * r;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i; k < n; ++k)
      j.hess.set(i, k, s * ((i == k ? 1.0 : 0.0) - p * x[i] * x[k] / r2));
  return j;
}

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("measure: need at least one atom");
  const std::size_t n = atoms_.front().point.size();
  if (n == 0) throw DomainError("measure: atoms must have dimension >= 1");
  for (const auto& a : atoms_) {
    if (a.point.size() != n) throw DomainError("measure: atoms have unequal dimension");
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw DomainError("measure: weights must be finite and >= 0");
  }
}

DiscreteMeasure DiscreteMeasure::uniform(const std::vector<Vector>& points) {
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  for (const auto& p : points) atoms.push_back({p, 1.0});
  return DiscreteMeasure(std::move(atoms));
}

std::optional<std::size_t> DiscreteMeasure::atom_at(std::span<const double> x) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (norm2(minus(x, atoms_[i].point)) < kPoleGuard) return i;
  return std::nullopt;
}

DiscreteMeasure parse_measure_csv(std::string_view text) {
  const auto rows = io::parse_points_csv(text);
  if (rows.empty()) throw ParseError("measure CSV is empty", 0);
  if (rows.front().size() < 2) throw ParseError("measure CSV needs coordinates plus a weight column", 0);
  std::vector<Atom> atoms;
  for (const auto& r : rows) atoms.push_back({Vector(r.begin(), r.end() - 1), r.back()});
  return DiscreteMeasure(std::move(atoms));
}

double potential_value(const RieszKernelSpec& spec, const DiscreteMeasure& mu,
                       std::span<const double> x) {
  check_point(spec, x);
  if (mu.dim() != x.size()) throw DomainError("potential: measure and point dimensions differ");
  const auto& atoms = mu.atoms();
  return tree_sum<double>(0, atoms.size(), [&](std::size_t i) {
    const double w = atoms[i].weight;
    if (w == 0.0) return 0.0;
    return w * kernel_value(spec, minus(x, atoms[i].point));
  });
}

std::optional<Jet2> potential_jet(const RieszKernelSpec& spec, const DiscreteMeasure& mu,
                                  std::span<const double> x) {
  check_point(spec, x);
  if (mu.dim() != x.size()) throw DomainError("potential: measure and point dimensions differ");
  if (auto hit = mu.atom_at(x); hit && mu.atoms()[*hit].weight > 0.0) {
    if (spec.p() >= 2.0) return std::nullopt;
    throw PoleError("potential_jet: x is on an atom; the value is finite but K_p has no jet there");
  }
  const auto& atoms = mu.atoms();
  const std::size_t n = x.size();
  JetSum s = tree_sum<JetSum>(0, atoms.size(), [&](std::size_t i) {
    JetSum t{0.0, Vector(n, 0.0), SymMatrix(n)};
    const double w = atoms[i].weight;
    if (w == 0.0) return t;
    Jet2 k = kernel_jet(spec, minus(x, atoms[i].point));
    t.r = w * k.r;
    for (std::size_t a = 0; a < n; ++a) t.g[a] = w * k.grad[a];
    t.h = w * k.hess;
    return t;
  });
  return Jet2{s.r, std::move(s.g), std::move(s.h)};
}

double truncated_potential(const RieszKernelSpec& spec, const DiscreteMeasure& mu,
                           std::span<const double> x, double alpha) {
  check_point(spec, x);
  const auto& atoms = mu.atoms();
  return tree_sum<double>(0, atoms.size(), [&](std::size_t i) {
    const double k = kernel_value(spec, minus(x, atoms[i].point));
    return atoms[i].weight * std::max(k, -alpha);
  });
}

PolarFunction::PolarFunction(RieszKernelSpec spec, DiscreteMeasure mu)
    : spec_(spec), mu_(std::move(mu)) {
  if (spec_.p() < 2.0)
    throw UnsupportedPolarError("polar functions need p >= 2: for 1 <= p < 2 the kernel is finite "
                                "and 1-polar sets do not exist");
  if (mu_.dim() != static_cast<std::size_t>(spec_.n())) throw DomainError("polar: measure dimension mismatch");
  for (const auto& a : mu_.atoms())
    if (a.weight <= 0.0) throw DomainError("polar: every atom needs positive weight");
}

double PolarFunction::value(std::span<const double> x) const { return potential_value(spec_, mu_, x); }

std::optional<Jet2> PolarFunction::jet(std::span<const double> x) const {
  return potential_jet(spec_, mu_, x);
}

GridFunction PolarFunction::sample(const GridFunction& like) const {
  if (like.n() != static_cast<std::size_t>(spec_.n())) throw DomainError("polar sample: grid dimension mismatch");
  GridFunction g(like.dims(), like.origin(), like.h());
  std::vector<char> pole(g.size(), 0);
  for (const auto& a : mu_.atoms())
    if (auto c = g.cell_of(a.point)) pole[*c] = 1;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (pole[i]) {
      g[i] = kMinusInfinity;
      g.set_masked(i, true);
    } else {
      g[i] = value(g.coord(i));
    }
  }
  return g;
}

PolarFunction build_polar(const std::vector<Vector>& points, double p) {
  if (points.empty()) throw DomainError("build_polar: need at least one point");
  if (p < 2.0)
    throw UnsupportedPolarError("build_polar: p = " + io::format_double(p) +
                                " < 2; 1-polar sets do not exist and K_p is finite for p < 2");
  const int n = static_cast<int>(points.front().size());
  return PolarFunction(RieszKernelSpec(p, n), DiscreteMeasure::uniform(points));
}

namespace {

std::size_t count_boxes(const std::vector<Vector>& pts, double s) {
  std::set<std::vector<long long>> boxes;
  std::vector<long long> key(pts.front().size());
  for (const auto& x : pts) {
    for (std::size_t a = 0; a < x.size(); ++a) key[a] = static_cast<long long>(std::floor(x[a] / s));
    boxes.insert(key);
  }
  return boxes.size();
}

double diameter_bound(const std::vector<Vector>& pts) {
  const std::size_t n = pts.front().size();
  double d = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double lo = pts.front()[a], hi = lo;
    for (const auto& x : pts) {
      lo = std::min(lo, x[a]);
      hi = std::max(hi, x[a]);
    }
    d = std::max(d, hi - lo);
  }
  return d;
}

}  // namespace

std::vector<double> default_box_scales(const std::vector<Vector>& points) {
  if (points.empty()) throw DomainError("box_dimension: empty point set");
  const double d = diameter_bound(points);
  if (d == 0.0) return {1.0, 0.5};
  std::vector<double> out;
  // Stop once boxes outnumber a tenth of the samples: finer counts undercount.
  for (double s = d / 2.0; out.size() < 20; s /= 2.0) {
    out.push_back(s);
    if (count_boxes(points, s) * 10 > points.size()) break;
  }
  if (out.size() < 2) out.push_back(out.back() / 2.0);
  return out;
}

BoxDimensionReport box_dimension(const std::vector<Vector>& points, std::vector<double> scales) {
  if (points.empty()) throw DomainError("box_dimension: empty point set");
  if (scales.size() < 2) throw DomainError("box_dimension: need at least two scales");
  for (double s : scales)
    if (!(s > 0.0)) throw DomainError("box_dimension: scales must be positive");
  BoxDimensionReport r;
  r.scales = scales;
  if (diameter_bound(points) == 0.0) {
    r.counts.assign(scales.size(), 1);
    return r;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(scales.size());
  for (double s : scales) {
    const std::size_t c = count_boxes(points, s);
    r.counts.push_back(c);
    const double x = std::log(1.0 / s);
    const double y = std::log(static_cast<double>(c));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = m * sxx - sx * sx;
  if (den == 0.0) throw DomainError("box_dimension: scales must be distinct");
  r.dimension = (m * sxy - sx * sy) / den;
  return r;
}

}  // namespace conecalc
