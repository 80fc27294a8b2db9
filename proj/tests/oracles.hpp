#pragma once

// Reference computations that do not go through the library's own spectral
// code: Eigen's dense solver, brute-force subset sums and finite differences.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "conecalc/symmat.hpp"

namespace oracle {

using conecalc::SymMatrix;
using conecalc::Vector;

inline Eigen::MatrixXd to_eigen(const SymMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.dim());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return m;
}

inline Vector eigvals(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return Vector(ev.data(), ev.data() + ev.size());
}

/// Roots of t^2 - tr t + det, ascending.
inline std::pair<double, double> eig2(double a, double b, double d) {
  const double m = 0.5 * (a + d);
  const double r = std::hypot(0.5 * (a - d), b);
  return {m - r, m + r};
}

inline double partial_sum(const SymMatrix& a, double p) {
  const Vector ev = eigvals(a);
  const auto fl = static_cast<std::size_t>(std::floor(p));
  double s = 0.0;
  for (std::size_t i = 0; i < fl; ++i) s += ev[i];
  if (fl < ev.size()) s += (p - static_cast<double>(fl)) * ev[fl];
  return s;
}

/// Sum over all k-subsets of products, by enumeration of bitmasks.
inline double elementary(const Vector& v, int k) {
  const std::size_t n = v.size();
  double s = 0.0;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (std::popcount(m) != k) continue;
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (m & (1u << i)) prod *= v[i];
    s += prod;
  }
  return s;
}

inline std::vector<double> pfold(const Vector& v, int p) {
  std::vector<double> out;
  const std::size_t n = v.size();
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (std::popcount(m) != p) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (m & (1u << i)) s += v[i];
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// lambda tr A^+ + Lambda tr A^- from Eigen eigenvalues (tr A^- <= 0).
inline double pucci(const SymMatrix& a, double lambda, double Lambda) {
  double pos = 0.0, neg = 0.0;
  for (double e : eigvals(a)) (e > 0 ? pos : neg) += e;
  return lambda * pos + Lambda * neg;
}

inline SymMatrix random_sym(std::size_t n, std::mt19937_64& g, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a.set(i, j, nd(g));
  return a;
}

inline Vector random_point(std::size_t n, std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector x(n);
  for (auto& v : x) v = u(g);
  return x;
}

/// Hessian of f at x by second central differences (mixed terms by the
/// 4-point rule), step h.
inline SymMatrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  const std::size_t n = x.size();
  SymMatrix out(n);
  auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
    Vector y = x;
    y[i] += si;
    y[j] += sj;
    return f(y);
  };
  const double f0 = f(x);
  for (std::size_t i = 0; i < n; ++i) {
    out.set(i, i, (at(i, h, i, 0) - 2.0 * f0 + at(i, -h, i, 0)) / (h * h));
    for (std::size_t j = i + 1; j < n; ++j)
      out.set(i, j, (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h));
  }
  return out;
}

inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace oracle
