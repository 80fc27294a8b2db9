#include "conecalc/viscosity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "conecalc/errors.hpp"

namespace conecalc {
namespace {

/// Calls f(offset) for every offset in [-r, r]^n with max |offset_a| == r.
template <class F>
void for_each_shell_offset(std::size_t n, int r, const F& f) {
  Index off(n, -r);
  while (true) {
    int m = 0;
    for (int v : off) m = std::max(m, std::abs(v));
    if (m == r) f(off);
    std::size_t a = n;
    while (a > 0) {
      --a;
      if (off[a] < r) {
        ++off[a];
        break;
      }
      off[a] = -r;
      if (a == 0) return;
    }
    if (n == 0) return;
  }
}

bool usable(const GridFunction& u, std::optional<std::size_t> j) {
  return j && !u.masked(*j) && std::isfinite(u[*j]);
}

Index unit(std::size_t n, std::size_t a, int s) {
  Index e(n, 0);
  e[a] = s;
  return e;
}

}  // namespace

ExtensionReport canonical_extension(const GridFunction& u, const ExtensionOptions& opts) {
  if (opts.radius_cap < 1) throw DomainError("canonical_extension: radius cap must be >= 1");
  if (u.has_mask() && u.masked_count() == u.size())
    throw DomainError("canonical_extension: grid is fully masked");
  ExtensionReport rep{u, 0, 0.0, 0};
  if (!u.has_mask()) return rep;
  const std::size_t n = u.n();
  const int min_r = opts.min_radius > 0.0 ? static_cast<int>(std::ceil(opts.min_radius / u.h() - 1e-9)) : 0;
  GridFunction& out = rep.extended;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.masked(i)) continue;
    double best = kMinusInfinity;
    bool found = false;
    int r = 1;
    for (; r <= std::max(opts.radius_cap, min_r); ++r) {
      for_each_shell_offset(n, r, [&](const Index& off) {
        const auto j = u.shifted(i, off);
        if (j && !u.masked(*j)) {
          found = true;
          best = std::max(best, u[*j]);
        }
      });
      if (found && r >= min_r) break;
      if (!found && r >= opts.radius_cap) break;
    }
    if (!found) ++rep.interior_points;
    const double old = u[i];
    out[i] = best;
    if (!(old == best)) {
      ++rep.changed_points;
      const double d = (std::isfinite(old) && std::isfinite(best)) ? std::abs(best - old)
                       : (std::isinf(old) && std::isinf(best))     ? 0.0
                                                                   : std::numeric_limits<double>::infinity();
      rep.sup_change = std::max(rep.sup_change, d);
    }
  }
  return rep;
}

Jet2 discrete_hessian(const GridFunction& u, std::size_t i) {
  const std::size_t n = u.n();
  const double h = u.h();
  auto at = [&](const Index& off) {
    const auto j = u.shifted(i, off);
    if (!usable(u, j)) throw StencilError("discrete_hessian: stencil leaves the grid or touches the mask");
    return u[*j];
  };
  if (u.masked(i) || !std::isfinite(u[i])) throw StencilError("discrete_hessian: node is masked or not finite");
  Jet2 j;
  j.r = u[i];
  j.grad.assign(n, 0.0);
  j.hess = SymMatrix(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double up = at(unit(n, a, 1));
    const double dn = at(unit(n, a, -1));
    j.grad[a] = (up - dn) / (2.0 * h);
    j.hess.set(a, a, (up - 2.0 * u[i] + dn) / (h * h));
    for (std::size_t b = a + 1; b < n; ++b) {
      Index pp(n, 0), pm(n, 0), mp(n, 0), mm(n, 0);
      pp[a] = 1, pp[b] = 1;
      pm[a] = 1, pm[b] = -1;
      mp[a] = -1, mp[b] = 1;
      mm[a] = -1, mm[b] = -1;
      j.hess.set(a, b, (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h));
    }
  }
  return j;
}

std::vector<std::size_t> probe_region(const GridFunction& u) {
  std::vector<std::size_t> out;
  const std::size_t n = u.n();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.boundary_distance(i) < 1 || u.masked(i) || !std::isfinite(u[i])) continue;
    bool ok = true;
    for_each_shell_offset(n, 1, [&](const Index& off) {
      if (ok && !usable(u, u.shifted(i, off))) ok = false;
    });
    if (ok) out.push_back(i);
  }
  return out;
}

double third_difference(const GridFunction& u, std::size_t i) {
  const std::size_t n = u.n();
  const double h3 = u.h() * u.h() * u.h();
  double kappa = 0.0;
  auto val = [&](std::size_t a, int s) -> std::optional<double> {
    const auto j = u.shifted(i, unit(n, a, s));
    if (!usable(u, j)) return std::nullopt;
    return u[*j];
  };
  for (std::size_t a = 0; a < n; ++a) {
    const auto m2 = val(a, -2), m1 = val(a, -1), p1 = val(a, 1), p2 = val(a, 2);
    const bool c = usable(u, i);
    const double uc = c ? u[i] : 0.0;
    double d = 0.0;
    if (m2 && m1 && p1 && p2) {
      d = (*p2 - 2.0 * *p1 + 2.0 * *m1 - *m2) / (2.0 * h3);
    } else if (m1 && c && p1 && p2) {
      d = (*p2 - 3.0 * *p1 + 3.0 * uc - *m1) / h3;
    } else if (m2 && m1 && c && p1) {
      d = (*p1 - 3.0 * uc + 3.0 * *m1 - *m2) / h3;
    }
    kappa = std::max(kappa, std::abs(d));
  }
  return kappa;
}

VerifyReport subharmonic_verify(const GridFunction& u, const ConeSpec& c, std::optional<double> c_tol) {
  if (u.n() != static_cast<std::size_t>(c.dim())) throw DomainError("subharmonic_verify: grid and cone dimensions differ");
  if (c_tol && !(*c_tol >= 0.0)) throw DomainError("subharmonic_verify: c_tol must be >= 0");
  VerifyReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i : probe_region(u)) {
    ++rep.probed;
    const Jet2 j = discrete_hessian(u, i);
    const double tol = c_tol ? *c_tol : third_difference(u, i) * u.h() + 1e-9;
    rep.max_c_tol = std::max(rep.max_c_tol, tol);
    const auto m = contains(ConeSpec::enlarged(c, tol), j.hess, Mode::closed);
    rep.worst_margin = std::min(rep.worst_margin, m.margin);
    if (!m.member) rep.violations.push_back({i, u.coord(i), m.margin, tol});
  }
  if (rep.probed == 0) rep.worst_margin = 0.0;
  rep.pass = rep.violations.empty();
  return rep;
}

GridFunction perturb(const GridFunction& u, const GridFunction& psi, double eps) {
  if (!u.same_geometry(psi)) throw DomainError("perturb: grids differ in geometry");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("perturb: need finite eps >= 0");
  if (eps == 0.0) return u;
  GridFunction out = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = psi[i];
    out[i] = (a == kMinusInfinity || b == kMinusInfinity) ? kMinusInfinity : a + eps * b;
    if (psi.masked(i)) out.set_masked(i, true);
  }
  return out;
}

Jet2 distance_jet(const FlatSet& e, std::span<const double> x) {
  const std::size_t n = e.q.size();
  if (x.size() != n) throw DomainError("distance_jet: point dimension mismatch");
  Vector d(n);
  for (std::size_t a = 0; a < n; ++a) d[a] = x[a] - e.q[a];
  SymMatrix pt(n);
  if (e.tangent) {
    if (e.tangent->ambient_dim() != n) throw DomainError("distance_jet: frame dimension mismatch");
    pt = e.tangent->projector();
    const Vector along = pt.apply(d);
    for (std::size_t a = 0; a < n; ++a) d[a] -= along[a];
  }
  const double delta = norm2(d);
  if (delta < 1e-14) throw PoleError("distance_jet: x lies on E, where d_E has no jet");
  Jet2 j;
  j.r = delta;
  j.grad = d;
  for (double& v : j.grad) v /= delta;
  j.hess = (1.0 / delta) * (SymMatrix::identity(n) - pt - SymMatrix::outer(j.grad));
  return j;
}

UpperConicalResult upper_conical_check(const GridFunction& u, std::size_t q, double eps, double hess_bound,
                                       const UpperConicalOptions& opts) {
  const std::size_t n = u.n();
  if (opts.probe_radius < 1) throw DomainError("upper_conical_check: probe radius must be >= 1");
  if (!(hess_bound >= 0.0)) throw DomainError("upper_conical_check: Hessian bound must be >= 0");
  if (u.boundary_distance(q) < opts.probe_radius)
    throw StencilError("upper_conical_check: probe neighbourhood touches the grid boundary");
  if (!std::isfinite(u[q])) throw DomainError("upper_conical_check: U(q) must be finite");

  // Constraint j: g.d_j - t >= b_j, with b_j = U(x_j) - U(q) + eps|d_j| - B|d_j|^2 / 2.
  std::vector<Vector> dirs;
  Vector b;
  for (int r = 1; r <= opts.probe_radius; ++r) {
    for_each_shell_offset(n, r, [&](const Index& off) {
      const auto j = u.shifted(q, off);
      if (!j || u.masked(*j)) return;
      Vector d(n);
      for (std::size_t a = 0; a < n; ++a) d[a] = off[a] * u.h();
      const double len = norm2(d);
      const double uj = u[*j];
      if (uj == kMinusInfinity) return;  // never binding
      dirs.push_back(d);
      b.push_back(uj - u[q] + eps * len - 0.5 * hess_bound * len * len);
    });
  }
  UpperConicalResult res;
  res.probes = dirs.size();
  res.hess_bound = hess_bound;
  const std::size_t m = dirs.size();
  const std::size_t k = n + 1;
  if (m < k) throw StencilError("upper_conical_check: too few usable probe nodes");
  if (binomial(m, k) > opts.max_combinations)
    throw ResourceError("upper_conical_check: vertex enumeration exceeds the combination cap");

  double best = -std::numeric_limits<double>::infinity();
  Vector best_g(n, 0.0);
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  Eigen::MatrixXd mat(k, k);
  Eigen::VectorXd rhs(k);
  double bscale = 1.0;
  for (double v : b) bscale = std::max(bscale, std::abs(v));
  while (true) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t a = 0; a < n; ++a) mat(r, a) = dirs[pick[r]][a];
      mat(r, n) = -1.0;
      rhs(r) = b[pick[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
    if (lu.rank() == static_cast<Eigen::Index>(k)) {
      const Eigen::VectorXd z = lu.solve(rhs);
      const double t = z(n);
      if (t > best) {
        bool feasible = true;
        for (std::size_t j = 0; j < m && feasible; ++j) {
          double s = -t;
          for (std::size_t a = 0; a < n; ++a) s += z(a) * dirs[j][a];
          if (s < b[j] - 1e-12 * bscale) feasible = false;
        }
        if (feasible) {
          best = t;
          for (std::size_t a = 0; a < n; ++a) best_g[a] = z(a);
        }
      }
    }
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == m - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t r = i; r < k; ++r) pick[r] = pick[r - 1] + 1;
  }
  res.optimum = best;
  res.test_found = best >= -opts.tol;
  if (res.test_found) res.witness = Jet2{u[q], best_g, hess_bound * SymMatrix::identity(n)};
  return res;
}

}  // namespace conecalc
