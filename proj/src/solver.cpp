#include "conecalc/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "conecalc/errors.hpp"
#include "conecalc/io.hpp"
#include "conecalc/riesz.hpp"

namespace conecalc {
namespace {

int gcd_all(const Index& v) {
  int g = 0;
  for (int x : v) g = std::gcd(g, std::abs(x));
  return g;
}

/// First non-zero component positive.
Index canonical(Index v) {
  for (int x : v) {
    if (x == 0) continue;
    if (x < 0)
      for (int& y : v) y = -y;
    break;
  }
  return v;
}

long long sq(const Index& v) {
  long long s = 0;
  for (int x : v) s += static_cast<long long>(x) * x;
  return s;
}

std::string coord_text(const GridFunction& g, std::size_t i) {
  const Vector x = g.coord(i);
  std::string s = "(";
  for (std::size_t a = 0; a < x.size(); ++a) s += (a ? ", " : "") + io::format_double(x[a]);
  return s + ")";
}

}  // namespace

// --- stencils ------------------------------------------------------------------------

StencilSet StencilSet::make(int n, int radius) {
  if (n < 1 || n > 3) throw DomainError("StencilSet: wide-stencil frames are implemented for n <= 3");
  if (radius == 0) radius = (n == 2) ? 3 : (n == 3 ? 2 : 1);
  if (radius < 1) throw DomainError("StencilSet: radius must be >= 1");
  StencilSet s;
  s.n_ = n;
  s.radius_ = radius;

  std::set<Index> seen;
  Index v(static_cast<std::size_t>(n), -radius);
  while (true) {
    if (gcd_all(v) == 1) seen.insert(canonical(v));
    std::size_t a = v.size();
    bool done = true;
    while (a > 0) {
      --a;
      if (v[a] < radius) {
        ++v[a];
        done = false;
        break;
      }
      v[a] = -radius;
    }
    if (done) break;
  }
  s.dirs_.assign(seen.begin(), seen.end());
  // Shortest first; among equals the one pointing furthest along e_1 first, so
  // the coordinate axes come out as 0..n-1 in order.
  std::stable_sort(s.dirs_.begin(), s.dirs_.end(), [](const Index& a, const Index& b) {
    if (sq(a) != sq(b)) return sq(a) < sq(b);
    return a > b;
  });
  for (const auto& d : s.dirs_) s.len_.push_back(std::sqrt(static_cast<double>(sq(d))));

  std::map<Index, int> where;
  for (std::size_t i = 0; i < s.dirs_.size(); ++i) where[s.dirs_[i]] = static_cast<int>(i);
  const int m = static_cast<int>(s.dirs_.size());
  if (n == 1) {
    s.frames_.push_back({0});
  } else if (n == 2) {
    for (int i = 0; i < m; ++i) {
      const Index& d = s.dirs_[static_cast<std::size_t>(i)];
      const auto it = where.find(canonical(Index{-d[1], d[0]}));
      if (it != where.end()) s.frames_.push_back({i, it->second});
    }
  } else {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const Index& a = s.dirs_[static_cast<std::size_t>(i)];
        const Index& b = s.dirs_[static_cast<std::size_t>(j)];
        if (i == j || a[0] * b[0] + a[1] * b[1] + a[2] * b[2] != 0) continue;
        Index c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
        const int g = gcd_all(c);
        for (int& x : c) x /= g;
        const auto it = where.find(canonical(c));
        if (it != where.end()) s.frames_.push_back({i, j, it->second});
      }
    }
  }
  std::sort(s.frames_.begin(), s.frames_.end());
  return s;
}

std::vector<std::pair<int, int>> StencilSet::ortho_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& f : frames_)
    if (f.size() >= 2 && f[0] < f[1]) out.emplace_back(f[0], f[1]);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// --- operators ---------------------------------------------------------------------------

ConeSpec Operator::cone(int n) const {
  return kind == Kind::pp ? ConeSpec::pp(n, p) : ConeSpec::branch(n, k);
}

std::string Operator::describe() const {
  return kind == Kind::pp ? "pp:" + io::format_double(p) : "branch:" + std::to_string(k);
}

std::vector<double> pp_weights(double p, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = std::clamp(p - i, 0.0, 1.0);
  return w;
}

namespace {

struct Slot {
  int dir;
  double weight;
};

/// The linear operators the scheme minimizes (or maximizes) over.
struct Choices {
  std::vector<std::vector<Slot>> list;
  bool maximize = false;
  /// p = n: the trace is frame independent, take the first admissible frame.
  bool first_only = false;
};

Choices build_choices(const Operator& op, const StencilSet& st) {
  const int n = st.dim();
  Choices c;
  if (op.kind == Operator::Kind::branch) {
    if (op.k < 1 || op.k > n) throw DomainError("branch operator: need 1 <= k <= n");
    if (op.k != 1 && op.k != n)
      throw DomainError("branch operator: only k = 1 and k = n have a wide-stencil scheme");
    c.maximize = (op.k == n && n > 1);
    for (std::size_t d = 0; d < st.directions().size(); ++d) c.list.push_back({{static_cast<int>(d), 1.0}});
    return c;
  }
  if (!(op.p >= 1.0 && op.p <= n)) throw DomainError("pp operator: need 1 <= p <= n");
  const auto w = pp_weights(op.p, n);
  c.first_only = (op.p == static_cast<double>(n));
  // Orders that give the same weighted sum are the same operator.
  std::set<std::vector<std::pair<int, double>>> seen;
  for (const auto& f : st.frames()) {
    std::vector<Slot> slots;
    std::vector<std::pair<int, double>> key;
    for (std::size_t s = 0; s < f.size(); ++s) {
      if (w[s] == 0.0) continue;
      slots.push_back({f[s], w[s]});
      key.emplace_back(f[s], w[s]);
    }
    std::sort(key.begin(), key.end());
    if (seen.insert(key).second) c.list.push_back(std::move(slots));
  }
  return c;
}

/// Per-node admissible choices, with neighbour offsets precomputed.
struct Scheme {
  const GridFunction* grid = nullptr;
  Choices choices;
  std::vector<long long> offset;  // per direction, linear index offset
  std::vector<double> inv;        // per direction, 1 / (h |v|)^2
  std::vector<std::size_t> nodes;
  std::vector<std::uint32_t> begin;
  std::vector<std::uint32_t> admissible;

  double apply(std::span<const double> u, std::size_t node, std::uint32_t choice) const {
    double s = 0.0;
    const double c = u[node];
    for (const Slot& sl : choices.list[choice]) {
      const auto o = offset[static_cast<std::size_t>(sl.dir)];
      s += sl.weight * (u[node + o] + u[node - o] - 2.0 * c) * inv[static_cast<std::size_t>(sl.dir)];
    }
    return s;
  }

  /// Best value and the choice attaining it (lowest index on ties).
  std::pair<double, std::uint32_t> best(std::span<const double> u, std::size_t k) const {
    double v = 0.0;
    std::uint32_t arg = admissible[begin[k]];
    for (std::uint32_t a = begin[k]; a < begin[k + 1]; ++a) {
      const double x = apply(u, nodes[k], admissible[a]);
      if (a == begin[k] || (choices.maximize ? x > v : x < v)) {
        v = x;
        arg = admissible[a];
      }
    }
    return {v, arg};
  }
};

bool direction_fits(const GridFunction& g, const Index& idx, const Index& v) {
  for (std::size_t a = 0; a < idx.size(); ++a) {
    if (idx[a] + v[a] < 0 || idx[a] + v[a] >= g.dims()[a]) return false;
    if (idx[a] - v[a] < 0 || idx[a] - v[a] >= g.dims()[a]) return false;
  }
  return true;
}

long long linear_offset(const GridFunction& g, const Index& v) {
  long long off = 0, stride = 1;
  for (std::size_t a = v.size(); a-- > 0;) {
    off += v[a] * stride;
    stride *= g.dims()[a];
  }
  return off;
}

/// Admissible choices at node i; `blocked(j)` marks punctured nodes.
template <class Blocked>
std::vector<std::uint32_t> admissible_at(const GridFunction& g, std::size_t i, const StencilSet& st,
                                         const Choices& ch, const std::vector<long long>& offset,
                                         const Blocked& blocked) {
  const Index idx = g.multi(i);
  std::vector<char> ok(st.directions().size());
  for (std::size_t d = 0; d < ok.size(); ++d) {
    ok[d] = direction_fits(g, idx, st.directions()[d]) &&
            !blocked(static_cast<std::size_t>(static_cast<long long>(i) + offset[d])) &&
            !blocked(static_cast<std::size_t>(static_cast<long long>(i) - offset[d]));
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = 0; c < ch.list.size(); ++c) {
    bool fits = true;
    for (const Slot& s : ch.list[c]) fits = fits && ok[static_cast<std::size_t>(s.dir)];
    if (!fits) continue;
    out.push_back(c);
    if (ch.first_only) break;
  }
  return out;
}

void check_grid(const GridFunction& g, const StencilSet& st) {
  if (g.n() != static_cast<std::size_t>(st.dim())) throw DomainError("solver: grid and stencil dimensions differ");
  for (int d : g.dims())
    if (d < 3) throw DomainError("solver: every axis needs >= 3 nodes");
}

void fill_geometry(Scheme& s, const GridFunction& g, const StencilSet& st) {
  s.grid = &g;
  for (std::size_t d = 0; d < st.directions().size(); ++d) {
    s.offset.push_back(linear_offset(g, st.directions()[d]));
    s.inv.push_back(1.0 / (g.h() * g.h() * st.lengths()[d] * st.lengths()[d]));
  }
}

Scheme build_scheme(const DirichletProblem& prob, const StencilSet& st) {
  const GridFunction& g = prob.data;
  check_grid(g, st);
  Scheme s;
  s.choices = build_choices(prob.op, st);
  fill_geometry(s, g, st);
  s.begin.push_back(0);
  auto blocked = [&](std::size_t j) { return prob.is_puncture(j); };
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (prob.is_fixed(i) || prob.is_puncture(i)) continue;
    const auto adm = admissible_at(g, i, st, s.choices, s.offset, blocked);
    if (adm.empty())
      throw DiscretizationError("no admissible stencil frame at " + coord_text(g, i) +
                                "; refine the grid or shrink the puncture set");
    s.nodes.push_back(i);
    s.admissible.insert(s.admissible.end(), adm.begin(), adm.end());
    s.begin.push_back(static_cast<std::uint32_t>(s.admissible.size()));
  }
  return s;
}

double sup_residual(const Scheme& s, std::span<const double> u, std::vector<std::uint32_t>* policy) {
  double r = 0.0;
  for (std::size_t k = 0; k < s.nodes.size(); ++k) {
    const auto [v, arg] = s.best(u, k);
    r = std::max(r, std::abs(v));
    if (policy) (*policy)[k] = arg;
  }
  return r;
}

void solve_policy(const Scheme& s, std::vector<double>& u, const SolveOptions& opts, SolveReport& rep) {
  const std::size_t m = s.nodes.size();
  std::vector<long long> unknown_of(u.size(), -1);
  for (std::size_t k = 0; k < m; ++k) unknown_of[s.nodes[k]] = static_cast<long long>(k);
  std::vector<std::uint32_t> policy(m), next(m);
  double res = sup_residual(s, u, &policy);
  rep.history.emplace_back(0, res);
  if (m == 0 || res <= opts.tol) {
    rep.residual_sup = res;
    rep.converged = res <= opts.tol;
    return;
  }

  using SpMat = Eigen::SparseMatrix<double>;
  // Jacobi-preconditioned BiCGSTAB warm-started from the previous iterate; a
  // sparse LU takes over if it ever stalls (it fills in badly on wide stencils).
  bool direct = false;
  SpMat a;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> krylov;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  Eigen::VectorXd x(static_cast<Eigen::Index>(m));
  std::vector<Eigen::Triplet<double>> trip;
  auto linear_solve = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& guess) -> Eigen::VectorXd {
    if (!direct) {
      Eigen::VectorXd r = krylov.solveWithGuess(b, guess);
      if (krylov.info() == Eigen::Success) return r;
      direct = true;
      lu.compute(a);
      if (lu.info() != Eigen::Success) throw ConvergenceError("policy iteration: sparse factorization failed");
    }
    return lu.solve(b);
  };
  for (int it = 1; it <= opts.max_iter; ++it) {
    trip.clear();
    rhs.setZero();
    double scale = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = s.nodes[k];
      const auto row = static_cast<Eigen::Index>(k);
      double diag = 0.0;
      for (const Slot& sl : s.choices.list[policy[k]]) {
        const double c = sl.weight * s.inv[static_cast<std::size_t>(sl.dir)];
        diag -= 2.0 * c;
        for (long long o : {s.offset[static_cast<std::size_t>(sl.dir)], -s.offset[static_cast<std::size_t>(sl.dir)]}) {
          const auto j = static_cast<std::size_t>(static_cast<long long>(i) + o);
          if (unknown_of[j] >= 0)
            trip.emplace_back(row, static_cast<Eigen::Index>(unknown_of[j]), c);
          else
            rhs(row) -= c * u[j];
        }
      }
      trip.emplace_back(row, row, diag);
      scale = std::max(scale, -diag);
      x(row) = u[i];
    }
    a.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    a.setFromTriplets(trip.begin(), trip.end());
    if (direct) {
      lu.compute(a);
      if (lu.info() != Eigen::Success) throw ConvergenceError("policy iteration: sparse factorization failed");
    } else {
      krylov.setTolerance(std::min(1e-12, 0.01 * opts.tol / std::max(scale, 1.0)));
      krylov.setMaxIterations(10000);
      krylov.compute(a);
    }
    x = linear_solve(rhs, x);
    for (std::size_t k = 0; k < m; ++k) u[s.nodes[k]] = x(static_cast<Eigen::Index>(k));

    res = sup_residual(s, u, &next);
    const bool stable = next == policy;
    // With a stable policy the scheme residual is the linear residual, so a
    // couple of refinement steps with the same factorization remove roundoff.
    for (int r = 0; r < 3 && stable && res > opts.tol; ++r) {
      Eigen::VectorXd d(static_cast<Eigen::Index>(m));
      for (std::size_t k = 0; k < m; ++k) d(static_cast<Eigen::Index>(k)) = -s.apply(u, s.nodes[k], policy[k]);
      const Eigen::VectorXd dx = linear_solve(d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)));
      for (std::size_t k = 0; k < m; ++k) u[s.nodes[k]] += dx(static_cast<Eigen::Index>(k));
      res = sup_residual(s, u, &next);
    }
    rep.iterations = it;
    rep.history.emplace_back(it, res);
    if (res <= opts.tol || next == policy) break;
    policy.swap(next);
  }
  rep.residual_sup = res;
  rep.converged = res <= opts.tol;
}

void solve_jacobi(const Scheme& s, std::vector<double>& u, const SolveOptions& opts, SolveReport& rep) {
  const std::size_t m = s.nodes.size();
  double wsum = 0.0;
  for (const auto& c : s.choices.list) {
    double t = 0.0;
    for (const Slot& sl : c) t += sl.weight;
    wsum = std::max(wsum, t);
  }
  const double h = s.grid->h();
  const double tau = h * h / (2.0 * wsum);
  std::vector<double> next = u;
  std::vector<double> upd(m);
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(std::max<std::size_t>(m, 1))));
  std::vector<double> part(workers);
  auto sweep = [&](unsigned w) {
    const std::size_t lo = m * w / workers, hi = m * (w + 1) / workers;
    double r = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const double v = s.best(u, k).first;
      upd[k] = v;
      r = std::max(r, std::abs(v));
    }
    part[w] = r;
  };
  double res = 0.0;
  const int stride = std::max(1, opts.history_stride);
  for (int it = 0;; ++it) {
    if (workers == 1) {
      sweep(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(sweep, w);
    }
    res = *std::max_element(part.begin(), part.end());
    if (it % stride == 0 || res <= opts.tol) rep.history.emplace_back(it, res);
    rep.iterations = it;
    if (res <= opts.tol || it >= opts.max_iter || m == 0) break;
    for (std::size_t k = 0; k < m; ++k) u[s.nodes[k]] += tau * upd[k];
  }
  rep.residual_sup = res;
  rep.converged = res <= opts.tol;
}

}  // namespace

DirichletProblem make_problem(std::vector<int> dims, Vector origin, double h, Operator op, const PointFunction& g,
                              std::optional<std::pair<Vector, Vector>> hole, const std::vector<Vector>& puncture) {
  DirichletProblem prob{GridFunction::sample(std::move(dims), std::move(origin), h, g), op, {}, {}};
  const GridFunction& d = prob.data;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!std::isfinite(d[i]) && d.boundary_distance(i) == 0)
      throw DomainError("make_problem: boundary data must be finite, got " + io::format_double(d[i]) + " at " +
                        coord_text(d, i));
  if (hole) {
    const auto& [lo, hi] = *hole;
    if (lo.size() != d.n() || hi.size() != d.n()) throw DomainError("make_problem: hole box dimension mismatch");
    prob.hole.assign(d.size(), 0);
    const double eps = 1e-9 * h;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Vector x = d.coord(i);
      bool in = true;
      for (std::size_t a = 0; a < x.size(); ++a) in = in && x[a] >= lo[a] - eps && x[a] <= hi[a] + eps;
      prob.hole[i] = in ? 1 : 0;
    }
  }
  if (!puncture.empty()) {
    prob.puncture.assign(d.size(), 0);
    for (const auto& x : puncture) {
      const auto c = d.cell_of(x);
      if (!c || d.boundary_distance(*c) == 0 || prob.is_hole(*c))
        throw DomainError("make_problem: puncture points must lie strictly inside the domain");
      prob.puncture[*c] = 1;
    }
  }
  // Interior values are only a starting guess; start from zero so no solve
  // begins at the data's own extension.
  for (std::size_t i = 0; i < prob.data.size(); ++i)
    if (!prob.is_fixed(i)) prob.data[i] = 0.0;
  return prob;
}

double residual(const GridFunction& u, std::size_t i, const Operator& op, const StencilSet& st) {
  check_grid(u, st);
  if (u.boundary_distance(i) == 0) throw StencilError("residual: node is on the grid boundary");
  if (u.masked(i)) throw StencilError("residual: node is punctured");
  Scheme s;
  s.choices = build_choices(op, st);
  fill_geometry(s, u, st);
  auto blocked = [&](std::size_t j) { return u.masked(j); };
  const auto adm = admissible_at(u, i, st, s.choices, s.offset, blocked);
  if (adm.empty()) throw DiscretizationError("residual: no admissible stencil frame at " + coord_text(u, i));
  s.nodes = {i};
  s.begin = {0, static_cast<std::uint32_t>(adm.size())};
  s.admissible = adm;
  return s.best(u.values(), 0).first;
}

SolveReport solve(const DirichletProblem& prob, const StencilSet& st, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridFunction& g = prob.data;
  if (!prob.hole.empty() && prob.hole.size() != g.size()) throw DomainError("solve: hole mask size mismatch");
  if (!prob.puncture.empty() && prob.puncture.size() != g.size())
    throw DomainError("solve: puncture mask size mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (prob.is_puncture(i) && prob.is_fixed(i)) throw DomainError("solve: puncture must be interior to the domain");
    if (prob.is_fixed(i) && prob.data.boundary_distance(i) == 0 && !std::isfinite(g[i]))
      throw DomainError("solve: boundary values must be finite");
  }
  const Scheme s = build_scheme(prob, st);

  SolveReport rep;
  rep.unknowns = s.nodes.size();
  rep.method = opts.method == SolveMethod::policy ? "policy" : "jacobi";
  std::vector<double> u(g.values().begin(), g.values().end());
  for (std::size_t i : s.nodes)
    if (!std::isfinite(u[i])) u[i] = 0.0;
  // Punctured nodes never enter a stencil; keep a finite placeholder meanwhile.
  for (std::size_t i = 0; i < u.size(); ++i)
    if (prob.is_puncture(i)) u[i] = 0.0;

  if (opts.method == SolveMethod::policy)
    solve_policy(s, u, opts, rep);
  else
    solve_jacobi(s, u, opts, rep);

  rep.solution = GridFunction(g.dims(), g.origin(), g.h());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (prob.is_puncture(i)) {
      rep.solution[i] = kMinusInfinity;
      rep.solution.set_masked(i, true);
    } else {
      rep.solution[i] = u[i];
    }
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

HarmonicReport harmonic_verify(const GridFunction& u, const ConeSpec& c, std::optional<double> c_tol) {
  HarmonicReport r;
  r.sub = subharmonic_verify(u, c, c_tol);
  GridFunction neg = u;
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -u[i];
  r.dual = subharmonic_verify(neg, ConeSpec::dual(c), c_tol);
  r.harmonic = r.sub.pass && r.dual.pass;
  return r;
}

RemovabilityReport removability_experiment(const DirichletProblem& prob, const std::vector<Vector>& e,
                                           const StencilSet& st, const RemovabilityOptions& opts) {
  if (!prob.puncture.empty()) throw DomainError("removability: the base problem must not be punctured");
  if (e.empty()) throw DomainError("removability: the set E is empty");
  const int n = static_cast<int>(prob.data.n());
  RemovabilityReport rep;

  double polar_p = 0.0;
  if (opts.polar_p) {
    polar_p = *opts.polar_p;
  } else if (prob.op.kind == Operator::Kind::pp) {
    polar_p = prob.op.p;
  } else {
    throw DomainError("removability: branch operators need an explicit polar exponent");
  }
  rep.polar_p = polar_p;
  // Throws UnsupportedPolarError for p < 2 before any solve.
  const PolarFunction psi = build_polar(e, polar_p);

  const ConeSpec f = prob.op.cone(n);
  const bool same = prob.op.kind == Operator::Kind::pp && prob.op.p == polar_p;
  if (!same) {
    rep.certification = check_relation(f, ConeSpec::pp(n, polar_p), opts.certification);
    if (!rep.certification->pass) return rep;
  }

  rep.full = solve(prob, st, opts.solve);
  DirichletProblem punct = prob;
  punct.puncture.assign(prob.data.size(), 0);
  for (const auto& x : e) {
    const auto c = prob.data.cell_of(x);
    if (!c || prob.is_fixed(*c)) throw DomainError("removability: E must lie strictly inside the domain");
    punct.puncture[*c] = 1;
  }
  rep.puncture_nodes = static_cast<std::size_t>(std::count(punct.puncture.begin(), punct.puncture.end(), 1));
  rep.punctured = solve(punct, st, opts.solve);
  rep.extension = canonical_extension(rep.punctured.solution, opts.extension);

  const GridFunction& ext = rep.extension.extended;
  const GridFunction& full = rep.full.solution;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double a = ext[i], b = full[i];
    const double d = (a == b) ? 0.0 : std::abs(a - b);
    const double gap = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
    rep.sup_gap = std::max(rep.sup_gap, gap);
    if (!punct.is_puncture(i)) rep.sup_gap_off_e = std::max(rep.sup_gap_off_e, gap);
  }
  rep.threshold = opts.constant * (prob.data.h() + opts.solve.tol);

  const GridFunction psi_grid = psi.sample(rep.punctured.solution);
  rep.perturbation_pass = true;
  for (double eps : opts.eps) {
    const GridFunction w = perturb(rep.punctured.solution, psi_grid, eps);
    PerturbationCheck chk{eps, subharmonic_verify(w, f)};
    rep.perturbation_pass = rep.perturbation_pass && chk.report.pass;
    rep.perturbations.push_back(std::move(chk));
  }
  rep.pass = rep.full.converged && rep.punctured.converged && rep.sup_gap <= rep.threshold && rep.perturbation_pass;
  return rep;
}

}  // namespace conecalc
