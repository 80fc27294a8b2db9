#include "conecalc/cones.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "conecalc/errors.hpp"
#include "conecalc/io.hpp"

namespace conecalc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

std::string fmt(double v) { return io::format_double(v); }

}  // namespace

// --- construction -------------------------------------------------------------

ConeSpec ConeSpec::positivity(int dim) {
  require(dim >= 1, "cone: dimension must be >= 1");
  return ConeSpec(dim, cone::Positivity{});
}

ConeSpec ConeSpec::pp(int dim, double p) {
  require(dim >= 1, "cone: dimension must be >= 1");
  require(p >= 1.0 && p <= dim, "pp: need 1 <= p <= n, got p = " + fmt(p));
  return ConeSpec(dim, cone::Pp{p});
}

ConeSpec ConeSpec::branch(int dim, int k) {
  require(dim >= 1, "cone: dimension must be >= 1");
  require(k >= 1 && k <= dim, "branch: need 1 <= k <= n");
  return ConeSpec(dim, cone::Branch{k});
}

ConeSpec ConeSpec::complex_branch(int dim, int k) {
  require(dim >= 2 && dim % 2 == 0, "cbranch: ambient dimension must be even");
  require(k >= 1 && k <= dim / 2, "cbranch: need 1 <= k <= n/2");
  return ConeSpec(dim, cone::ComplexBranch{k});
}

ConeSpec ConeSpec::pdelta(int dim, double delta) {
  require(dim >= 1, "cone: dimension must be >= 1");
  require(delta > 0.0, "pdelta: need delta > 0");
  return ConeSpec(dim, cone::PDelta{delta});
}

ConeSpec ConeSpec::pucci(int dim, double lambda, double Lambda) {
  require(dim >= 1, "cone: dimension must be >= 1");
  require(lambda > 0.0 && lambda < Lambda, "pucci: need 0 < lambda < Lambda");
  return ConeSpec(dim, cone::Pucci{lambda, Lambda});
}

ConeSpec ConeSpec::sigma(int dim, int k) {
  require(dim >= 1, "cone: dimension must be >= 1");
  require(k >= 1 && k <= dim, "sigma: need 1 <= k <= n");
  return ConeSpec(dim, cone::Sigma{k});
}

ConeSpec ConeSpec::geometric(int dim, std::vector<Frame> frames) {
  require(!frames.empty(), "geom: frame list must be non-empty");
  const std::size_t p = frames.front().plane_dim();
  for (const auto& f : frames) {
    require(f.ambient_dim() == static_cast<std::size_t>(dim), "geom: frame dimension mismatch");
    require(f.plane_dim() == p, "geom: all frames must share one plane dimension");
  }
  return ConeSpec(dim, cone::Geometric{std::move(frames)});
}

ConeSpec ConeSpec::horizontal(int dim, Frame plane) {
  require(plane.ambient_dim() == static_cast<std::size_t>(dim), "horiz: frame dimension mismatch");
  return ConeSpec(dim, cone::Horizontal{std::move(plane)});
}

ConeSpec ConeSpec::mapb(int dim, int p, int k) {
  require(p >= 1 && p <= dim, "mapb: need 1 <= p <= n");
  const auto count = binomial(static_cast<std::size_t>(dim), static_cast<std::size_t>(p));
  require(k >= 1 && static_cast<std::size_t>(k) <= count, "mapb: need 1 <= k <= C(n,p)");
  return ConeSpec(dim, cone::MApBranch{p, k});
}

ConeSpec ConeSpec::enlarged(const ConeSpec& base, double c) {
  require(c >= 0.0, "enl: need c >= 0");
  return ConeSpec(base.dim(), cone::Enlarged{std::make_shared<const ConeSpec>(base), c});
}

ConeSpec ConeSpec::dual(const ConeSpec& base) {
  return ConeSpec(base.dim(), cone::Dual{std::make_shared<const ConeSpec>(base)});
}

bool ConeSpec::o_n_invariant() const {
  return std::visit(overloaded{
                        [](const cone::Geometric&) { return false; },
                        [](const cone::Horizontal&) { return false; },
                        [](const cone::ComplexBranch&) { return false; },
                        [](const cone::Enlarged& e) { return e.base->o_n_invariant(); },
                        [](const cone::Dual& d) { return d.base->o_n_invariant(); },
                        [](const auto&) { return true; },
                    },
                    v_);
}

bool ConeSpec::is_cone() const {
  return std::visit(overloaded{
                        [](const cone::Enlarged& e) { return e.c == 0.0 && e.base->is_cone(); },
                        [](const cone::Dual& d) { return d.base->is_cone(); },
                        [](const auto&) { return true; },
                    },
                    v_);
}

std::string ConeSpec::describe() const {
  return std::visit(
      overloaded{
          [](const cone::Positivity&) -> std::string { return "p"; },
          [](const cone::Pp& c) { return "pp:" + fmt(c.p); },
          [](const cone::Branch& c) { return "branch:" + std::to_string(c.k); },
          [](const cone::ComplexBranch& c) { return "cbranch:" + std::to_string(c.k); },
          [](const cone::PDelta& c) { return "pdelta:" + fmt(c.delta); },
          [](const cone::Pucci& c) { return "pucci:" + fmt(c.lambda) + ":" + fmt(c.Lambda); },
          [](const cone::Sigma& c) { return "sigma:" + std::to_string(c.k); },
          [](const cone::Geometric& c) {
            return "geom:<" + std::to_string(c.frames.size()) + " frames of dim " +
                   std::to_string(c.frames.front().plane_dim()) + ">";
          },
          [](const cone::Horizontal& c) {
            return "horiz:<plane of dim " + std::to_string(c.plane.plane_dim()) + ">";
          },
          [](const cone::MApBranch& c) {
            return "mapb:" + std::to_string(c.p) + ":" + std::to_string(c.k);
          },
          [](const cone::Enlarged& c) { return "enl:" + c.base->describe() + ":" + fmt(c.c); },
          [](const cone::Dual& c) { return "dual:" + c.base->describe(); },
      },
      v_);
}

// --- membership ---------------------------------------------------------------

double closed_tolerance(const SymMatrix& a) { return 1e-9 * tol_scale(a); }
double interior_tolerance(const SymMatrix& a) { return 1e-7 * tol_scale(a); }

namespace {

void check_dim(const ConeSpec& c, const SymMatrix& a) {
  if (a.dim() != static_cast<std::size_t>(c.dim()))
    throw DomainError("cone " + c.describe() + " has dimension " + std::to_string(c.dim()) +
                      ", matrix has " + std::to_string(a.dim()));
}

void set_witness(Witness* w, std::string kind, std::size_t index) {
  if (w) *w = Witness{std::move(kind), index};
}

}  // namespace

double cone_margin(const ConeSpec& c, const SymMatrix& a, Witness* w) {
  check_dim(c, a);
  const std::size_t n = a.dim();
  return std::visit(
      overloaded{
          [&](const cone::Positivity&) {
            set_witness(w, "eigenvalue", 0);
            return eigenvalues(a).front();
          },
          [&](const cone::Pp& k) {
            set_witness(w, "eigenvalue", static_cast<std::size_t>(std::floor(k.p)) - 1);
            return partial_sum(a, k.p);
          },
          [&](const cone::Branch& k) {
            set_witness(w, "eigenvalue", static_cast<std::size_t>(k.k - 1));
            return eigenvalues(a)[static_cast<std::size_t>(k.k - 1)];
          },
          [&](const cone::ComplexBranch& k) {
            set_witness(w, "eigenvalue", static_cast<std::size_t>(k.k - 1));
            return hermitian_eigenvalues(a)[static_cast<std::size_t>(k.k - 1)];
          },
          [&](const cone::PDelta& k) {
            set_witness(w, "eigenvalue", 0);
            return eigenvalues(a).front() + k.delta * a.trace();
          },
          [&](const cone::Pucci& k) {
            double pos = 0.0, neg = 0.0;
            for (double ev : eigenvalues(a)) (ev > 0 ? pos : neg) += ev;
            set_witness(w, "eigenvalue", 0);
            return k.lambda * pos + k.Lambda * neg;
          },
          [&](const cone::Sigma& k) {
            // Signed degree-1 normalization sgn(s_j) (|s_j| / C(n,j))^(1/j) keeps the
            // margin comparable to eigenvalues; identity has margin 1.
            const Vector e = elementary_symmetric(eigenvalues(a));
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 1;
            for (std::size_t j = 1; j <= static_cast<std::size_t>(k.k); ++j) {
              const double scaled = e[j] / static_cast<double>(binomial(n, j));
              const double m = std::copysign(std::pow(std::abs(scaled), 1.0 / j), scaled);
              if (m < best) {
                best = m;
                arg = j;
              }
            }
            set_witness(w, "sigma", arg);
            return best;
          },
          [&](const cone::Geometric& g) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t i = 0; i < g.frames.size(); ++i) {
              const double t = trace_over_frame(a, g.frames[i]);
              if (t < best) {
                best = t;
                arg = i;
              }
            }
            set_witness(w, "frame", arg);
            return best;
          },
          [&](const cone::Horizontal& g) {
            set_witness(w, "frame", 0);
            return trace_over_frame(a, g.plane);
          },
          [&](const cone::MApBranch& k) {
            set_witness(w, "pfold", static_cast<std::size_t>(k.k - 1));
            return pfold_sums(a, k.p)[static_cast<std::size_t>(k.k - 1)];
          },
          [&](const cone::Enlarged& e) {
            set_witness(w, "base", 0);
            return cone_margin(*e.base, a + e.c * SymMatrix::identity(n));
          },
          [&](const cone::Dual& d) {
            set_witness(w, "base", 0);
            return -cone_margin(*d.base, -a);
          },
      },
      c.variant());
}

MembershipReport contains(const ConeSpec& c, const SymMatrix& a, Mode mode) {
  MembershipReport r;
  Witness w;
  if (const auto* e = c.as<cone::Enlarged>()) {
    // Enlarged interior = base interior shifted by cI.
    const SymMatrix shifted = a + e->c * SymMatrix::identity(a.dim());
    r = contains(*e->base, shifted, mode);
    r.witness = Witness{"base", 0};
    return r;
  }
  if (const auto* d = c.as<cone::Dual>()) {
    // Closed dual: -A not in Int F. Interior of the dual: -A strictly outside F.
    const SymMatrix neg = -a;
    r.margin = -cone_margin(*d->base, neg);
    r.tolerance = interior_tolerance(a);
    r.member = (mode == Mode::closed) ? r.margin > -r.tolerance : r.margin >= r.tolerance;
    r.witness = Witness{"base", 0};
    return r;
  }
  r.margin = cone_margin(c, a, &w);
  r.witness = w;
  if (mode == Mode::closed) {
    r.tolerance = closed_tolerance(a);
    r.member = r.margin >= -r.tolerance;
  } else {
    r.tolerance = interior_tolerance(a);
    r.member = r.margin >= r.tolerance;
  }
  return r;
}

// --- duality --------------------------------------------------------------------

std::optional<ConeSpec> dual_closed_form(const ConeSpec& c) {
  const int n = c.dim();
  if (c.as<cone::Positivity>()) return ConeSpec::branch(n, n);
  if (const auto* b = c.as<cone::Branch>()) return ConeSpec::branch(n, n - b->k + 1);
  if (const auto* b = c.as<cone::ComplexBranch>()) return ConeSpec::complex_branch(n, n / 2 - b->k + 1);
  if (const auto* p = c.as<cone::Pp>(); p && p->p == static_cast<double>(n)) return c;
  if (const auto* d = c.as<cone::Dual>()) return *d->base;
  return std::nullopt;
}

std::string dual_description(const ConeSpec& c) {
  const int n = c.dim();
  if (auto d = dual_closed_form(c)) return d->describe();
  if (const auto* p = c.as<cone::Pp>(); p && std::floor(p->p) == p->p)
    return "lambda_" + std::to_string(n - static_cast<int>(p->p) + 1) + " + ... + lambda_" +
           std::to_string(n) + " >= 0";
  return "-(~Int " + c.describe() + ") (definitional)";
}

namespace {

/// Fast-path margin of the dual, when one exists.
std::optional<double> dual_fast_margin(const ConeSpec& c, const SymMatrix& a) {
  const std::size_t n = a.dim();
  if (const auto* p = c.as<cone::Pp>(); p && std::floor(p->p) == p->p) {
    const Vector ev = eigenvalues(a);
    double s = 0.0;
    for (std::size_t i = n - static_cast<std::size_t>(p->p); i < n; ++i) s += ev[i];
    return s;
  }
  if (c.as<cone::Positivity>() || c.as<cone::Branch>() || c.as<cone::ComplexBranch>())
    return cone_margin(*dual_closed_form(c), a);
  return std::nullopt;
}

}  // namespace

MembershipReport dual_contains_definitional(const ConeSpec& c, const SymMatrix& a) {
  return contains(ConeSpec::dual(c), a, Mode::closed);
}

MembershipReport dual_contains(const ConeSpec& c, const SymMatrix& a) {
  check_dim(c, a);
  MembershipReport def = dual_contains_definitional(c, a);
  if (auto fast = dual_fast_margin(c, a)) {
    // Both margins equal -margin_F(-A) algebraically; they may differ by rounding.
    const double band = def.tolerance;
    if (std::abs(*fast - def.margin) > band)
      throw ConsistencyError("dual_contains: fast path margin " + fmt(*fast) +
                             " disagrees with definitional margin " + fmt(def.margin) + " for " +
                             c.describe());
  }
  return def;
}

// --- sampling & relations ---------------------------------------------------------

SymMatrix sample_member(const ConeSpec& c, Rng& rng, double magnitude) {
  const std::size_t n = static_cast<std::size_t>(c.dim());
  SymMatrix a = random_goe(n, rng, magnitude);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double mode = unit(rng);
  const double extra = unit(rng);
  if (mode < 0.25 && cone_margin(c, a) >= 0.0) return a;

  const SymMatrix id = SymMatrix::identity(n);
  // Invariant cones only see the spectrum, so the line search can run on the
  // diagonal matrix, where each margin evaluation is cheap.
  const SymMatrix probe = c.o_n_invariant() ? SymMatrix::diagonal(eigenvalues(a)) : a;
  auto ok = [&](double t) { return cone_margin(c, probe + t * id) >= 0.0; };
  double lo = 0.0;
  double hi = magnitude * (1.0 + a.norm_inf());
  if (ok(lo)) {
    // Already a member: walk towards the boundary along -I so boundary-near
    // members are represented too.
    double down = hi;
    int guard = 0;
    while (ok(-down)) {
      down *= 2.0;
      if (++guard > 60) return a;
    }
    lo = -down;
    hi = 0.0;
  } else {
    int guard = 0;
    while (!ok(hi)) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 60)
        throw SamplingError("sample_member: could not shift a sample into " + c.describe() +
                            "; try a larger magnitude");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  // Boundary sample a quarter of the time, otherwise pushed inside.
  const double push = (mode < 0.5) ? 0.0 : extra * magnitude;
  return a + (hi + push) * id;
}

RelationResult check_relation(const ConeSpec& f, const ConeSpec& m, const SampleConfig& cfg) {
  if (f.dim() != m.dim()) throw DomainError("check_relation: dimension mismatch");
  if (cfg.count < 1) throw DomainError("check_relation: sample count must be >= 1");
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(cfg.count)));

  struct Found {
    std::size_t index;
    SymMatrix a, b;
    double ma, mb, ms;
  };
  std::vector<std::optional<Found>> found(workers);

  auto run = [&](unsigned w) {
    const std::size_t begin = cfg.count * w / workers;
    const std::size_t end = cfg.count * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = sample_rng(cfg.seed, i);
      SymMatrix a = sample_member(f, rng, cfg.magnitude);
      SymMatrix b = sample_member(m, rng, cfg.magnitude);
      SymMatrix s = a + b;
      const auto rs = contains(f, s, Mode::closed);
      if (!rs.member) {
        found[w] = Found{i, a, b, cone_margin(f, a), cone_margin(m, b), rs.margin};
        return;
      }
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }

  RelationResult r;
  r.samples = cfg.count;
  for (auto& fnd : found) {
    if (!fnd) continue;
    r.pass = false;
    r.failing_index = fnd->index;
    r.a = fnd->a;
    r.b = fnd->b;
    r.margin_a = fnd->ma;
    r.margin_b = fnd->mb;
    r.margin_sum = fnd->ms;
    break;  // chunks are ordered, so the first hit has the smallest index
  }
  return r;
}

DualityResult check_duality(const ConeSpec& f, const SampleConfig& cfg) {
  if (cfg.count < 1) throw DomainError("check_duality: sample count must be >= 1");
  const auto closed = dual_closed_form(f);
  const ConeSpec dual = ConeSpec::dual(f);
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(cfg.count)));
  const auto n = static_cast<std::size_t>(f.dim());

  struct Part {
    std::size_t banded = 0, bad = 0;
    std::optional<std::size_t> first;
    std::optional<SymMatrix> a;
  };
  std::vector<Part> parts(workers);
  auto run = [&](unsigned w) {
    Part& part = parts[w];
    const std::size_t begin = cfg.count * w / workers;
    const std::size_t end = cfg.count * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = sample_rng(cfg.seed, i);
      const SymMatrix a = random_goe(n, rng, cfg.magnitude);
      const MembershipReport def = closed ? dual_contains(f, a) : contains(f, a, Mode::closed);
      const MembershipReport ref = closed ? contains(*closed, a, Mode::closed) : contains(ConeSpec::dual(dual), a);
      const double band = interior_tolerance(a);
      if (std::abs(def.margin) <= band || std::abs(ref.margin) <= band) {
        ++part.banded;
        continue;
      }
      if (def.member != ref.member) {
        ++part.bad;
        if (!part.first) {
          part.first = i;
          part.a = a;
        }
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  DualityResult r;
  r.samples = cfg.count;
  r.reference = closed ? closed->describe() : "involution";
  for (auto& part : parts) {
    r.banded += part.banded;
    r.disagreements += part.bad;
    if (part.first && !r.failing_index) {
      r.failing_index = part.first;
      r.a = part.a;
    }
  }
  r.pass = r.disagreements == 0;
  return r;
}

// --- Riesz characteristic ---------------------------------------------------------

std::vector<Vector> sphere_sample(std::size_t n, std::size_t count) {
  std::vector<Vector> pts;
  const std::size_t total = 2 * count;
  if (n == 1) {
    pts.push_back({1.0});
    return pts;
  }
  if (n == 2) {
    // e and -e give the same projector, so the half circle suffices.
    for (std::size_t i = 0; i < total; ++i) {
      const double t = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(total);
      pts.push_back({std::cos(t), std::sin(t)});
    }
  } else if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < total; ++i) {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(total);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(i);
      pts.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
  } else {
    // No Fibonacci lattice beyond S^2; use a fixed-seed Gaussian sample.
    Rng rng = sample_rng(0x5eed, n);
    for (std::size_t i = 0; i < total; ++i) pts.push_back(random_unit_vector(n, rng));
  }
  for (std::size_t a = 0; a < n; ++a) {
    Vector e(n, 0.0);
    e[a] = 1.0;
    pts.push_back(e);
  }
  return pts;
}

SubsetResult pp_subset_test(const ConeSpec& m, double p, std::size_t sphere_samples) {
  const auto n = static_cast<std::size_t>(m.dim());
  if (!(p >= 1.0 && p <= static_cast<double>(n)))
    throw DomainError("pp_subset_test: need 1 <= p <= n");
  SubsetResult r;
  std::vector<Vector> dirs;
  if (m.o_n_invariant()) {
    Vector e(n, 0.0);
    e[0] = 1.0;
    dirs.push_back(e);
  } else {
    dirs = sphere_sample(n, sphere_samples);
    r.sampled = true;
  }
  r.directions = dirs.size();
  r.worst_margin = std::numeric_limits<double>::infinity();
  const SymMatrix id = SymMatrix::identity(n);
  for (const auto& e : dirs) {
    const SymMatrix t = id - p * projector(e);
    const auto rep = contains(m, t, Mode::closed);
    if (rep.margin < r.worst_margin) r.worst_margin = rep.margin;
    if (!rep.member && r.pass) {
      r.pass = false;
      r.witness = e;
    }
  }
  return r;
}

std::optional<double> riesz_closed_form(const ConeSpec& m) {
  const double n = m.dim();
  return std::visit(
      overloaded{
          [](const cone::Positivity&) -> std::optional<double> { return 1.0; },
          [](const cone::Pp& c) -> std::optional<double> { return c.p; },
          [n](const cone::Branch& c) -> std::optional<double> { return c.k == 1 ? 1.0 : n; },
          [n](const cone::ComplexBranch& c) -> std::optional<double> {
            return c.k == 1 ? std::min(2.0, n) : n;
          },
          [n](const cone::PDelta& c) -> std::optional<double> {
            return (1.0 + c.delta * n) / (1.0 + c.delta);
          },
          [n](const cone::Pucci& c) -> std::optional<double> {
            return c.lambda / c.Lambda * (n - 1.0) + 1.0;
          },
          [n](const cone::Sigma& c) -> std::optional<double> { return n / c.k; },
          [](const cone::Geometric&) -> std::optional<double> { return std::nullopt; },
          [](const cone::Horizontal&) -> std::optional<double> { return std::nullopt; },
          [&m, n](const cone::MApBranch& c) -> std::optional<double> {
            const auto lower =
                binomial(static_cast<std::size_t>(m.dim() - 1), static_cast<std::size_t>(c.p - 1));
            return static_cast<std::size_t>(c.k) <= lower ? static_cast<double>(c.p) : n;
          },
          [n](const cone::Enlarged& c) -> std::optional<double> {
            if (!c.base->is_cone()) return std::nullopt;
            auto b = riesz_closed_form(*c.base);
            if (!b) return std::nullopt;
            return std::min(n, (1.0 + c.c) * *b);
          },
          [](const cone::Dual&) -> std::optional<double> { return std::nullopt; },
      },
      m.variant());
}

RieszResult riesz_characteristic(const ConeSpec& m, double tol, int max_iter,
                                 std::size_t sphere_samples) {
  const double n = m.dim();
  RieszResult r;
  r.closed_form = riesz_closed_form(m);
  r.sampled = !m.o_n_invariant();
  auto passes = [&](double p) { return pp_subset_test(m, p, sphere_samples).pass; };
  if (!passes(1.0))
    throw DomainError("riesz_characteristic: I - P_e not in " + m.describe() +
                      "; the cone must contain I in its interior");
  if (passes(n)) {
    r.value = n;
    r.at_least_n = true;
  } else {
    double lo = 1.0, hi = n;
    while (hi - lo > tol && r.iterations < max_iter) {
      const double mid = 0.5 * (lo + hi);
      (passes(mid) ? lo : hi) = mid;
      ++r.iterations;
    }
    r.value = lo;
  }
  if (r.closed_form && !r.sampled && std::abs(r.value - *r.closed_form) > std::max(1e-6, 10 * tol))
    throw ConsistencyError("riesz_characteristic: bisection gives " + fmt(r.value) +
                           " but the closed form for " + m.describe() + " is " +
                           fmt(*r.closed_form));
  return r;
}

// --- Pucci Garding polynomial -------------------------------------------------------

std::vector<std::uint32_t> pucci_index_family(int n, double lambda, double Lambda) {
  if (!(lambda > 0.0 && lambda < Lambda)) throw DomainError("pucci family: need 0 < lambda < Lambda");
  std::vector<std::uint32_t> fam;
  const std::uint32_t count = 1u << n;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    // t v(I) lies in the cube iff lambda / v_i <= t <= Lambda / v_i for all i.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double v = (mask >> i) & 1u ? lambda : Lambda;
      lo = std::max(lo, lambda / v);
      hi = std::min(hi, Lambda / v);
    }
    // Intersect [lo, hi] with the open interval (0, 1).
    const bool meets = lo <= hi && lo < 1.0 && hi > 0.0;
    if (!meets) fam.push_back(mask);
  }
  return fam;
}

GardingResult garding_pucci(const SymMatrix& a, double lambda, double Lambda, int max_dim) {
  const int n = static_cast<int>(a.dim());
  if (n > max_dim || n > 30)
    throw ResourceError("garding_pucci: n = " + std::to_string(n) + " exceeds cap " +
                        std::to_string(max_dim));
  GardingResult r;
  r.family = pucci_index_family(n, lambda, Lambda);
  r.index_family_size = r.family.size();
  const Vector ev = eigenvalues(a);
  for (std::uint32_t mask : r.family) {
    double in = 0.0, out = 0.0;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1u ? in : out) += ev[static_cast<std::size_t>(i)];
    const double factor = lambda * in + Lambda * out;
    r.factors.push_back(factor);
    r.value *= factor;
  }
  return r;
}

// --- parsing --------------------------------------------------------------------------

namespace {

struct Field {
  std::string_view text;
  std::size_t pos;
};

std::vector<Field> split_fields(std::string_view s, std::size_t base) {
  std::vector<Field> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = s.find(':', start);
    if (colon == std::string_view::npos) {
      out.push_back({s.substr(start), base + start});
      break;
    }
    out.push_back({s.substr(start, colon - start), base + start});
    start = colon + 1;
  }
  return out;
}

double to_real(const Field& f) {
  double v = 0.0;
  const char* end = f.text.data() + f.text.size();
  auto [ptr, ec] = std::from_chars(f.text.data(), end, v);
  if (ec != std::errc() || ptr != end || f.text.empty())
    throw ParseError("expected a real number, got '" + std::string(f.text) + "'", f.pos);
  return v;
}

int to_int(const Field& f) {
  int v = 0;
  const char* end = f.text.data() + f.text.size();
  auto [ptr, ec] = std::from_chars(f.text.data(), end, v);
  if (ec != std::errc() || ptr != end || f.text.empty())
    throw ParseError("expected an integer, got '" + std::string(f.text) + "'", f.pos);
  return v;
}

ConeSpec parse_at(std::string_view text, std::size_t base, int dim) {
  const auto fields = split_fields(text, base);
  const std::string_view name = fields[0].text;
  auto expect = [&](std::size_t count) {
    if (fields.size() != count + 1)
      throw ParseError("'" + std::string(name) + "' takes " + std::to_string(count) + " argument(s)",
                       fields.back().pos);
  };
  auto wrap = [&](auto&& make) -> ConeSpec {
    try {
      return make();
    } catch (const DomainError& e) {
      throw ParseError(e.what(), fields[0].pos);
    }
  };
  if (name == "p" || name == "pos" || name == "positivity") {
    expect(0);
    return wrap([&] { return ConeSpec::positivity(dim); });
  }
  if (name == "pp") {
    expect(1);
    return wrap([&] { return ConeSpec::pp(dim, to_real(fields[1])); });
  }
  if (name == "branch") {
    expect(1);
    return wrap([&] { return ConeSpec::branch(dim, to_int(fields[1])); });
  }
  if (name == "cbranch") {
    expect(1);
    return wrap([&] { return ConeSpec::complex_branch(dim, to_int(fields[1])); });
  }
  if (name == "pdelta") {
    expect(1);
    return wrap([&] { return ConeSpec::pdelta(dim, to_real(fields[1])); });
  }
  if (name == "pucci") {
    expect(2);
    return wrap([&] { return ConeSpec::pucci(dim, to_real(fields[1]), to_real(fields[2])); });
  }
  if (name == "sigma") {
    expect(1);
    return wrap([&] { return ConeSpec::sigma(dim, to_int(fields[1])); });
  }
  if (name == "mapb") {
    expect(2);
    return wrap([&] { return ConeSpec::mapb(dim, to_int(fields[1]), to_int(fields[2])); });
  }
  if (name == "geom" || name == "horiz") {
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos || colon + 1 >= text.size() || text[colon + 1] != '@')
      throw ParseError("'" + std::string(name) + "' expects ':@<frames.csv>'", base + name.size());
    const std::string path(text.substr(colon + 2));
    std::vector<Frame> frames;
    try {
      frames = io::read_frames_csv(path);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(e.what(), base + colon + 2);
    }
    if (name == "horiz") {
      if (frames.size() != 1) throw ParseError("'horiz' expects exactly one frame", base + colon + 2);
      return wrap([&] { return ConeSpec::horizontal(dim, frames.front()); });
    }
    return wrap([&] { return ConeSpec::geometric(dim, std::move(frames)); });
  }
  if (name == "enl") {
    const std::size_t last = text.rfind(':');
    const std::size_t first = text.find(':');
    if (last == first) throw ParseError("'enl' expects 'enl:<cone>:<c>'", base + text.size());
    const ConeSpec inner = parse_at(text.substr(first + 1, last - first - 1), base + first + 1, dim);
    const Field cf{text.substr(last + 1), base + last + 1};
    return wrap([&] { return ConeSpec::enlarged(inner, to_real(cf)); });
  }
  if (name == "dual") {
    const std::size_t first = text.find(':');
    if (first == std::string_view::npos) throw ParseError("'dual' expects 'dual:<cone>'", base + text.size());
    return ConeSpec::dual(parse_at(text.substr(first + 1), base + first + 1, dim));
  }
  throw ParseError("unknown cone '" + std::string(name) + "'", fields[0].pos);
}

}  // namespace

ConeSpec parse_cone(std::string_view text, int dim) {
  if (dim < 1) throw ParseError("dimension must be >= 1", 0);
  if (text.empty()) throw ParseError("empty cone descriptor", 0);
  return parse_at(text, 0, dim);
}

}  // namespace conecalc
