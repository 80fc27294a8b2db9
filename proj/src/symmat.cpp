#include "conecalc/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "conecalc/errors.hpp"

namespace conecalc {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// --- SymMatrix --------------------------------------------------------------

SymMatrix::SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {
  if (n == 0) throw DomainError("SymMatrix: dimension must be >= 1");
}

SymMatrix::SymMatrix(std::size_t n, std::span<const double> row_major) : SymMatrix(n) {
  if (row_major.size() != n * n)
    throw DomainError("SymMatrix: expected " + std::to_string(n * n) + " entries, got " +
                      std::to_string(row_major.size()));
  for (std::size_t i = 0; i < n; ++i) {
    a_[i * n + i] = row_major[i * n + i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (row_major[i * n + j] + row_major[j * n + i]);
      a_[i * n + j] = v;
      a_[j * n + i] = v;
    }
  }
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.a_[i * n + i] = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
  return m;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> d) {
  return diagonal(std::span<const double>(d.begin(), d.size()));
}

SymMatrix SymMatrix::outer(std::span<const double> v) {
  SymMatrix m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m.a_[i * v.size() + j] = v[i] * v[j];
  return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  a_[i * n_ + j] = v;
  a_[j * n_ + i] = v;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += a_[i * n_ + i];
  return t;
}

double SymMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) row += std::abs(a_[i * n_ + j]);
    best = std::max(best, row);
  }
  return best;
}

Vector SymMatrix::apply(std::span<const double> x) const {
  Vector y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) y[i] += a_[i * n_ + j] * x[j];
  return y;
}

double SymMatrix::quadratic_form(std::span<const double> x) const { return dot(x, apply(x)); }

bool SymMatrix::is_finite() const {
  return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

SymMatrix SymMatrix::operator-() const {
  SymMatrix m = *this;
  for (auto& v : m.a_) v = -v;
  return m;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  if (o.n_ != n_) throw DomainError("SymMatrix: dimension mismatch in +");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  if (o.n_ != n_) throw DomainError("SymMatrix: dimension mismatch in -");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (auto& v : a_) v *= s;
  return *this;
}

SymMatrix Spectrum::reconstruct() const {
  return conjugate_diagonal(eigenvectors, eigenvalues);
}

// --- Frame --------------------------------------------------------------------

Frame::Frame(std::vector<Vector> vectors) : v_(std::move(vectors)) {
  if (v_.empty()) throw DomainError("Frame: needs at least one vector");
  const std::size_t n = v_.front().size();
  if (v_.size() > n) throw DomainError("Frame: more vectors than ambient dimension");
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (v_[i].size() != n) throw DomainError("Frame: vectors of unequal dimension");
    for (std::size_t j = i; j < v_.size(); ++j) {
      const double target = (i == j) ? 1.0 : 0.0;
      if (std::abs(dot(v_[i], v_[j]) - target) > 1e-12)
        throw DomainError("Frame: vectors are not orthonormal");
    }
  }
}

Frame Frame::orthonormalized(std::vector<Vector> vectors) {
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    // Two passes of modified Gram-Schmidt keep the result orthonormal to ~1e-16.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const double c = dot(vectors[i], vectors[j]);
        for (std::size_t k = 0; k < vectors[i].size(); ++k) vectors[i][k] -= c * vectors[j][k];
      }
    }
    const double len = norm2(vectors[i]);
    if (len < 1e-12) throw DomainError("Frame: vectors are linearly dependent");
    for (auto& x : vectors[i]) x /= len;
  }
  return Frame(std::move(vectors));
}

Frame Frame::coordinate(std::size_t n, std::size_t k) {
  std::vector<Vector> v(k, Vector(n, 0.0));
  for (std::size_t i = 0; i < k; ++i) v[i][i] = 1.0;
  return Frame(std::move(v));
}

SymMatrix Frame::projector() const {
  SymMatrix p(ambient_dim());
  for (const auto& v : v_) p += SymMatrix::outer(v);
  return p;
}

// --- eigensolver ----------------------------------------------------------------

Spectrum eigh(const SymMatrix& a, const EighOptions& opts) {
  const std::size_t n = a.dim();
  if (!a.is_finite()) throw DomainError("eigh: matrix has non-finite entries");
  std::vector<double> m(a.data().begin(), a.data().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double frob = 0.0;
  for (double x : m) frob += x * x;
  frob = std::sqrt(frob);
  const double threshold = opts.rel_threshold * frob;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += m[i * n + j] * m[i * n + j];
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > threshold) {
    if (++sweep > opts.max_sweeps) {
      std::ostringstream os;
      os << "eigh: Jacobi iteration did not converge after " << opts.max_sweeps
         << " sweeps (||A||_F = " << frob << ", off-diagonal norm = " << off_norm() << ")";
      throw ConvergenceError(os.str());
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        m[p * n + p] -= t * apq;
        m[q * n + q] += t * apq;
        m[p * n + q] = 0.0;
        m[q * n + p] = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = m[r * n + p];
            const double arq = m[r * n + q];
            m[r * n + p] = m[p * n + r] = c * arp - s * arq;
            m[r * n + q] = m[q * n + r] = s * arp + c * arq;
          }
          const double vrp = v[r * n + p];
          const double vrq = v[r * n + q];
          v[r * n + p] = c * vrp - s * vrq;
          v[r * n + q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return m[i * n + i] < m[j * n + j]; });

  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors.assign(n, Vector(n));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t col = order[k];
    out.eigenvalues[k] = m[col * n + col];
    std::size_t big = 0;
    for (std::size_t r = 0; r < n; ++r) {
      out.eigenvectors[k][r] = v[r * n + col];
      if (std::abs(v[r * n + col]) > std::abs(v[big * n + col])) big = r;
    }
    if (out.eigenvectors[k][big] < 0.0)
      for (auto& x : out.eigenvectors[k]) x = -x;
  }
  return out;
}

Vector eigenvalues(const SymMatrix& a) { return eigh(a).eigenvalues; }

double partial_sum_sorted(std::span<const double> ev, double p) {
  const double n = static_cast<double>(ev.size());
  if (!(p >= 1.0 - 1e-12 && p <= n + 1e-12))
    throw DomainError("partial_sum: p = " + std::to_string(p) + " outside [1, " +
                      std::to_string(ev.size()) + "]");
  p = std::clamp(p, 1.0, n);
  const auto whole = static_cast<std::size_t>(std::floor(p));
  const double frac = p - static_cast<double>(whole);
  double s = 0.0;
  for (std::size_t i = 0; i < whole; ++i) s += ev[i];
  if (frac > 0.0 && whole < ev.size()) s += frac * ev[whole];
  return s;
}

double partial_sum(const SymMatrix& a, double p) { return partial_sum_sorted(eigenvalues(a), p); }

SymMatrix projector(std::span<const double> e) {
  const double len = norm2(e);
  if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("projector: zero or non-finite vector");
  Vector u(e.begin(), e.end());
  for (auto& x : u) x /= len;
  return SymMatrix::outer(u);
}

SymMatrix hermitian_part(const SymMatrix& a) {
  const std::size_t n = a.dim();
  if (n % 2 != 0) throw DomainError("hermitian_part: dimension must be even");
  // Row i of J: J(2t, 2t+1) = -1, J(2t+1, 2t) = 1. Column j of J: J(2t+1, 2t) = 1,
  // J(2t, 2t+1) = -1. Each has a single non-zero, so (J A J)_ij is one product.
  auto row_partner = [](std::size_t i, double& sign) {
    sign = (i % 2 == 0) ? -1.0 : 1.0;
    return (i % 2 == 0) ? i + 1 : i - 1;
  };
  auto col_partner = [](std::size_t j, double& sign) {
    sign = (j % 2 == 0) ? 1.0 : -1.0;
    return (j % 2 == 0) ? j + 1 : j - 1;
  };
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double si = 0.0, sj = 0.0;
      const std::size_t k = row_partner(i, si);
      const std::size_t l = col_partner(j, sj);
      out.set(i, j, 0.5 * (a(i, j) - si * a(k, l) * sj));
    }
  }
  return out;
}

Vector hermitian_eigenvalues(const SymMatrix& a) {
  const SymMatrix ac = hermitian_part(a);
  const Vector ev = eigenvalues(ac);
  const std::size_t m = ev.size() / 2;
  const double tol = 1e-8 * tol_scale(a);
  Vector out(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (std::abs(ev[2 * k] - ev[2 * k + 1]) > tol)
      throw ConsistencyError("hermitian_eigenvalues: eigenvalues of the hermitian part are not paired");
    out[k] = ev[2 * k + 1];
  }
  return out;
}

Vector elementary_symmetric(std::span<const double> values) {
  Vector e(values.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t k = i + 1; k >= 1; --k) e[k] += values[i] * e[k - 1];
  return e;
}

double sigma_elementary(const SymMatrix& a, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > a.dim())
    throw DomainError("sigma_elementary: k = " + std::to_string(k) + " outside [1, n]");
  return elementary_symmetric(eigenvalues(a))[static_cast<std::size_t>(k)];
}

double trace_over_frame(const SymMatrix& a, const Frame& w) {
  if (w.ambient_dim() != a.dim()) throw DomainError("trace_over_frame: dimension mismatch");
  double s = 0.0;
  for (const auto& v : w.vectors()) s += a.quadratic_form(v);
  return s;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Vector pfold_sums_sorted(std::span<const double> ev, int p, std::size_t cap) {
  const std::size_t n = ev.size();
  if (p < 1 || static_cast<std::size_t>(p) > n)
    throw DomainError("pfold_sums: p = " + std::to_string(p) + " outside [1, n]");
  const std::size_t count = binomial(n, static_cast<std::size_t>(p));
  if (count > cap)
    throw ResourceError("pfold_sums: C(" + std::to_string(n) + "," + std::to_string(p) +
                        ") = " + std::to_string(count) + " exceeds cap " + std::to_string(cap));
  Vector out;
  out.reserve(count);
  std::vector<std::size_t> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t pp = idx.size();
  while (true) {
    double s = 0.0;
    for (std::size_t i : idx) s += ev[i];
    out.push_back(s);
    std::size_t i = pp;
    while (i > 0 && idx[i - 1] == n - pp + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < pp; ++j) idx[j] = idx[j - 1] + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vector pfold_sums(const SymMatrix& a, int p, std::size_t cap) {
  return pfold_sums_sorted(eigenvalues(a), p, cap);
}

// --- random -------------------------------------------------------------------

Rng sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

SymMatrix random_goe(std::size_t n, Rng& rng, double magnitude) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.set(i, i, magnitude * gauss(rng));
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, magnitude * gauss(rng) / std::sqrt(2.0));
  }
  return m;
}

Vector random_unit_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  double len = 0.0;
  do {
    for (auto& x : v) x = gauss(rng);
    len = norm2(v);
  } while (len < 1e-8);
  for (auto& x : v) x /= len;
  return v;
}

std::vector<Vector> random_orthogonal(std::size_t n, Rng& rng) {
  std::vector<Vector> cols;
  cols.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cols.push_back(random_unit_vector(n, rng));
  return Frame::orthonormalized(std::move(cols)).vectors();
}

Frame random_frame(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<Vector> cols;
  for (std::size_t i = 0; i < k; ++i) cols.push_back(random_unit_vector(n, rng));
  return Frame::orthonormalized(std::move(cols));
}

SymMatrix conjugate_diagonal(const std::vector<Vector>& q, std::span<const double> d) {
  const std::size_t n = q.empty() ? 0 : q.front().size();
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) s += q[k][i] * d[k] * q[k][j];
      m.set(i, j, s);
    }
  }
  return m;
}

}  // namespace conecalc
