#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace conecalc {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Dense real symmetric n x n matrix, row-major. Construction symmetrizes,
/// so entries(i,j) == entries(j,i) holds bit-for-bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n);
  SymMatrix(std::size_t n, std::span<const double> row_major);

  static SymMatrix zero(std::size_t n) { return SymMatrix(n); }
  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(std::span<const double> d);
  static SymMatrix diagonal(std::initializer_list<double> d);
  /// v v^T.
  static SymMatrix outer(std::span<const double> v);

  std::size_t dim() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  /// Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double v);
  std::span<const double> data() const noexcept { return a_; }

  double trace() const;
  /// Max absolute row sum.
  double norm_inf() const;
  Vector apply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;
  bool is_finite() const;

  SymMatrix operator-() const;
  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Ascending eigenvalues with orthonormal eigenvectors (column k pairs with
/// eigenvalue k).
struct Spectrum {
  Vector eigenvalues;
  std::vector<Vector> eigenvectors;

  std::size_t dim() const noexcept { return eigenvalues.size(); }
  SymMatrix reconstruct() const;
};

/// k orthonormal n-vectors spanning a k-plane.
class Frame {
 public:
  Frame() = default;
  /// Validates orthonormality to 1e-12; throws DomainError otherwise.
  explicit Frame(std::vector<Vector> vectors);
  /// Gram-Schmidt orthonormalization of arbitrary independent vectors.
  static Frame orthonormalized(std::vector<Vector> vectors);
  /// First k standard basis vectors of R^n.
  static Frame coordinate(std::size_t n, std::size_t k);

  std::size_t plane_dim() const noexcept { return v_.size(); }
  std::size_t ambient_dim() const noexcept { return v_.empty() ? 0 : v_.front().size(); }
  const std::vector<Vector>& vectors() const noexcept { return v_; }
  const Vector& operator[](std::size_t i) const { return v_[i]; }
  /// Orthogonal projector onto the plane.
  SymMatrix projector() const;

 private:
  std::vector<Vector> v_;
};

/// Value, gradient and Hessian of a function at a point.
struct Jet2 {
  double r = 0.0;
  Vector grad;
  SymMatrix hess;
};

// --- spectral operations ---------------------------------------------------

struct EighOptions {
  double rel_threshold = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver. Deterministic; eigenvector signs are fixed so
/// the largest-magnitude component is positive.
Spectrum eigh(const SymMatrix& a, const EighOptions& opts = {});
Vector eigenvalues(const SymMatrix& a);

/// lambda_1 + ... + lambda_[p] + (p - [p]) lambda_{[p]+1}, 1 <= p <= n.
double partial_sum(const SymMatrix& a, double p);
double partial_sum_sorted(std::span<const double> ascending, double p);

/// e e^T for e normalized first; throws on the zero vector.
SymMatrix projector(std::span<const double> e);

/// Standard complex structure on R^{2m}: coordinates paired (x1,y1,...,xm,ym)
/// with J x_i = y_i, J y_i = -x_i.
SymMatrix hermitian_part(const SymMatrix& a);
/// One representative per equal pair of the eigenvalues of the hermitian
/// part, ascending (m values for n = 2m).
Vector hermitian_eigenvalues(const SymMatrix& a);

/// k-th elementary symmetric polynomial of the eigenvalues, 1 <= k <= n.
double sigma_elementary(const SymMatrix& a, int k);
/// All sigma_0..sigma_n of a list of values.
Vector elementary_symmetric(std::span<const double> values);

double trace_over_frame(const SymMatrix& a, const Frame& w);

/// All p-fold eigenvalue sums, ascending. Throws ResourceError when
/// C(n,p) > cap.
Vector pfold_sums(const SymMatrix& a, int p, std::size_t cap = 1'000'000);
Vector pfold_sums_sorted(std::span<const double> ascending, int p, std::size_t cap = 1'000'000);

std::size_t binomial(std::size_t n, std::size_t k);

/// Tolerance scale used for pass/fail bands: 1 + ||A||_inf.
inline double tol_scale(const SymMatrix& a) { return 1.0 + a.norm_inf(); }

// --- random generation ------------------------------------------------------

using Rng = std::mt19937_64;

/// Independent generator for sample `index` of a run seeded with `seed`,
/// so sample streams do not depend on how work is partitioned.
Rng sample_rng(std::uint64_t seed, std::uint64_t index);

/// Gaussian orthogonal ensemble matrix scaled by `magnitude`.
SymMatrix random_goe(std::size_t n, Rng& rng, double magnitude = 1.0);
Vector random_unit_vector(std::size_t n, Rng& rng);
/// Haar-distributed orthogonal matrix as a list of orthonormal columns.
std::vector<Vector> random_orthogonal(std::size_t n, Rng& rng);
Frame random_frame(std::size_t n, std::size_t k, Rng& rng);
/// Q diag(d) Q^T for columns q.
SymMatrix conjugate_diagonal(const std::vector<Vector>& q, std::span<const double> d);

}  // namespace conecalc
