#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conecalc/symmat.hpp"

namespace conecalc {

class ConeSpec;

/// Pure second-order subequations on Sym^2(R^n). Every variant is closed
/// under adding positive semidefinite matrices.
namespace cone {
struct Positivity {};
/// {s_p(A) >= 0}, real 1 <= p <= n.
struct Pp {
  double p;
};
/// {lambda_k(A) >= 0}.
struct Branch {
  int k;
};
/// {lambda_k(A_C) >= 0} on R^{2m} = C^m.
struct ComplexBranch {
  int k;
};
/// {A + delta tr(A) I >= 0}.
struct PDelta {
  double delta;
};
/// {lambda tr A^+ + Lambda tr A^- >= 0}.
struct Pucci {
  double lambda;
  double Lambda;
};
/// {sigma_1(A) >= 0, ..., sigma_k(A) >= 0}.
struct Sigma {
  int k;
};
/// {tr_W A >= 0 for every listed plane}; a finite sample of a Grassmannian subset.
struct Geometric {
  std::vector<Frame> frames;
};
struct Horizontal {
  Frame plane;
};
/// {k-th smallest p-fold eigenvalue sum >= 0}.
struct MApBranch {
  int p;
  int k;
};
/// F^c reduced to pure second order: {A : A + cI in F}.
struct Enlarged {
  std::shared_ptr<const ConeSpec> base;
  double c;
};
/// -(~Int F).
struct Dual {
  std::shared_ptr<const ConeSpec> base;
};

using Variant = std::variant<Positivity, Pp, Branch, ComplexBranch, PDelta, Pucci, Sigma, Geometric,
                             Horizontal, MApBranch, Enlarged, Dual>;
}  // namespace cone

class ConeSpec {
 public:
  static ConeSpec positivity(int dim);
  static ConeSpec pp(int dim, double p);
  static ConeSpec branch(int dim, int k);
  static ConeSpec complex_branch(int dim, int k);
  static ConeSpec pdelta(int dim, double delta);
  static ConeSpec pucci(int dim, double lambda, double Lambda);
  static ConeSpec sigma(int dim, int k);
  static ConeSpec geometric(int dim, std::vector<Frame> frames);
  static ConeSpec horizontal(int dim, Frame plane);
  static ConeSpec mapb(int dim, int p, int k);
  static ConeSpec enlarged(const ConeSpec& base, double c);
  static ConeSpec dual(const ConeSpec& base);

  int dim() const noexcept { return dim_; }
  const cone::Variant& variant() const noexcept { return v_; }
  /// True when membership depends on eigenvalues only.
  bool o_n_invariant() const;
  /// True for convex cones (the catalogue minus Enlarged and non-convex branches).
  bool is_cone() const;
  /// Compact descriptor, the inverse of parse_cone for non-file variants.
  std::string describe() const;

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&v_);
  }

 private:
  ConeSpec(int dim, cone::Variant v) : dim_(dim), v_(std::move(v)) {}
  int dim_ = 0;
  cone::Variant v_;
};

enum class Mode { closed, interior };

struct Witness {
  /// "eigenvalue", "frame", "sigma", "pfold" or "base".
  std::string kind;
  std::size_t index = 0;
};

struct MembershipReport {
  bool member = false;
  /// Slack of the binding scalar inequality.
  double margin = 0.0;
  /// Band used: member <=> margin >= -tolerance (closed) or >= tolerance (interior).
  double tolerance = 0.0;
  std::optional<Witness> witness;
};

struct SampleConfig {
  std::uint64_t seed = 0;
  std::size_t count = 1000;
  double magnitude = 1.0;
  unsigned workers = 1;
};

double closed_tolerance(const SymMatrix& a);
double interior_tolerance(const SymMatrix& a);

/// Raw slack of the defining inequality (>= 0 on the closed set).
double cone_margin(const ConeSpec& c, const SymMatrix& a, Witness* witness = nullptr);

MembershipReport contains(const ConeSpec& c, const SymMatrix& a, Mode mode = Mode::closed);

/// Catalogue description of the dual, when one exists in closed form.
std::optional<ConeSpec> dual_closed_form(const ConeSpec& c);
std::string dual_description(const ConeSpec& c);

/// Membership in the dual via -A not in Int F. When a fast path exists
/// (integer Pp, Branch, ComplexBranch, Positivity) it is evaluated too and
/// the two are required to agree outside the tolerance band.
MembershipReport dual_contains(const ConeSpec& c, const SymMatrix& a);
MembershipReport dual_contains_definitional(const ConeSpec& c, const SymMatrix& a);

/// Draws a seeded random member of `c` (GOE sample, shifted along I when needed).
SymMatrix sample_member(const ConeSpec& c, Rng& rng, double magnitude);

struct RelationResult {
  bool pass = true;
  std::size_t samples = 0;
  std::optional<std::size_t> failing_index;
  std::optional<SymMatrix> a;
  std::optional<SymMatrix> b;
  double margin_a = 0.0;
  double margin_b = 0.0;
  double margin_sum = 0.0;
};

/// Randomized certification of F + M subset F. Deterministic in cfg.seed and
/// independent of cfg.workers; the reported counterexample is the one with
/// the smallest sample index.
RelationResult check_relation(const ConeSpec& f, const ConeSpec& m, const SampleConfig& cfg);

struct DualityResult {
  bool pass = true;
  std::size_t samples = 0;
  /// Samples whose margins sat inside the interior band and were not compared.
  std::size_t banded = 0;
  std::size_t disagreements = 0;
  std::optional<std::size_t> failing_index;
  std::optional<SymMatrix> a;
  /// Closed-form dual used as reference, or "involution" when none exists
  /// (then A in F is compared with A in the dual of the dual).
  std::string reference;
};

/// Compares definitional dual membership with the closed-form dual on seeded
/// GOE samples, outside the 1e-7 (1 + ||A||) band.
DualityResult check_duality(const ConeSpec& f, const SampleConfig& cfg);

struct SubsetResult {
  bool pass = true;
  double worst_margin = 0.0;
  std::optional<Vector> witness;
  std::size_t directions = 0;
  /// False when O(n)-invariance reduced the test to a single direction.
  bool sampled = false;
};

/// Deterministic unit-vector sample on S^{n-1}: low-discrepancy lattice of
/// 2*count points plus the coordinate axes.
std::vector<Vector> sphere_sample(std::size_t n, std::size_t count);

/// Tests I - p P_e in M over unit vectors e.
SubsetResult pp_subset_test(const ConeSpec& m, double p, std::size_t sphere_samples = 200);

struct RieszResult {
  double value = 1.0;
  std::optional<double> closed_form;
  /// The test still passes at p = n.
  bool at_least_n = false;
  /// Non-invariant cones were probed on a finite direction set: lower bound only.
  bool sampled = false;
  int iterations = 0;
};

std::optional<double> riesz_closed_form(const ConeSpec& m);

/// Bisection on p in [1, n] of pp_subset_test. Throws ConsistencyError when
/// a catalogue closed form exists and disagrees beyond 1e-6.
RieszResult riesz_characteristic(const ConeSpec& m, double tol = 1e-8, int max_iter = 60,
                                 std::size_t sphere_samples = 200);

struct GardingResult {
  double value = 1.0;
  std::vector<double> factors;
  /// Subsets of {1..n} as bitmasks (bit i set <=> i+1 in I), in ascending mask order.
  std::vector<std::uint32_t> family;
  std::size_t index_family_size = 0;
};

/// Subsets I with the open segment (0, v(I)) disjoint from [lambda, Lambda]^n.
std::vector<std::uint32_t> pucci_index_family(int n, double lambda, double Lambda);

/// Factors lambda*lambda_I(A) + Lambda*lambda_{I'}(A) over the family, and their product.
GardingResult garding_pucci(const SymMatrix& a, double lambda, double Lambda, int max_dim = 12);

/// Parses compact descriptors such as "pp:2.5", "pucci:1:2", "enl:pp:2:0.1",
/// "dual:branch:1", "geom:@frames.csv". Throws ParseError with the offset.
ConeSpec parse_cone(std::string_view text, int dim);

}  // namespace conecalc
