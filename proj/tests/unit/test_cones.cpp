#include <cmath>

#include "conecalc/cones.hpp"
#include "conecalc/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace conecalc;

namespace {

std::vector<ConeSpec> catalogue(int n) {
  std::vector<ConeSpec> out{ConeSpec::positivity(n), ConeSpec::pp(n, 1.5), ConeSpec::pp(n, 2.0),
                            ConeSpec::branch(n, 1),  ConeSpec::branch(n, n), ConeSpec::pdelta(n, 0.5),
                            ConeSpec::pucci(n, 1.0, 2.0), ConeSpec::sigma(n, 2), ConeSpec::mapb(n, 2, n == 2 ? 1 : 2)};
  if (n % 2 == 0) out.push_back(ConeSpec::complex_branch(n, 1));
  return out;
}

// Independent membership of the defining inequality, from Eigen eigenvalues.
double margin_oracle(const ConeSpec& c, const SymMatrix& a) {
  const Vector ev = oracle::eigvals(a);
  const auto n = static_cast<int>(ev.size());
  if (c.as<cone::Positivity>()) return ev.front();
  if (const auto* p = c.as<cone::Pp>()) return oracle::partial_sum(a, p->p);
  if (const auto* b = c.as<cone::Branch>()) return ev[static_cast<std::size_t>(b->k - 1)];
  if (const auto* d = c.as<cone::PDelta>()) return ev.front() + d->delta * a.trace();
  if (const auto* pu = c.as<cone::Pucci>()) return oracle::pucci(a, pu->lambda, pu->Lambda);
  if (const auto* m = c.as<cone::MApBranch>()) return oracle::pfold(ev, m->p)[static_cast<std::size_t>(m->k - 1)];
  if (const auto* s = c.as<cone::Sigma>()) {
    double worst = 1e300;
    for (int j = 1; j <= s->k; ++j) worst = std::min(worst, oracle::elementary(ev, j));
    return worst;
  }
  (void)n;
  return std::nan("");
}

}  // namespace

TEST_CASE("identity lies in the interior of every catalogue cone") {
  for (int n : {2, 3, 4, 6})
    for (const auto& c : catalogue(n)) {
      INFO(c.describe());
      CHECK(contains(c, SymMatrix::identity(static_cast<std::size_t>(n))).member);
      CHECK(contains(c, SymMatrix::identity(static_cast<std::size_t>(n)), Mode::interior).member);
    }
}

TEST_CASE("membership examples") {
  CHECK(contains(ConeSpec::branch(2, 2), SymMatrix::diagonal({-1.0, 2.0})).member);
  CHECK_FALSE(contains(ConeSpec::branch(2, 1), SymMatrix::diagonal({-1.0, 2.0})).member);
  const auto pu = contains(ConeSpec::pucci(2, 1.0, 2.0), SymMatrix::diagonal({1.0, -1.0}));
  CHECK_FALSE(pu.member);
  CHECK(pu.margin == doctest::Approx(-1.0));
  CHECK(contains(ConeSpec::enlarged(ConeSpec::positivity(2), 1.0), -0.5 * SymMatrix::identity(2)).member);
  CHECK_FALSE(contains(ConeSpec::enlarged(ConeSpec::positivity(2), 0.25), -0.5 * SymMatrix::identity(2)).member);
  CHECK_THROWS_AS(contains(ConeSpec::positivity(3), SymMatrix::identity(2)), DomainError);
}

TEST_CASE("sign of the margin matches an eigenvalue oracle outside the band") {
  std::mt19937_64 g(1);
  for (int n : {2, 3, 4, 5}) {
    for (const auto& c : catalogue(n)) {
      if (c.as<cone::ComplexBranch>()) continue;
      for (int t = 0; t < 300; ++t) {
        const SymMatrix a = oracle::random_sym(static_cast<std::size_t>(n), g);
        const double ref = margin_oracle(c, a);
        if (std::abs(ref) <= 1e-6) continue;
        INFO(c.describe());
        CHECK(contains(c, a).member == (ref > 0));
      }
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ConeSpec::pp(3, 0.5), DomainError);
  CHECK_THROWS_AS(ConeSpec::pp(3, 3.5), DomainError);
  CHECK_THROWS_AS(ConeSpec::branch(3, 4), DomainError);
  CHECK_THROWS_AS(ConeSpec::complex_branch(3, 1), DomainError);
  CHECK_THROWS_AS(ConeSpec::pucci(3, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(ConeSpec::pdelta(3, 0.0), DomainError);
  CHECK_THROWS_AS(ConeSpec::geometric(3, {}), DomainError);
  CHECK_THROWS_AS(ConeSpec::enlarged(ConeSpec::positivity(2), -1.0), DomainError);
  CHECK_THROWS_AS(ConeSpec::geometric(3, {Frame::coordinate(3, 1), Frame::coordinate(3, 2)}), DomainError);
}

TEST_CASE("o_n_invariant flags") {
  CHECK(ConeSpec::pp(3, 2.0).o_n_invariant());
  CHECK(ConeSpec::sigma(3, 2).o_n_invariant());
  CHECK_FALSE(ConeSpec::complex_branch(4, 1).o_n_invariant());
  CHECK_FALSE(ConeSpec::geometric(3, {Frame::coordinate(3, 2)}).o_n_invariant());
  CHECK_FALSE(ConeSpec::horizontal(3, Frame::coordinate(3, 2)).o_n_invariant());
}

TEST_CASE("parse_cone round trips and reports positions") {
  for (const char* s : {"pp:2.5", "branch:3", "cbranch:2", "pdelta:0.5", "pucci:1:2", "sigma:2", "mapb:2:3",
                        "enl:pp:2:0.1", "dual:branch:1", "p"}) {
    const ConeSpec c = parse_cone(s, 4);
    CHECK(parse_cone(c.describe(), 4).describe() == c.describe());
  }
  CHECK(parse_cone("enl:pp:2:0.1", 4).as<cone::Enlarged>()->c == doctest::Approx(0.1));
  try {
    parse_cone("pucci:1:x", 3);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 8);
  }
  CHECK_THROWS_AS(parse_cone("nonsense", 3), ParseError);
  CHECK_THROWS_AS(parse_cone("pp:2:3", 3), ParseError);
}

TEST_CASE("dual membership examples") {
  for (int n : {2, 3, 4})
    for (const auto& c : catalogue(n)) {
      INFO(c.describe());
      CHECK(dual_contains(c, SymMatrix(static_cast<std::size_t>(n))).member);
    }
  CHECK(dual_contains(ConeSpec::positivity(2), SymMatrix::diagonal({-1.0, 2.0})).member);
  CHECK_FALSE(dual_contains(ConeSpec::positivity(2), SymMatrix::diagonal({-1.0, -2.0})).member);
}

TEST_CASE("trace cone is self dual") {
  Rng r(0);
  for (int n : {2, 3, 5}) {
    const ConeSpec t = ConeSpec::pp(n, n);
    for (int i = 0; i < 1000; ++i) {
      const SymMatrix a = random_goe(static_cast<std::size_t>(n), r);
      if (std::abs(a.trace()) <= interior_tolerance(a)) continue;
      CHECK(dual_contains(t, a).member == contains(t, a).member);
    }
  }
}

TEST_CASE("fast and definitional dual agree on the catalogue") {
  Rng r(3);
  for (int n : {2, 3, 4}) {
    for (const auto& c : catalogue(n)) {
      for (int i = 0; i < 1000; ++i) {
        const SymMatrix a = random_goe(static_cast<std::size_t>(n), r);
        const auto def = dual_contains_definitional(c, a);
        if (std::abs(def.margin) <= interior_tolerance(a)) continue;
        INFO(c.describe());
        CHECK(dual_contains(c, a).member == def.member);
      }
    }
  }
}

TEST_CASE("dual closed forms") {
  CHECK(dual_closed_form(ConeSpec::branch(5, 2))->describe() == "branch:4");
  CHECK(dual_closed_form(ConeSpec::positivity(3))->describe() == "branch:3");
  CHECK(dual_closed_form(ConeSpec::complex_branch(6, 1))->describe() == "cbranch:3");
  CHECK(dual_closed_form(ConeSpec::pp(3, 3))->describe() == "pp:3");
  CHECK_FALSE(dual_closed_form(ConeSpec::pucci(3, 1, 2)).has_value());
}

TEST_CASE("branch duality over samples") {
  for (int n = 2; n <= 6; ++n)
    for (int k = 1; k <= n; ++k) {
      const auto d = check_duality(ConeSpec::branch(n, k), {0, 2000, 1.0, 2});
      INFO(n, " ", k);
      CHECK(d.pass);
      CHECK(d.reference == "branch:" + std::to_string(n - k + 1));
    }
  for (int m = 1; m <= 3; ++m)
    for (int k = 1; k <= m; ++k) CHECK(check_duality(ConeSpec::complex_branch(2 * m, k), {0, 2000, 1.0, 2}).pass);
  const auto inv = check_duality(ConeSpec::pucci(3, 1.0, 2.0), {0, 500, 1.0, 1});
  CHECK(inv.pass);
  CHECK(inv.reference == "involution");
}

TEST_CASE("positivity of every catalogue cone") {
  for (int n : {2, 3, 4})
    for (const auto& c : catalogue(n)) {
      INFO(c.describe());
      CHECK(check_relation(c, ConeSpec::positivity(n), {7, 500, 1.0, 1}).pass);
    }
  CHECK(check_relation(ConeSpec::horizontal(3, Frame::coordinate(3, 2)), ConeSpec::positivity(3), {0, 300, 1.0, 1}).pass);
}

TEST_CASE("monotonicity relations") {
  for (int n = 3; n <= 5; ++n) {
    CHECK(check_relation(ConeSpec::pp(n, 2), ConeSpec::pp(n, 2), {1, 500, 1.0, 1}).pass);
    CHECK(check_relation(ConeSpec::dual(ConeSpec::pp(n, 2)), ConeSpec::pp(n, 2), {1, 500, 1.0, 1}).pass);
  }
  const auto bad = check_relation(ConeSpec::branch(3, 1), ConeSpec::branch(3, 3), {0, 500, 1.0, 1});
  REQUIRE_FALSE(bad.pass);
  CHECK(contains(ConeSpec::positivity(3), *bad.a).member);
  CHECK(contains(ConeSpec::branch(3, 3), *bad.b).member);
  CHECK_FALSE(contains(ConeSpec::positivity(3), *bad.a + *bad.b).member);
}

TEST_CASE("F + M in F iff dual F + M in dual F") {
  const std::vector<std::pair<ConeSpec, ConeSpec>> pairs{
      {ConeSpec::pp(4, 2), ConeSpec::pp(4, 2)},
      {ConeSpec::mapb(4, 2, 3), ConeSpec::pp(4, 2)},
      {ConeSpec::branch(4, 1), ConeSpec::branch(4, 4)},
      {ConeSpec::branch(4, 2), ConeSpec::pp(4, 2)}};
  for (const auto& [f, m] : pairs) {
    const bool a = check_relation(f, m, {5, 800, 1.0, 1}).pass;
    const bool b = check_relation(ConeSpec::dual(f), m, {5, 800, 1.0, 1}).pass;
    INFO(f.describe(), " / ", m.describe());
    CHECK(a == b);
  }
}

TEST_CASE("check_relation is independent of the worker count") {
  const auto one = check_relation(ConeSpec::branch(4, 1), ConeSpec::branch(4, 2), {9, 400, 1.0, 1});
  const auto four = check_relation(ConeSpec::branch(4, 1), ConeSpec::branch(4, 2), {9, 400, 1.0, 4});
  REQUIRE_FALSE(one.pass);
  CHECK(one.failing_index == four.failing_index);
  CHECK(*one.a == *four.a);
  CHECK(*one.b == *four.b);
}

TEST_CASE("sample_member returns members") {
  Rng r(12);
  for (const auto& c : catalogue(4))
    for (int i = 0; i < 100; ++i) CHECK(contains(c, sample_member(c, r, 1.0)).member);
}

TEST_CASE("sphere_sample") {
  for (std::size_t n : {2u, 3u, 5u}) {
    const auto s = sphere_sample(n, 50);
    CHECK(s.size() >= 2 * 50);
    for (const auto& v : s) CHECK(norm2(v) == doctest::Approx(1.0));
    CHECK(s == sphere_sample(n, 50));
  }
}

TEST_CASE("pp_subset_test examples") {
  CHECK(pp_subset_test(ConeSpec::positivity(3), 1.0).pass);
  CHECK_FALSE(pp_subset_test(ConeSpec::positivity(3), 1.01).pass);
  CHECK(pp_subset_test(ConeSpec::pdelta(3, 1.0), 2.0).pass);
  CHECK_FALSE(pp_subset_test(ConeSpec::pdelta(3, 1.0), 2.01).pass);
  for (int q = 1; q <= 4; ++q)
    for (double p : {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) {
      // s_q(I - p P_e) = q - p for integer q.
      const auto r = pp_subset_test(ConeSpec::pp(4, q), p);
      CHECK(r.pass == (p <= q));
      CHECK(r.worst_margin == doctest::Approx(q - p));
    }
}

TEST_CASE("every plane set contains P_p when the planes have dimension p") {
  Rng r(4);
  for (std::size_t p = 1; p <= 3; ++p) {
    std::vector<Frame> frames;
    for (int i = 0; i < 5; ++i) frames.push_back(random_frame(4, p, r));
    CHECK(pp_subset_test(ConeSpec::geometric(4, frames), static_cast<double>(p)).pass);
  }
}

TEST_CASE("riesz characteristics") {
  CHECK(riesz_characteristic(ConeSpec::sigma(4, 2)).value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(riesz_characteristic(ConeSpec::pdelta(3, 1.0)).value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(riesz_characteristic(ConeSpec::pucci(3, 1.0, 2.0)).value == doctest::Approx(2.0).epsilon(1e-7));
  for (int n = 2; n <= 6; ++n) CHECK(riesz_characteristic(ConeSpec::positivity(n)).value == doctest::Approx(1.0));
  for (double p : {1.0, 1.7, 2.0, 2.9}) CHECK(riesz_characteristic(ConeSpec::pp(3, p)).value == doctest::Approx(p).epsilon(1e-7));
  const auto top = riesz_characteristic(ConeSpec::branch(3, 2));
  CHECK(top.at_least_n);
  CHECK(top.value == 3.0);
  const auto geo = riesz_characteristic(ConeSpec::geometric(3, {Frame::coordinate(3, 2)}));
  CHECK(geo.sampled);
  CHECK(geo.value >= 2.0 - 1e-7);
}

TEST_CASE("Kernel Hessian membership matches the subset test") {
  // Corollary-style bridge: eigenvalues of the kernel Hessian are (1 - p) once and 1 otherwise, up to scale.
  Rng r(6);
  for (const auto& m : catalogue(4)) {
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const Vector e = random_unit_vector(4, r);
      const SymMatrix h = 2.3 * (SymMatrix::identity(4) - p * projector(e));
      const auto mem = contains(m, h);
      if (std::abs(mem.margin) <= 1e-6) continue;
      INFO(m.describe(), " p=", p);
      CHECK(mem.member == pp_subset_test(m, p).pass);
    }
  }
}

TEST_CASE("enlarged nesting") {
  Rng r(8);
  const ConeSpec f = ConeSpec::pp(3, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const SymMatrix a = random_goe(3, r);
    const bool in_f = contains(f, a).member;
    const bool in_half = contains(ConeSpec::enlarged(f, 0.5), a).member;
    const bool in_one = contains(ConeSpec::enlarged(f, 1.0), a).member;
    if (in_f) CHECK(in_half);
    if (in_half) CHECK(in_one);
    const double m = cone_margin(f, a);
    if (std::abs(m) > 1e-3) {
      bool all = true;
      for (double c = 1.0; c > 1e-5; c *= 0.5) all = all && contains(ConeSpec::enlarged(f, c), a).member;
      CHECK(all == in_f);
    }
  }
}

TEST_CASE("Pucci index family and Garding factors") {
  // Brute-force segment-cube oracle: sample the open segment finely.
  for (int n : {2, 3, 4}) {
    for (const auto& [lam, Lam] : std::vector<std::pair<double, double>>{{1, 2}, {1, 3}, {2, 5}}) {
      std::vector<std::uint32_t> brute;
      for (std::uint32_t m = 0; m < (1u << n); ++m) {
        bool hits = false;
        for (int s = 1; s < 4000 && !hits; ++s) {
          const double t = s / 4000.0;
          bool inside = true;
          for (int i = 0; i < n; ++i) {
            const double v = t * ((m & (1u << i)) ? lam : Lam);
            inside = inside && v >= lam && v <= Lam;
          }
          hits = inside;
        }
        if (!hits) brute.push_back(m);
      }
      const auto fam = pucci_index_family(n, lam, Lam);
      CHECK(fam == brute);
      CHECK(fam.size() == (1u << n) - 1);
    }
  }
  const auto g = garding_pucci(SymMatrix::identity(2), 1.0, 2.0);
  CHECK(g.value == doctest::Approx(18.0));
  auto f = g.factors;
  std::sort(f.begin(), f.end());
  CHECK(f == std::vector<double>{2.0, 3.0, 3.0});
  CHECK_THROWS_AS(garding_pucci(SymMatrix::identity(13), 1.0, 2.0), ResourceError);
}
