#include <cmath>
#include <numbers>

#include "conecalc/errors.hpp"
#include "conecalc/symmat.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace conecalc;

TEST_CASE("construction symmetrizes exactly") {
  const std::vector<double> raw{1.0, 2.0, 3.0, 4.0};
  const SymMatrix a(2, raw);
  CHECK(a(0, 1) == a(1, 0));
  CHECK(a(0, 1) == doctest::Approx(2.5));
  CHECK_THROWS_AS(SymMatrix(0), DomainError);
}

TEST_CASE("eigh on diagonal and identity") {
  const Spectrum s = eigh(SymMatrix::diagonal({3.0, 1.0, 2.0}));
  CHECK(s.eigenvalues == Vector{1.0, 2.0, 3.0});
  for (double v : eigh(SymMatrix::identity(4)).eigenvalues) CHECK(v == 1.0);
}

TEST_CASE("eigh matches the 2x2 closed form") {
  std::mt19937_64 g(11);
  for (int t = 0; t < 200; ++t) {
    const SymMatrix a = oracle::random_sym(2, g, 3.0);
    const auto [lo, hi] = oracle::eig2(a(0, 0), a(0, 1), a(1, 1));
    const Vector ev = eigenvalues(a);
    CHECK(std::abs(ev[0] - lo) <= 1e-12 * (1.0 + std::abs(lo)));
    CHECK(std::abs(ev[1] - hi) <= 1e-12 * (1.0 + std::abs(hi)));
  }
}

TEST_CASE("eigh reconstruction and orthonormality, n = 2..8") {
  for (std::size_t n = 2; n <= 8; ++n) {
    std::mt19937_64 g(100 + n);
    for (int t = 0; t < 1000; ++t) {
      const SymMatrix a = oracle::random_sym(n, g, 2.0);
      const Spectrum s = eigh(a);
      const double scale = 1.0 + a.norm_inf();
      REQUIRE(oracle::max_abs_diff(s.reconstruct(), a) <= 1e-10 * scale);
      for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) REQUIRE(s.eigenvalues[i] <= s.eigenvalues[i + 1]);
        for (std::size_t j = 0; j < n; ++j)
          REQUIRE(std::abs(dot(s.eigenvectors[i], s.eigenvectors[j]) - (i == j ? 1.0 : 0.0)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("eigh agrees with an independent dense solver") {
  std::mt19937_64 g(5);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + t % 9;
    const SymMatrix a = oracle::random_sym(n, g);
    const Vector mine = eigenvalues(a), ref = oracle::eigvals(a);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(mine[i] - ref[i]) <= 1e-10 * (1.0 + a.norm_inf()));
  }
}

TEST_CASE("eigh is deterministic and sign-fixed") {
  std::mt19937_64 g(9);
  const SymMatrix a = oracle::random_sym(5, g);
  const Spectrum s1 = eigh(a), s2 = eigh(a);
  CHECK(s1.eigenvalues == s2.eigenvalues);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(s1.eigenvectors[k] == s2.eigenvectors[k]);
    const auto& v = s1.eigenvectors[k];
    const auto it = std::max_element(v.begin(), v.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    CHECK(*it > 0.0);
  }
}

TEST_CASE("eigh rejects non-finite input") {
  SymMatrix a(2);
  a.set(0, 1, std::nan(""));
  CHECK_THROWS_AS(eigh(a), DomainError);
}

TEST_CASE("partial_sum examples") {
  CHECK(partial_sum(SymMatrix(3), 2.0) == 0.0);
  CHECK(partial_sum(SymMatrix::diagonal({-2.0, 1.0, 1.0, 1.0}), 2.5) == doctest::Approx(-0.5));
  std::mt19937_64 g(3);
  for (double p : {1.5, 2.0, 3.0}) {
    for (int t = 0; t < 20; ++t) {
      const Vector e = oracle::random_point(4, g);
      const SymMatrix m = SymMatrix::identity(4) - p * projector(e);
      CHECK(std::abs(partial_sum(m, p)) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(partial_sum(SymMatrix(3), 0.5), DomainError);
  CHECK_THROWS_AS(partial_sum(SymMatrix(3), 3.5), DomainError);
}

TEST_CASE("partial_sum matches the oracle, is concave and orthogonally invariant") {
  std::mt19937_64 g(21);
  Rng r(4);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + t % 5;
    std::uniform_real_distribution<double> up(1.0, static_cast<double>(n));
    const double p = up(g);
    const SymMatrix a = oracle::random_sym(n, g), b = oracle::random_sym(n, g);
    CHECK(std::abs(partial_sum(a, p) - oracle::partial_sum(a, p)) <= 1e-10);
    CHECK(partial_sum(0.5 * a + 0.5 * b, p) >= 0.5 * partial_sum(a, p) + 0.5 * partial_sum(b, p) - 1e-12);
    const auto q = random_orthogonal(n, r);
    SymMatrix qa(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l) s += q[k][i] * a(k, l) * q[l][j];
        qa.set(i, j, s);
      }
    CHECK(std::abs(partial_sum(qa, p) - partial_sum(a, p)) <= 1e-9);
  }
}

TEST_CASE("projector") {
  const Vector e1{1.0, 0.0};
  CHECK(projector(e1) == SymMatrix::diagonal({1.0, 0.0}));
  std::mt19937_64 g(8);
  for (int t = 0; t < 50; ++t) {
    const SymMatrix p = projector(oracle::random_point(4, g));
    CHECK(p.trace() == doctest::Approx(1.0).epsilon(1e-14));
    SymMatrix p2(4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += p(i, k) * p(k, j);
        p2.set(i, j, s);
      }
    CHECK(oracle::max_abs_diff(p2, p) <= 1e-14);
  }
  CHECK_THROWS_AS(projector(Vector{0.0, 0.0}), DomainError);
}

TEST_CASE("hermitian eigenvalues") {
  CHECK(hermitian_eigenvalues(SymMatrix::identity(4)) == Vector{1.0, 1.0});
  CHECK(std::abs(hermitian_eigenvalues(SymMatrix::diagonal({1.0, -1.0}))[0]) <= 1e-15);
  CHECK(hermitian_eigenvalues(SymMatrix::diagonal({1.0, 0.0}))[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(hermitian_eigenvalues(SymMatrix::identity(3)), DomainError);

  // Hand formula for A_C = (A - JAJ)/2 with J(x, y) = (y, -x) per coordinate pair.
  std::mt19937_64 g(17);
  const SymMatrix a = oracle::random_sym(4, g);
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(4, 4);
  for (int k = 0; k < 2; ++k) {
    jm(2 * k + 1, 2 * k) = 1.0;
    jm(2 * k, 2 * k + 1) = -1.0;
  }
  const Eigen::MatrixXd ac = 0.5 * (oracle::to_eigen(a) - jm * oracle::to_eigen(a) * jm);
  CHECK((oracle::to_eigen(hermitian_part(a)) - ac).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("hermitian eigenvalues are invariant under unitary changes of basis") {
  std::mt19937_64 g(23);
  for (int t = 0; t < 50; ++t) {
    const SymMatrix a = oracle::random_sym(4, g);
    // Block rotation by angle theta in each complex coordinate commutes with J.
    const double th1 = 0.3 + t, th2 = -1.1 + 0.5 * t;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 4);
    q.block<2, 2>(0, 0) << std::cos(th1), -std::sin(th1), std::sin(th1), std::cos(th1);
    q.block<2, 2>(2, 2) << std::cos(th2), -std::sin(th2), std::sin(th2), std::cos(th2);
    const Eigen::MatrixXd rot = q * oracle::to_eigen(a) * q.transpose();
    const SymMatrix b(4, std::vector<double>(rot.data(), rot.data() + 16));
    const Vector ea = hermitian_eigenvalues(a), eb = hermitian_eigenvalues(b);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(ea[i] - eb[i]) <= 1e-10);
  }
}

TEST_CASE("sigma_elementary") {
  const SymMatrix d = SymMatrix::diagonal({1.0, 2.0, 3.0});
  CHECK(sigma_elementary(d, 3) == doctest::Approx(6.0));
  CHECK(sigma_elementary(d, 2) == doctest::Approx(11.0));
  std::mt19937_64 g(31);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 7;
    const SymMatrix a = oracle::random_sym(n, g);
    CHECK(std::abs(sigma_elementary(a, 1) - a.trace()) <= 1e-10);
    const Vector ev = oracle::eigvals(a);
    for (int k = 1; k <= static_cast<int>(n); ++k)
      CHECK(std::abs(sigma_elementary(a, k) - oracle::elementary(ev, k)) <= 1e-9 * (1.0 + std::pow(a.norm_inf(), k)));
  }
  CHECK_THROWS_AS(sigma_elementary(d, 0), DomainError);
  CHECK_THROWS_AS(sigma_elementary(d, 4), DomainError);
}

TEST_CASE("trace_over_frame") {
  std::mt19937_64 g(41);
  Rng r(2);
  const SymMatrix a = oracle::random_sym(5, g);
  CHECK(trace_over_frame(a, Frame::coordinate(5, 5)) == doctest::Approx(a.trace()));
  for (std::size_t p = 1; p <= 5; ++p) {
    const Frame w = random_frame(5, p, r);
    CHECK(trace_over_frame(SymMatrix::identity(5), w) == doctest::Approx(static_cast<double>(p)));
    // Re-basing the same plane leaves the trace alone.
    std::vector<Vector> mixed = w.vectors();
    if (p >= 2)
      for (std::size_t k = 0; k < 5; ++k) {
        const double x = mixed[0][k], y = mixed[1][k];
        mixed[0][k] = std::cos(0.7) * x - std::sin(0.7) * y;
        mixed[1][k] = std::sin(0.7) * x + std::cos(0.7) * y;
      }
    CHECK(std::abs(trace_over_frame(a, Frame(mixed)) - trace_over_frame(a, w)) <= 1e-12);
  }
  CHECK_THROWS_AS(trace_over_frame(a, Frame::coordinate(4, 2)), DomainError);
}

TEST_CASE("frame validation") {
  CHECK_THROWS_AS(Frame({Vector{1.0, 0.0}, Vector{1.0, 1.0}}), DomainError);
  const Frame f = Frame::orthonormalized({Vector{1.0, 1.0, 0.0}, Vector{1.0, 0.0, 0.0}});
  CHECK(std::abs(dot(f[0], f[1])) <= 1e-12);
}

TEST_CASE("pfold_sums") {
  CHECK(pfold_sums(SymMatrix::diagonal({1.0, 2.0, 3.0}), 2) == Vector{3.0, 4.0, 5.0});
  std::mt19937_64 g(51);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 6;
    const SymMatrix a = oracle::random_sym(n, g);
    for (int p = 1; p <= static_cast<int>(n); ++p) {
      const Vector s = pfold_sums(a, p);
      const Vector ref = oracle::pfold(oracle::eigvals(a), p);
      REQUIRE(s.size() == ref.size());
      CHECK(std::abs(s.front() - partial_sum(a, p)) <= 1e-10);
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s[i] - ref[i]) <= 1e-10);
      const Vector shifted = pfold_sums(a + 0.75 * SymMatrix::identity(n), p);
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(shifted[i] - s[i] - 0.75 * p) <= 1e-10);
    }
    CHECK(pfold_sums(a, static_cast<int>(n)).size() == 1);
  }
  CHECK_THROWS_AS(pfold_sums(SymMatrix::identity(30), 15), ResourceError);
}
