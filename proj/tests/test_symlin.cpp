#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpath/rng.hpp"
#include "cpath/symlin.hpp"

using namespace cpath;

namespace {

SymMat sym2(double a, double b, double c) {
  SymMat m(2);
  m.set(0, 0, a);
  m.set(0, 1, b);
  m.set(1, 1, c);
  return m;
}

// Independent reconstruction oracle for the eigensolver.
double reconstruction_residual(const SymMat& x, const EigenDecomp& d) {
  Mat lam(x.dim(), x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) lam(i, i) = d.values[i];
  const Mat rebuilt = d.vectors * lam * transpose(d.vectors);
  return frob_norm(rebuilt - x.mat());
}

double orthogonality_residual(const Mat& q) {
  return frob_norm(transpose(q) * q - Mat::identity(q.rows()));
}

}  // namespace

TEST_CASE("SymMat constructor symmetrizes small violations and rejects large") {
  Mat m(2, 2);
  m(0, 0) = 1.0;
  m(0, 1) = 2.0;
  m(1, 0) = 2.0 + 1e-14;
  m(1, 1) = 3.0;
  SymMat s(m);
  CHECK(s(0, 1) == s(1, 0));

  m(1, 0) = 2.001;
  CHECK_THROWS_AS(SymMat{m}, ValidationError);
  CHECK_THROWS_AS(SymMat(0), DimError);
}

TEST_CASE("svec/smat round trip and isometry") {
  Rng rng(42);
  for (std::size_t m = 1; m <= 20; ++m) {
    const SymMat x = rng.random_sym(m, 2.0);
    const SymMat back = smat(svec(x));
    CHECK(frob_norm(back.mat() - x.mat()) <=
          1e-14 * std::max(1.0, frob_norm(x.mat())));
  }
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rep % 8;
    const SymMat x = rng.random_sym(m);
    const SymMat y = rng.random_sym(m);
    const double lhs = dot(svec(x), svec(y));
    const double rhs = inner(x, y);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + x.frob() * y.frob()));
  }
}

TEST_CASE("eigh_ascending: identity and diagonal cases") {
  const EigenDecomp id = eigh_ascending(SymMat::identity(2));
  CHECK(id.values[0] == doctest::Approx(1.0));
  CHECK(id.values[1] == doctest::Approx(1.0));
  CHECK(frob_norm(id.vectors - Mat::identity(2)) <= 1e-12);

  const EigenDecomp d = eigh_ascending(SymMat::diag({3.0, 0.0, 1.0}));
  CHECK(d.values[0] == doctest::Approx(0.0));
  CHECK(d.values[1] == doctest::Approx(1.0));
  CHECK(d.values[2] == doctest::Approx(3.0));
  // Permutation eigenvectors, sign fixed.
  CHECK(d.vectors(1, 0) == doctest::Approx(1.0));
  CHECK(d.vectors(2, 1) == doctest::Approx(1.0));
  CHECK(d.vectors(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("eigh_ascending: seeded 5x5 reconstruction") {
  Rng rng(7);
  const SymMat x = rng.random_sym(5, 1.0);
  const EigenDecomp d = eigh_ascending(x);
  CHECK(reconstruction_residual(x, d) <= 1e-10 * std::max(1.0, x.frob()));
  CHECK(orthogonality_residual(d.vectors) <= 1e-10);
}

TEST_CASE("eigh_ascending: 1000 seeded matrices m in 1..8") {
  Rng rng(20260809);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t m = 1 + rep % 8;
    const SymMat x = rng.random_sym(m, 3.0);
    const EigenDecomp d = eigh_ascending(x);
    CHECK(reconstruction_residual(x, d) <= 1e-10 * std::max(1.0, x.frob()));
    CHECK(orthogonality_residual(d.vectors) <= 1e-10);
    for (std::size_t i = 0; i + 1 < m; ++i) CHECK(d.values[i] <= d.values[i + 1]);
  }
}

TEST_CASE("eigh_ascending is deterministic") {
  Rng rng(11);
  const SymMat x = rng.random_sym(6);
  const EigenDecomp a = eigh_ascending(x);
  const EigenDecomp b = eigh_ascending(x);
  CHECK(frob_norm(a.vectors - b.vectors) == 0.0);
}

TEST_CASE("lyap_apply: identity, diagonal, and eigenbasis oracle") {
  const SymMat y = sym2(0.4, -0.3, 1.1);
  const SymMat two_y = lyap_apply(SymMat::identity(2), y);
  CHECK(frob_norm(two_y.mat() - y.scaled(2.0).mat()) <= 1e-15);

  const SymMat x = SymMat::diag({1.0, 2.0});
  const SymMat w1 = lyap_apply(x, sym2(0.0, 1.0, 0.0));
  CHECK(w1(0, 0) == doctest::Approx(0.0));
  CHECK(w1(0, 1) == doctest::Approx(3.0));
  CHECK(w1(1, 1) == doctest::Approx(0.0));

  // Elementwise oracle W_ij = (lam_i + lam_j) V_ij in the eigenbasis.
  const SymMat w2 = lyap_apply(x, sym2(1.0, 1.0, 2.0));
  CHECK(w2(0, 0) == doctest::Approx(2.0));
  CHECK(w2(0, 1) == doctest::Approx(3.0));
  CHECK(w2(1, 1) == doctest::Approx(8.0));

  CHECK_THROWS_AS(lyap_apply(SymMat::identity(2), SymMat::identity(3)), DimError);
}

TEST_CASE("lyap_solve: elementwise division oracle and inverse property") {
  const SymMat x = SymMat::diag({1.0, 2.0});
  const SymMat v = lyap_solve(x, sym2(2.0, 3.0, 8.0));
  CHECK(v(0, 0) == doctest::Approx(1.0));
  CHECK(v(0, 1) == doctest::Approx(1.0));
  CHECK(v(1, 1) == doctest::Approx(2.0));

  const SymMat w = sym2(0.3, -0.2, 0.9);
  const SymMat half = lyap_solve(SymMat::identity(2), w);
  CHECK(frob_norm(half.mat() - w.scaled(0.5).mat()) <= 1e-15);

  CHECK_THROWS_AS(lyap_solve(SymMat::diag({1.0, 0.0}), w), NotPsdError);

  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rep % 7;
    const SymMat spd = rng.random_psd(m, m, 0.3, 3.0);
    const SymMat y = rng.random_sym(m);
    const SymMat round = lyap_solve(spd, lyap_apply(spd, y));
    CHECK(frob_norm(round.mat() - y.mat()) <= 1e-11 * std::max(1.0, y.frob()));
  }
}

TEST_CASE("pinv_psd: diagonal, identity, and Penrose identities") {
  const SymMat p = pinv_psd(SymMat::diag({0.0, 2.0}));
  CHECK(p(0, 0) == doctest::Approx(0.0));
  CHECK(p(1, 1) == doctest::Approx(0.5));
  const SymMat pid = pinv_psd(SymMat::identity(3));
  CHECK(frob_norm(pid.mat() - Mat::identity(3)) <= 1e-12);

  CHECK_THROWS_AS(pinv_psd(SymMat::diag({-1.0, 2.0})), NotPsdError);

  Rng rng(1234);
  for (int rep = 0; rep < 100; ++rep) {
    const SymMat x = rng.random_psd(4, 2);
    const SymMat xp = pinv_psd(x);
    const Mat xm = x.mat(), pm = xp.mat();
    CHECK(frob_norm(xm * pm * xm - xm) <= 1e-9);
    CHECK(frob_norm(pm * xm * pm - pm) <= 1e-9);
    CHECK(frob_norm(transpose(xm * pm) - xm * pm) <= 1e-9);
    CHECK(frob_norm(transpose(pm * xm) - pm * xm) <= 1e-9);
  }
}

TEST_CASE("min_singular_value: identity and singular diagonal") {
  CHECK(min_singular_value(Mat::identity(4)) == doctest::Approx(1.0));
  Mat d(2, 2);
  d(0, 0) = 3.0;
  CHECK(min_singular_value(d) <= 1e-12);
}

TEST_CASE("chol_psd_test") {
  CHECK(chol_psd_test(SymMat::identity(3)));
  CHECK_FALSE(chol_psd_test(SymMat::diag({1.0, 0.0})));
  CHECK(chol_psd_test(sym2(2.0, 1.0, 2.0)));  // eigenvalues 1 and 3
}

TEST_CASE("lu_solve recovers random systems") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rep % 9;
    const Mat a = rng.normal_mat(n, n);
    const Vec xref = rng.normal_vec(n);
    const Vec x = lu_solve(a, a * xref);
    CHECK(norm2(vsub(x, xref)) <= 1e-8 * std::max(1.0, norm2(xref)));
  }
  Mat sing(2, 2);
  sing(0, 0) = 1.0;
  sing(0, 1) = 1.0;
  sing(1, 0) = 1.0;
  sing(1, 1) = 1.0;
  CHECK_THROWS_AS(lu_solve(sing, Vec{1.0, 0.0}), SingularSystemError);
}

TEST_CASE("lstsq_minnorm and nullspace") {
  // Rank-1 system: x + y = 2 has min-norm solution (1, 1).
  Mat a(1, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 1.0;
  const LstsqResult r = lstsq_minnorm(a, {2.0});
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
  CHECK(r.residual <= 1e-12);
  CHECK(r.rank == 1);

  const Mat ns = nullspace(a);
  CHECK(ns.cols() == 1);
  CHECK(std::fabs(ns(0, 0) + ns(1, 0)) <= 1e-12);
  CHECK(std::fabs(norm2({ns(0, 0), ns(1, 0)}) - 1.0) <= 1e-12);

  CHECK(numerical_rank(a) == 1);

  // Complement of a 1-dim subspace in R^3.
  Mat u(3, 1);
  u(0, 0) = 1.0;
  const Mat comp = orth_complement(u, 3);
  CHECK(comp.cols() == 2);
  CHECK(frob_norm(transpose(comp) * u) <= 1e-12);
  CHECK(frob_norm(transpose(comp) * comp - Mat::identity(2)) <= 1e-12);
}

TEST_CASE("empty shapes behave") {
  const Mat empty(0, 3);
  const Mat ns = nullspace(empty);
  CHECK(ns.cols() == 3);
  const LstsqResult r = lstsq_minnorm(Mat(2, 0), {1.0, 1.0});
  CHECK(r.x.empty());
  CHECK(r.residual == doctest::Approx(std::sqrt(2.0)));
}
