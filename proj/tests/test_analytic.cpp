#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpath/analytic.hpp"
#include "cpath/lab.hpp"
#include "cpath/path.hpp"
#include "cpath/rng.hpp"

using namespace cpath;

namespace {

EigenSplit split_of(const BuiltinInstance& b) {
  return eigen_split(b.inst.eval_G(b.oracle.xstar));
}

double logdet_spd(const Mat& block) {
  Mat lower;
  REQUIRE(cholesky(SymMat::sym_of(block), lower));
  double s = 0.0;
  for (std::size_t i = 0; i < block.rows(); ++i) s += std::log(lower(i, i));
  return 2.0 * s;
}

// Prop-style identity checks shared by the closed-form and seeded cases.
void check_limit_identities(const BuiltinInstance& b, const EigenSplit& split,
                            const SymMat& y_a, const XiStarResult& xi) {
  const Mat g_ff = block_of(b.inst.eval_G(b.oracle.xstar), split, Block::FF);
  const Mat y_ee = block_of(y_a, split, Block::EE);
  const std::size_t r = split.rstar;
  const std::size_t q = split.null_dim();

  if (r > 0) {
    // dY^FF = (G*^FF)^-1
    const Mat dyff = block_of(xi.dY, split, Block::FF);
    const Mat prod = dyff * g_ff;
    CHECK(frob_norm(prod - Mat::identity(r)) <= 1e-9);
  }
  if (q > 0) {
    // DeltaG^EE(x*; xi) = (Y_a^EE)^-1
    const Mat dgee =
        block_of(delta_G(b.inst, b.oracle.xstar, xi.xi), split, Block::EE);
    CHECK(frob_norm(dgee * y_ee - Mat::identity(q)) <= 1e-9);
  }
  if (r > 0 && q > 0) {
    // dY^EF = -Y_a^EE DeltaG^EF(x*; xi) (G*^FF)^-1
    const Mat dgef =
        block_of(delta_G(b.inst, b.oracle.xstar, xi.xi), split, Block::EF);
    const Mat lhs = block_of(xi.dY, split, Block::EF) * g_ff;
    const Mat rhs = -1.0 * (y_ee * dgef);
    CHECK(frob_norm(lhs - rhs) <= 1e-9 * std::max(1.0, frob_norm(rhs)));
  }
}

}  // namespace

TEST_CASE("parametrize_multiplier_set dimensions") {
  {
    const auto b = builtin_instance("deg-twin");
    const auto param = parametrize_multiplier_set(b.inst, b.oracle.xstar, split_of(b));
    CHECK(param.dim() == 2);  // off-diagonal and traceless diagonal directions
  }
  {
    const auto b = builtin_instance("deg-mixed");
    const auto param = parametrize_multiplier_set(b.inst, b.oracle.xstar, split_of(b));
    CHECK(param.dim() == 2);
  }
  {
    const auto b = builtin_instance("nondeg-control");
    const auto param = parametrize_multiplier_set(b.inst, b.oracle.xstar, split_of(b));
    CHECK(param.dim() == 0);
  }
}

TEST_CASE("multiplier family satisfies stationarity identically") {
  Rng rng(6);
  for (const char* name : {"deg-twin", "deg-mixed", "deg-curve"}) {
    const auto b = builtin_instance(name);
    const EigenSplit split = split_of(b);
    const auto param = parametrize_multiplier_set(b.inst, b.oracle.xstar, split);
    for (int rep = 0; rep < 10; ++rep) {
      const Vec t = rng.normal_vec(param.dim());
      Mat y_full(b.inst.m, b.inst.m);
      if (split.null_dim() > 0)
        y_full = split.Estar * param.y_ee_at(t) * transpose(split.Estar);
      const PrimalDualTriplet w{b.oracle.xstar, SymMat::sym_of(y_full),
                                param.z_at(t)};
      CHECK(norm2(grad_x_lagrangian(b.inst, w)) <= 1e-10);
    }
  }
}

TEST_CASE("analytic_center closed forms") {
  {
    const auto b = builtin_instance("deg-twin");
    const auto ac = analytic_center(b.inst, b.oracle.xstar, split_of(b));
    CHECK(frob_norm(ac.Y_a.mat() - (0.5 * Mat::identity(2))) <= 1e-9);
    CHECK(ac.cert_residual <= 1e-9);
    REQUIRE(ac.certificate_v.size() == 1);
    CHECK(std::fabs(ac.certificate_v[0] - 2.0) <= 1e-8);
  }
  {
    const auto b = builtin_instance("deg-mixed");
    const auto ac = analytic_center(b.inst, b.oracle.xstar, split_of(b));
    CHECK(frob_norm(ac.Y_a.mat() - SymMat::diag({0.5, 0.5, 0.0}).mat()) <= 1e-9);
    CHECK(std::fabs(ac.z_a[0]) <= 1e-9);
    CHECK(ac.cert_residual <= 1e-9);
    CHECK(std::fabs(ac.certificate_v[0] - 2.0) <= 1e-8);
    CHECK(std::fabs(ac.certificate_v[1]) <= 1e-9);
    CHECK(std::fabs(ac.certificate_v[2]) <= 1e-9);
  }
  {
    const auto b = builtin_instance("nondeg-control");
    const auto ac = analytic_center(b.inst, b.oracle.xstar, split_of(b));
    CHECK(frob_norm(ac.Y_a.mat() - Mat::identity(2)) <= 1e-9);
  }
}

TEST_CASE("analytic_center: seeded warm starts agree") {
  Rng rng(404);
  for (const char* name : {"deg-twin", "deg-cross", "deg-mixed"}) {
    const auto b = builtin_instance(name);
    const EigenSplit split = split_of(b);
    const auto base = analytic_center(b.inst, b.oracle.xstar, split);
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t q = split.null_dim();
      const Mat warm = rng.random_psd(q, q, 0.2, 2.0).mat();
      const auto ac = analytic_center(b.inst, b.oracle.xstar, split, warm);
      CHECK(frob_norm(ac.Y_a.mat() - base.Y_a.mat()) <= 1e-9);
    }
  }
}

TEST_CASE("analytic_center maximizes log det over seeded feasible multipliers") {
  const auto b = builtin_instance("deg-mixed");
  const EigenSplit split = split_of(b);
  const auto param = parametrize_multiplier_set(b.inst, b.oracle.xstar, split);
  const auto ac = analytic_center(b.inst, b.oracle.xstar, split);
  // Recover the center's parameter by projection.
  const Mat center_ee = block_of(ac.Y_a, split, Block::EE);
  const double center_logdet = logdet_spd(center_ee);
  const auto samples =
      sample_multipliers(b.inst, b.oracle.xstar, param, Vec(param.dim(), 0.25), 100, 7);
  for (const auto& w : samples) {
    const Mat y_ee = block_of(w.Y, split, Block::EE);
    Mat lower;
    if (!cholesky(SymMat::sym_of(y_ee), lower)) continue;
    CHECK(logdet_spd(y_ee) <= center_logdet + 1e-12);
  }
}

TEST_CASE("analytic_center flags an empty interior") {
  // G identically zero in one coordinate direction: f cannot be stationary,
  // the multiplier system is inconsistent.
  QmiData q;
  q.name = "no-multiplier";
  q.n = 1;
  q.m = 1;
  q.s = 0;
  q.c = {1.0};
  q.Q = SymMat(1);
  q.A0 = SymMat::diag({1.0});
  q.A = {SymMat(1)};  // G does not depend on x at all
  q.Hlin = Mat(0, 1);
  const NsdpInstance inst = make_instance(q);
  const EigenSplit split = eigen_split(SymMat::diag({1.0}));
  CHECK_THROWS_AS(parametrize_multiplier_set(inst, {0.0}, split), AssumptionError);
}

TEST_CASE("analytic_center signals a strict-complementarity failure") {
  // Multipliers exist but all of them are singular: the set {Y PSD, Y_11 = 0}
  // has no interior point.
  QmiData q;
  q.name = "sc-fails";
  q.n = 1;
  q.m = 2;
  q.s = 0;
  q.c = {0.0};
  q.Q = SymMat(1);
  q.A0 = SymMat(2);
  SymMat a1(2);
  a1.set(0, 0, 1.0);
  q.A = {a1};
  q.Hlin = Mat(0, 1);
  const NsdpInstance inst = make_instance(q);
  const EigenSplit split = eigen_split(SymMat(2));
  CHECK_THROWS_AS(analytic_center(inst, {0.0}, split), AssumptionError);
}

TEST_CASE("xi_star signals a second-order failure") {
  // Unique multiplier diag(1, 0); on U* = span{e2} the reduced matrix is the
  // plain Hessian -2, so the structured solve must refuse.
  QmiData q;
  q.name = "ssosc-fails";
  q.n = 2;
  q.m = 2;
  q.s = 0;
  q.c = {1.0, 0.0};
  q.Q = SymMat::diag({0.0, -2.0});
  q.A0 = SymMat::diag({0.0, 1.0});
  SymMat a1(2);
  a1.set(0, 0, 1.0);
  SymMat a2(2);
  a2.set(1, 1, 1.0);
  q.A = {a1, a2};
  q.Hlin = Mat(0, 2);
  const NsdpInstance inst = make_instance(q);
  const EigenSplit split = eigen_split(SymMat::diag({0.0, 1.0}));
  const SymMat y = SymMat::diag({1.0, 0.0});
  CHECK(kkt_residual(inst, PrimalDualTriplet{{0.0, 0.0}, y, {}}).is_kkt());
  CHECK_THROWS_AS(xi_star(inst, {0.0, 0.0}, split, y), AssumptionError);
}

TEST_CASE("certificate residual small on the curved builtin") {
  const auto b = builtin_instance("deg-curve");
  const auto ac = analytic_center(b.inst, b.oracle.xstar, split_of(b));
  CHECK(ac.cert_residual <= 1e-9);
}

TEST_CASE("u_basis dimensions and contents") {
  {
    const auto b = builtin_instance("deg-mixed");
    const Mat u = u_basis(b.inst, b.oracle.xstar, split_of(b));
    REQUIRE(u.cols() == 1);
    CHECK(std::fabs(std::fabs(u(2, 0)) - 1.0) <= 1e-12);
    CHECK(std::fabs(u(0, 0)) <= 1e-12);
    CHECK(std::fabs(u(1, 0)) <= 1e-12);
  }
  CHECK(u_basis(builtin_instance("deg-twin").inst, {0.0},
                split_of(builtin_instance("deg-twin")))
            .cols() == 0);
  CHECK(u_basis(builtin_instance("nondeg-control").inst, {0.0, 0.0, 0.0},
                split_of(builtin_instance("nondeg-control")))
            .cols() == 0);
}

TEST_CASE("xi_star closed forms, identities, and solver agreement") {
  {
    const auto b = builtin_instance("deg-twin");
    const EigenSplit split = split_of(b);
    const XiStarResult xi = xi_star(b.inst, b.oracle.xstar, split, *b.oracle.Y_a);
    REQUIRE(xi.xi.size() == 1);
    CHECK(std::fabs(xi.xi[0] - 2.0) <= 1e-9);
    CHECK(xi.p_star == 0);
    CHECK(xi.structured_vs_full <= 1e-9);
    check_limit_identities(b, split, *b.oracle.Y_a, xi);
  }
  {
    const auto b = builtin_instance("deg-mixed");
    const EigenSplit split = split_of(b);
    const XiStarResult xi = xi_star(b.inst, b.oracle.xstar, split, *b.oracle.Y_a);
    CHECK(norm2(vsub(xi.xi, {2.0, 0.0, 0.0})) <= 1e-9);
    CHECK(xi.p_star == 1);
    CHECK(xi.structured_vs_full <= 1e-9);
    check_limit_identities(b, split, *b.oracle.Y_a, xi);
  }
  {
    const auto b = builtin_instance("nondeg-control");
    const EigenSplit split = split_of(b);
    const XiStarResult xi = xi_star(b.inst, b.oracle.xstar, split, *b.oracle.Y_a);
    CHECK(norm2(vsub(xi.xi, {1.0, 0.0, 1.0})) <= 1e-9);
    check_limit_identities(b, split, *b.oracle.Y_a, xi);
  }
}

TEST_CASE("xi_star cross-check on 50 seeded degenerate instances") {
  for (int rep = 0; rep < 50; ++rep) {
    const auto b = make_rand_qmi(1000 + rep, rep % 3);
    const EigenSplit split = split_of(b);
    const auto ac = analytic_center(b.inst, b.oracle.xstar, split);
    CHECK(ac.cert_residual <= 1e-8);
    const XiStarResult xi = xi_star(b.inst, b.oracle.xstar, split, ac.Y_a);
    CHECK(xi.structured_vs_full <= 1e-9 * std::max(1.0, norm2(xi.xi)));
    check_limit_identities(b, split, ac.Y_a, xi);
  }
}

TEST_CASE("basis invariance of the center and the limiting direction") {
  Rng rng(2718);
  const auto b = builtin_instance("deg-cross");
  const EigenSplit split = split_of(b);
  const auto base_ac = analytic_center(b.inst, b.oracle.xstar, split);
  const auto base_xi = xi_star(b.inst, b.oracle.xstar, split, base_ac.Y_a);
  for (int rep = 0; rep < 4; ++rep) {
    EigenSplit rotated = split;
    const Mat rot = rng.random_orthogonal(split.null_dim());
    rotated.Estar = split.Estar * rot;
    rotated.Pstar = hcat(rotated.Estar, rotated.Fstar);
    const auto ac = analytic_center(b.inst, b.oracle.xstar, rotated);
    CHECK(frob_norm(ac.Y_a.mat() - base_ac.Y_a.mat()) <= 1e-9);
    const auto xi = xi_star(b.inst, b.oracle.xstar, rotated, ac.Y_a);
    CHECK(norm2(vsub(xi.xi, base_xi.xi)) <= 1e-9);
  }
}

TEST_CASE("path consistency: d/mu approaches xi*") {
  for (const char* name : {"deg-twin", "deg-cross", "deg-mixed"}) {
    const auto b = builtin_instance(name);
    const EigenSplit split = split_of(b);
    const auto ac = analytic_center(b.inst, b.oracle.xstar, split);
    const XiStarResult xi = xi_star(b.inst, b.oracle.xstar, split, ac.Y_a);
    const PathTrace tr = trace_path(b.inst, 1e-1, 0.1, 1e-7, b.interior_x0);
    const PathPoint& last = tr.points.back();
    const Vec dir = vscale(1.0 / last.mu, vsub(last.w.x, b.oracle.xstar));
    CHECK(norm2(vsub(dir, xi.xi)) <= 1e-4);
  }
}
