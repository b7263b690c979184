#include <cmath>
#include <cstdio>
#include <sstream>

#include "cpath/lab.hpp"

namespace cpath {

namespace {

SymMat zeros(std::size_t m) { return SymMat(m); }

SymMat unit(std::size_t m, std::size_t i, std::size_t j) {
  SymMat e(m);
  e.set(i, j, 1.0);
  return e;
}

QmiData qmi_deg_twin() {
  // f = x1, G = x1 I2. The multiplier set is { Y PSD : tr Y = 1 }.
  QmiData d;
  d.name = "deg-twin";
  d.n = 1;
  d.m = 2;
  d.s = 0;
  d.c = {1.0};
  d.Q = zeros(1);
  d.A0 = zeros(2);
  d.A = {SymMat::identity(2)};
  d.Hlin = Mat(0, 1);
  return d;
}

QmiData qmi_deg_cross() {
  // f = x1 + x2^2, G = [[x1, x2], [x2, x1]].
  QmiData d;
  d.name = "deg-cross";
  d.n = 2;
  d.m = 2;
  d.s = 0;
  d.c = {1.0, 0.0};
  d.Q = SymMat::diag({0.0, 2.0});
  d.A0 = zeros(2);
  d.A = {SymMat::identity(2), unit(2, 0, 1)};
  d.Hlin = Mat(0, 2);
  return d;
}

QmiData qmi_deg_mixed() {
  // f = x1 + x3^2, G = [[x1,0,x3],[0,x1,0],[x3,0,1+x2]], h = x2.
  QmiData d;
  d.name = "deg-mixed";
  d.n = 3;
  d.m = 3;
  d.s = 1;
  d.c = {1.0, 0.0, 0.0};
  d.Q = SymMat::diag({0.0, 0.0, 2.0});
  d.A0 = unit(3, 2, 2);
  SymMat a1(3);
  a1.set(0, 0, 1.0);
  a1.set(1, 1, 1.0);
  d.A = {a1, unit(3, 2, 2), unit(3, 0, 2)};
  d.b = {0.0};
  d.Hlin = Mat(1, 3);
  d.Hlin(0, 1) = 1.0;
  return d;
}

QmiData qmi_nondeg_control() {
  // f = x1 + x3, G = [[x1, x2], [x2, x3]]; the one instance where the
  // nondegeneracy condition holds and the multiplier set is a singleton.
  QmiData d;
  d.name = "nondeg-control";
  d.n = 3;
  d.m = 2;
  d.s = 0;
  d.c = {1.0, 0.0, 1.0};
  d.Q = zeros(3);
  d.A0 = zeros(2);
  d.A = {unit(2, 0, 0), unit(2, 0, 1), unit(2, 1, 1)};
  d.Hlin = Mat(0, 3);
  return d;
}

QmiData qmi_deg_curve() {
  // deg-mixed with G_33 = 1 + x2 + x2^2 and h = x2 - x3^2.
  QmiData d = qmi_deg_mixed();
  d.name = "deg-curve";
  d.B.assign(3, std::vector<SymMat>(3, zeros(3)));
  d.B[1][1] = unit(3, 2, 2).scaled(2.0);
  SymMat m1(3);
  m1.set(2, 2, -2.0);
  d.Mquad = {m1};
  return d;
}

void self_check(const BuiltinInstance& b) {
  const auto& o = b.oracle;
  if (o.kkt_multiplier) {
    PrimalDualTriplet w{o.xstar, o.kkt_multiplier->Y, o.kkt_multiplier->z};
    if (!kkt_residual(b.inst, w).is_kkt(1e-9))
      throw Error("builtin " + b.name + ": planted KKT triplet fails residual check");
  }
  if (o.w_of_mu) {
    for (double mu : {1e-2, 1e-4}) {
      const PrimalDualTriplet w = o.w_of_mu(mu);
      const BkktResidual r = bkkt_residual(b.inst, w, mu, CompForm::product);
      if (r.total() > 1e-9 * std::max(1.0, mu))
        throw Error("builtin " + b.name + ": closed-form path fails at mu = " +
                    std::to_string(mu));
    }
  }
  const SymMat g0 = b.inst.eval_G(b.interior_x0);
  if (!chol_psd_test(g0))
    throw Error("builtin " + b.name + ": start point not interior");
  if (b.inst.s > 0 && norm2(b.inst.eval_h(b.interior_x0)) > 1e-12)
    throw Error("builtin " + b.name + ": start point infeasible in h");
}

BuiltinInstance finish(QmiData qmi, InstanceOracle oracle, Vec x0) {
  BuiltinInstance b;
  b.name = qmi.name;
  b.qmi = qmi;
  b.inst = make_instance(std::move(qmi));
  b.oracle = std::move(oracle);
  b.interior_x0 = std::move(x0);
  self_check(b);
  return b;
}

BuiltinInstance make_deg_twin() {
  InstanceOracle o;
  o.xstar = {0.0};
  const SymMat ya = SymMat::identity(2).scaled(0.5);
  o.kkt_multiplier = PrimalDualTriplet{o.xstar, ya, {}};
  o.w_of_mu = [ya](double mu) {
    return PrimalDualTriplet{{2.0 * mu}, ya, {}};
  };
  o.Y_a = ya;
  o.z_a = Vec{};
  o.xi_star = Vec{2.0};
  o.expected = {true, false, true, true};
  return finish(qmi_deg_twin(), std::move(o), {1.0});
}

BuiltinInstance make_deg_cross() {
  InstanceOracle o;
  o.xstar = {0.0, 0.0};
  const SymMat ya = SymMat::identity(2).scaled(0.5);
  o.kkt_multiplier = PrimalDualTriplet{o.xstar, ya, {}};
  o.w_of_mu = [ya](double mu) {
    return PrimalDualTriplet{{2.0 * mu, 0.0}, ya, {}};
  };
  o.Y_a = ya;
  o.z_a = Vec{};
  o.xi_star = Vec{2.0, 0.0};
  o.expected = {true, false, true, true};
  return finish(qmi_deg_cross(), std::move(o), {1.0, 0.0});
}

BuiltinInstance make_deg_mixed() {
  InstanceOracle o;
  o.xstar = {0.0, 0.0, 0.0};
  const SymMat ya = SymMat::diag({0.5, 0.5, 0.0});
  o.kkt_multiplier = PrimalDualTriplet{o.xstar, ya, {0.0}};
  o.w_of_mu = [](double mu) {
    return PrimalDualTriplet{{2.0 * mu, 0.0, 0.0}, SymMat::diag({0.5, 0.5, mu}), {mu}};
  };
  o.Y_a = ya;
  o.z_a = Vec{0.0};
  o.xi_star = Vec{2.0, 0.0, 0.0};
  o.expected = {true, false, true, true};
  return finish(qmi_deg_mixed(), std::move(o), {1.0, 0.0, 0.0});
}

BuiltinInstance make_nondeg_control() {
  InstanceOracle o;
  o.xstar = {0.0, 0.0, 0.0};
  const SymMat ya = SymMat::identity(2);
  o.kkt_multiplier = PrimalDualTriplet{o.xstar, ya, {}};
  o.w_of_mu = [ya](double mu) {
    return PrimalDualTriplet{{mu, 0.0, mu}, ya, {}};
  };
  o.Y_a = ya;
  o.z_a = Vec{};
  o.xi_star = Vec{1.0, 0.0, 1.0};
  o.expected = {true, true, true, true};
  return finish(qmi_nondeg_control(), std::move(o), {2.0, 0.0, 2.0});
}

BuiltinInstance make_deg_curve() {
  InstanceOracle o;
  o.xstar = {0.0, 0.0, 0.0};
  o.kkt_multiplier =
      PrimalDualTriplet{o.xstar, SymMat::diag({0.5, 0.5, 0.0}), {0.0}};
  // Curved equality constraint: only numeric oracles beyond the KKT point.
  o.expected = {true, false, true, true};
  return finish(qmi_deg_curve(), std::move(o), {1.0, 0.0, 0.0});
}

}  // namespace

BuiltinInstance make_rand_qmi(std::uint64_t seed, unsigned k) {
  Rng rng(seed * 0x100000001b3ull + k + 1);

  std::size_t n, m, s;
  switch (k % 3) {
    case 0: n = 4; m = 3; s = 1; break;
    case 1: n = 4; m = 4; s = 0; break;
    default: n = 5; m = 4; s = 1; break;
  }
  const std::size_t q = 2;        // planted nullity of G(x*)
  const std::size_t r = m - q;    // rank of G(x*)

  const Mat p = rng.random_orthogonal(m);
  const Mat e = get_block(p, 0, 0, m, q);
  const Mat f = get_block(p, 0, q, m, r);

  // A0 = F D F^T with D positive: G(0) has exact rank r.
  Mat dff(r, r);
  for (std::size_t i = 0; i < r; ++i) dff(i, i) = rng.uniform(1.0, 2.0);
  QmiData d;
  d.name = "rand-qmi(" + std::to_string(seed) + "," + std::to_string(k) + ")";
  d.n = n;
  d.m = m;
  d.s = s;
  d.A0 = SymMat::sym_of(f * dff * transpose(f));

  // All EE blocks live in span{I, N}: the nondegeneracy rows are rank
  // deficient by construction while the multiplier set stays bounded
  // (the first coefficient pins the EE trace).
  SymMat nmat = rng.random_sym(q, 1.0);
  {
    const double tr = nmat.trace() / double(q);
    for (std::size_t i = 0; i < q; ++i) nmat.set(i, i, nmat(i, i) - tr);
  }
  // Coupling scales are kept moderate so the default verification grid
  // (down to mu = 1e-7) already sits inside the asymptotic regime of a
  // typical draw; strong EF coupling inflates the second-order path
  // coefficients without changing any of the limits.
  d.A.reserve(n);
  d.A.push_back(SymMat::sym_of(e * transpose(e)));  // EE block = I, rest zero
  for (std::size_t i = 1; i < n; ++i) {
    const double alpha = rng.uniform(-0.8, 0.8);
    const Mat ree = alpha * nmat.mat();
    const Mat ref = rng.normal_mat(q, r);
    const SymMat sblk = rng.random_sym(r, 0.3);
    Mat full = e * ree * transpose(e);
    full = full + e * (0.25 * ref) * transpose(f);
    full = full + f * (0.25 * transpose(ref)) * transpose(e);
    full = full + f * sblk.mat() * transpose(f);
    d.A.push_back(SymMat::sym_of(full));
  }

  // Gentle curvature in G; small enough that the Lagrangian Hessian stays
  // positive definite over the whole multiplier set.
  d.B.assign(n, std::vector<SymMat>(n, SymMat(m)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const SymMat bij = rng.random_sym(m, 0.005);
      d.B[i][j] = bij;
      d.B[j][i] = bij;
    }

  // Equalities: first primal coordinate never appears linearly, so x0 = e1
  // stays feasible and the EE trace stays pinned.
  d.b = Vec(s, 0.0);
  d.Hlin = Mat(s, n);
  for (std::size_t krow = 0; krow < s; ++krow) {
    double row_norm = 0.0;
    while (row_norm < 0.5) {
      for (std::size_t i = 1; i < n; ++i) d.Hlin(krow, i) = rng.uniform(-1.0, 1.0);
      row_norm = 0.0;
      for (std::size_t i = 1; i < n; ++i)
        row_norm += d.Hlin(krow, i) * d.Hlin(krow, i);
      row_norm = std::sqrt(row_norm);
    }
  }
  for (std::size_t krow = 0; krow < s; ++krow) {
    SymMat mk = rng.random_sym(n, 0.02);
    mk.set(0, 0, 0.0);
    d.Mquad.push_back(mk);
  }
  if (s == 0) d.Mquad.clear();

  // Strongly convex objective dominates every curvature correction.
  d.Q = SymMat::sym_of(2.0 * Mat::identity(n) + (0.3 / double(n)) * rng.random_sym(n).mat());

  // Plant the KKT point at the origin with an interior EE multiplier.
  Mat y0 = rng.random_psd(q, q, 0.5, 1.5).mat();
  Vec zstar(s);
  for (auto& v : zstar) v = rng.uniform(-0.3, 0.3);
  d.c.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat aee = transpose(e) * d.A[i].mat() * e;
    double acc = 0.0;
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t bcol = 0; bcol < q; ++bcol)
        acc += aee(a, bcol) * y0(a, bcol);
    d.c[i] = acc;
    for (std::size_t krow = 0; krow < s; ++krow)
      d.c[i] -= d.Hlin(krow, i) * zstar[krow];
  }

  InstanceOracle o;
  o.xstar = Vec(n, 0.0);
  o.kkt_multiplier =
      PrimalDualTriplet{o.xstar, SymMat::sym_of(e * y0 * transpose(e)), zstar};
  o.expected = {true, false, true, true};

  BuiltinInstance b;
  b.name = d.name;
  b.qmi = d;
  b.inst = make_instance(std::move(d));
  b.oracle = std::move(o);
  b.interior_x0 = Vec(n, 0.0);
  b.interior_x0[0] = 1.0;
  self_check(b);
  return b;
}

std::vector<std::string> builtin_names() {
  return {"deg-twin",  "deg-cross", "deg-mixed",
          "nondeg-control", "deg-curve", "rand-qmi(seed,k)"};
}

BuiltinInstance builtin_instance(const std::string& name) {
  if (name == "deg-twin") return make_deg_twin();
  if (name == "deg-cross") return make_deg_cross();
  if (name == "deg-mixed") return make_deg_mixed();
  if (name == "nondeg-control") return make_nondeg_control();
  if (name == "deg-curve") return make_deg_curve();
  {
    unsigned long long seed = 0;
    unsigned k = 0;
    int consumed = 0;
    if (std::sscanf(name.c_str(), "rand-qmi(%llu,%u)%n", &seed, &k, &consumed) == 2 &&
        consumed == static_cast<int>(name.size()))
      return make_rand_qmi(seed, k);
  }
  std::ostringstream msg;
  msg << "unknown instance '" << name << "'; registry:";
  for (const auto& s : builtin_names()) msg << " " << s;
  throw NotFoundError(msg.str());
}

}  // namespace cpath
