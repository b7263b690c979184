#include "cpath/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cpath {

namespace {

// log det through the Cholesky factor; caller guarantees positive definite.
double log_det(const Mat& lower) {
  double s = 0.0;
  for (std::size_t i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i));
  return 2.0 * s;
}

SymMat spd_inverse(const SymMat& g, const Mat& lower) {
  const std::size_t m = g.dim();
  Mat inv(m, m);
  // Solve L L^T X = I column by column.
  for (std::size_t c = 0; c < m; ++c) {
    Vec y(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * y[k];
      y[i] = s / lower(i, i);
    }
    for (std::size_t ii = m; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < m; ++k) s -= lower(k, ii) * y[k];
      y[ii] = s / lower(ii, ii);
    }
    for (std::size_t i = 0; i < m; ++i) inv(i, c) = y[i];
  }
  return SymMat::sym_of(inv);
}

}  // namespace

PsiEval psi_eval(const NsdpInstance& inst, const Vec& x, double mu) {
  inst.check_x(x);
  const SymMat g = inst.eval_G(x);
  Mat lower;
  if (!cholesky(g, lower))
    throw InteriorityError("psi_eval: G(x) not positive definite", min_eig(g));
  const SymMat ginv = spd_inverse(g, lower);

  PsiEval out;
  out.value = inst.eval_f(x) - mu * log_det(lower);
  out.gradient = vsub(inst.grad_f(x), vscale(mu, adjoint_JG(inst, x, ginv)));

  const std::size_t n = inst.n;
  std::vector<SymMat> gi;
  gi.reserve(n);
  for (std::size_t i = 0; i < n; ++i) gi.push_back(inst.dG(x, i));
  Mat curv(n, n);
  std::vector<Mat> ginv_gi(n);
  for (std::size_t i = 0; i < n; ++i) ginv_gi[i] = ginv.mat() * gi[i].mat();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double tr = 0.0;
      const Mat prod = ginv_gi[i] * ginv_gi[j];
      for (std::size_t k = 0; k < inst.m; ++k) tr += prod(k, k);
      curv(i, j) = tr;
      curv(j, i) = tr;
    }
  out.hessian = inst.hess_f(x) + SymMat::sym_of(mu * curv) -
                inst.hessG_contract(x, ginv).scaled(mu);
  return out;
}

namespace {

double merit(const NsdpInstance& inst, const Vec& x, double mu, double nu) {
  const SymMat g = inst.eval_G(x);
  if (!chol_psd_test(g)) return std::numeric_limits<double>::infinity();
  Mat lower;
  cholesky(g, lower);
  double v = inst.eval_f(x) - mu * log_det(lower);
  if (inst.s > 0) v += nu * norm2(inst.eval_h(x));
  return v;
}

// Largest step in (0, 1] keeping G(x + a dx) positive definite, damped by
// the fraction-to-boundary factor when the unit step leaves the cone.
double interior_step(const NsdpInstance& inst, const Vec& x, const Vec& dx,
                     double tau) {
  auto ok = [&](double a) {
    return chol_psd_test(inst.eval_G(vadd(x, vscale(a, dx))));
  };
  if (ok(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid))
      lo = mid;
    else
      hi = mid;
  }
  return tau * lo;
}

// Gauss-Newton reduction of ||h|| inside the cone.
Vec restore_feasibility(const NsdpInstance& inst, Vec x, double feas_tol,
                        double tau) {
  for (int it = 0; it < 100; ++it) {
    const Vec h = inst.eval_h(x);
    const double hn = norm2(h);
    if (hn <= feas_tol) return x;
    const Mat jt = transpose(inst.jac_h(x));  // s x n
    const LstsqResult step = lstsq_minnorm(jt, vscale(-1.0, h));
    double alpha = interior_step(inst, x, step.x, tau);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec xn = vadd(x, vscale(alpha, step.x));
      if (chol_psd_test(inst.eval_G(xn)) &&
          norm2(inst.eval_h(xn)) <= hn * (1.0 - 1e-4 * alpha)) {
        x = xn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-16) break;
    }
    if (!accepted)
      throw ConvergenceError(
          "barrier_solve: could not reduce ||h|| below tolerance from this start");
  }
  if (norm2(inst.eval_h(x)) > feas_tol)
    throw ConvergenceError("barrier_solve: feasibility restoration hit its cap");
  return x;
}

}  // namespace

BarrierSolveResult barrier_solve(const NsdpInstance& inst, double mu,
                                 const Vec& x0, const BarrierOptions& opts) {
  inst.check_x(x0);
  if (!(mu > 0.0)) throw Error("barrier_solve: mu must be positive");
  {
    const SymMat g0 = inst.eval_G(x0);
    if (!chol_psd_test(g0))
      throw InteriorityError("barrier_solve: start not interior", min_eig(g0));
  }

  Vec x = x0;
  if (inst.s > 0 && norm2(inst.eval_h(x)) > opts.feas_tol)
    x = restore_feasibility(inst, x, opts.feas_tol, opts.tau);

  Vec z(inst.s, 0.0);
  double nu = 1.0;
  const std::size_t n = inst.n, s = inst.s;

  BarrierSolveResult res;
  res.mu = mu;
  res.converged = false;

  std::size_t it = 0;
  for (; it < opts.max_iter; ++it) {
    const PsiEval psi = psi_eval(inst, x, mu);
    const Mat jac = inst.jac_h(x);
    const Vec h = inst.eval_h(x);
    const Mat zbasis = (s > 0) ? nullspace(transpose(jac)) : Mat::identity(n);
    const double pg = (zbasis.cols() > 0) ? norm2(transpose(zbasis) * psi.gradient)
                                          : 0.0;
    const double hn = norm2(h);
    res.projected_grad_norm = pg;
    res.feas_h_norm = hn;
    if (pg <= std::max(opts.tol_abs, opts.tol_rel * mu) && hn <= opts.feas_tol) {
      res.converged = true;
      break;
    }

    // Newton KKT system with inertia-free regularization of the primal block:
    // delta I grows tenfold from 1e-12 until the reduced Hessian factors,
    // capped at 1e-4.
    SymMat hess = psi.hessian;
    if (s > 0) hess = hess + inst.hessh_contract(x, z);
    auto reduced_pd = [&](const SymMat& hm) {
      if (zbasis.cols() == 0) return true;
      Mat l;
      return cholesky(SymMat::sym_of(transpose(zbasis) * hm.mat() * zbasis), l);
    };
    if (!reduced_pd(hess)) {
      for (double trial = 1e-12;; trial *= 10.0) {
        SymMat probe = hess;
        for (std::size_t i = 0; i < n; ++i) probe.set(i, i, probe(i, i) + trial);
        if (reduced_pd(probe) || trial >= 1e-4) {
          hess = probe;
          break;
        }
      }
    }

    Mat kktm(n + s, n + s);
    set_block(kktm, 0, 0, hess.mat());
    if (s > 0) {
      set_block(kktm, 0, n, jac);
      set_block(kktm, n, 0, transpose(jac));
    }
    Vec rhs(n + s);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -psi.gradient[i];
    for (std::size_t k = 0; k < s; ++k) rhs[n + k] = -h[k];
    Vec sol;
    try {
      sol = lu_solve(kktm, rhs);
    } catch (const SingularSystemError&) {
      throw ConvergenceError("barrier_solve: Newton KKT system singular at mu = " +
                             std::to_string(mu));
    }
    Vec dx(n);
    for (std::size_t i = 0; i < n; ++i) dx[i] = sol[i];
    Vec znew(s);
    for (std::size_t k = 0; k < s; ++k) znew[k] = sol[n + k];

    nu = std::max(nu, 2.0 * norm2(znew) + 1.0);
    const double phi0 = merit(inst, x, mu, nu);
    const double dphi = dot(psi.gradient, dx) - nu * hn;

    double alpha = interior_step(inst, x, dx, opts.tau);
    bool accepted = false;
    while (alpha >= 1e-16) {
      const Vec xn = vadd(x, vscale(alpha, dx));
      if (merit(inst, xn, mu, nu) <= phi0 + 1e-4 * alpha * dphi) {
        x = xn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw ConvergenceError("barrier_solve: line search collapsed (step < 1e-16)");
    z = znew;
  }

  if (!res.converged && it == opts.max_iter)
    throw ConvergenceError("barrier_solve: iteration cap " +
                           std::to_string(opts.max_iter) + " reached at mu = " +
                           std::to_string(mu));

  res.x = x;
  res.iterations = it;
  res.min_eig_G = min_eig(inst.eval_G(x));
  return res;
}

PrimalDualTriplet lift_to_triplet(const NsdpInstance& inst, const Vec& x, double mu) {
  inst.check_x(x);
  const SymMat g = inst.eval_G(x);
  Mat lower;
  if (!cholesky(g, lower))
    throw InteriorityError("lift_to_triplet: G(x) not positive definite", min_eig(g));
  const SymMat y = spd_inverse(g, lower).scaled(mu);
  Vec z;
  if (inst.s > 0) {
    const Mat jac = inst.jac_h(x);
    if (numerical_rank(jac) < static_cast<int>(inst.s))
      throw Error("lift_to_triplet: jac_h(x) is rank deficient");
    const Vec resid = vsub(inst.grad_f(x), adjoint_JG(inst, x, y));
    z = lstsq_minnorm(jac, vscale(-1.0, resid)).x;
  }
  return PrimalDualTriplet{x, y, z};
}

}  // namespace cpath
