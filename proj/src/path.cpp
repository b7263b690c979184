#include "cpath/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cpath {

AssembledSystem assemble_A(const NsdpInstance& inst, const PrimalDualTriplet& w) {
  inst.check_x(w.x);
  if (w.Y.dim() != inst.m) throw DimError("assemble_A: Y has wrong order");
  if (w.z.size() != inst.s) throw DimError("assemble_A: z has wrong length");

  AssembledSystem sys;
  sys.n = inst.n;
  sys.M = svec_len(inst.m);
  sys.s = inst.s;
  const std::size_t N = sys.order();
  Mat a(N, N);

  const SymMat hessL = hess_xx_lagrangian(inst, w);
  set_block(a, 0, 0, hessL.mat());

  std::vector<SymMat> gi;
  gi.reserve(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) gi.push_back(inst.dG(w.x, i));

  for (std::size_t i = 0; i < inst.n; ++i) {
    const Vec row = svec(gi[i]);
    for (std::size_t k = 0; k < sys.M; ++k) a(i, sys.n + k) = -row[k];
    const Vec col = svec(lyap_apply(w.Y, gi[i]));
    for (std::size_t k = 0; k < sys.M; ++k) a(sys.n + k, i) = col[k];
  }

  const SymMat g = inst.eval_G(w.x);
  for (std::size_t j = 0; j < sys.M; ++j) {
    Vec basis(sys.M, 0.0);
    basis[j] = 1.0;
    const Vec col = svec(lyap_apply(g, smat(basis)));
    for (std::size_t k = 0; k < sys.M; ++k) a(sys.n + k, sys.n + j) = col[k];
  }

  if (inst.s > 0) {
    const Mat jac = inst.jac_h(w.x);
    set_block(a, 0, sys.n + sys.M, jac);
    set_block(a, sys.n + sys.M, 0, transpose(jac));
  }

  sys.matrix = std::move(a);
  return sys;
}

TangentDir tangent(const NsdpInstance& inst, const PrimalDualTriplet& w) {
  const AssembledSystem sys = assemble_A(inst, w);
  const double sigmin = min_singular_value(sys.matrix);
  const double scale = std::max(1.0, frob_norm(sys.matrix));
  if (sigmin <= 1e-12 * scale)
    throw SingularSystemError(
        "tangent: A(w) numerically singular (sigma_min = " +
            std::to_string(sigmin) + ")",
        sigmin);

  Vec rhs(sys.order(), 0.0);
  const Vec two_i = svec(SymMat::identity(inst.m).scaled(2.0));
  for (std::size_t k = 0; k < sys.M; ++k) rhs[sys.n + k] = two_i[k];

  const Vec sol = lu_solve(sys.matrix, rhs);
  TangentDir out;
  out.dx.assign(sol.begin(), sol.begin() + sys.n);
  Vec ysv(sol.begin() + sys.n, sol.begin() + sys.n + sys.M);
  out.dY = smat(ysv);
  out.dz.assign(sol.begin() + sys.n + sys.M, sol.end());
  out.residual =
      norm2(vsub(sys.matrix * sol, rhs)) / std::max(1.0, norm2(rhs));
  return out;
}

namespace {

double corrector_residual(const NsdpInstance& inst, const PrimalDualTriplet& w,
                          double mu) {
  const BkktResidual r = bkkt_residual(inst, w, mu, CompForm::symmetric);
  return r.total();
}

// Largest step keeping both G(x + a dx) and Y + a dY inside the cone.
double joint_interior_step(const NsdpInstance& inst, const PrimalDualTriplet& w,
                           const Vec& dx, const SymMat& dY, double tau) {
  auto ok = [&](double a) {
    const Vec xn = vadd(w.x, vscale(a, dx));
    if (!chol_psd_test(inst.eval_G(xn))) return false;
    return chol_psd_test(w.Y + dY.scaled(a));
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

}  // namespace

CorrectorResult pdipm_corrector(const NsdpInstance& inst,
                                const PrimalDualTriplet& w0, double mu,
                                const CorrectorOptions& opts) {
  if (!(mu > 0.0)) throw Error("pdipm_corrector: mu must be positive");
  {
    const SymMat g0 = inst.eval_G(w0.x);
    if (!chol_psd_test(g0))
      throw InteriorityError("pdipm_corrector: start violates G(x) > 0",
                             min_eig(g0));
    if (!chol_psd_test(w0.Y))
      throw InteriorityError("pdipm_corrector: start violates Y > 0",
                             min_eig(w0.Y));
  }

  PrimalDualTriplet w = w0;
  double res = corrector_residual(inst, w, mu);
  bool polished = false;
  for (std::size_t it = 0; it <= opts.max_iter; ++it) {
    if (res <= opts.tol) {
      if (!opts.polish || polished || it == opts.max_iter) return {w, it, res};
      polished = true;  // one extra step to land on the quadratic floor
    }
    if (it == opts.max_iter)
      throw ConvergenceError("pdipm_corrector: iteration cap at mu = " +
                             std::to_string(mu) + ", residual " +
                             std::to_string(res));

    const AssembledSystem sys = assemble_A(inst, w);
    const SymMat g = inst.eval_G(w.x);
    const Mat gy = g.mat() * w.Y.mat();
    const SymMat f2 = SymMat::sym_of(gy + transpose(gy)) -
                      SymMat::identity(inst.m).scaled(2.0 * mu);
    Vec rhs(sys.order(), 0.0);
    const Vec f1 = grad_x_lagrangian(inst, w);
    for (std::size_t i = 0; i < sys.n; ++i) rhs[i] = -f1[i];
    const Vec f2v = svec(f2);
    for (std::size_t k = 0; k < sys.M; ++k) rhs[sys.n + k] = -f2v[k];
    if (inst.s > 0) {
      const Vec h = inst.eval_h(w.x);
      for (std::size_t k = 0; k < sys.s; ++k) rhs[sys.n + sys.M + k] = -h[k];
    }

    Vec sol;
    try {
      sol = lu_solve(sys.matrix, rhs);
    } catch (const SingularSystemError& e) {
      throw SingularSystemError("pdipm_corrector: Newton matrix singular at mu = " +
                                    std::to_string(mu),
                                e.sigma_min);
    }
    Vec dx(sol.begin(), sol.begin() + sys.n);
    Vec ysv(sol.begin() + sys.n, sol.begin() + sys.n + sys.M);
    const SymMat dY = smat(ysv);
    Vec dz(sol.begin() + sys.n + sys.M, sol.end());

    const double alpha = joint_interior_step(inst, w, dx, dY, opts.tau);
    if (alpha < 1e-16)
      throw ConvergenceError(
          "pdipm_corrector: fraction-to-boundary step collapsed at mu = " +
          std::to_string(mu));
    w.x = vadd(w.x, vscale(alpha, dx));
    w.Y = w.Y + dY.scaled(alpha);
    if (inst.s > 0) w.z = vadd(w.z, vscale(alpha, dz));
    res = corrector_residual(inst, w, mu);
  }
  return {w, opts.max_iter, res};  // unreachable
}

namespace {

PathPoint make_point(const NsdpInstance& inst, const PrimalDualTriplet& w,
                     double mu, std::size_t iters, const TraceOptions& opts) {
  PathPoint p;
  p.mu = mu;
  p.w = w;
  p.bkkt_res = bkkt_residual(inst, w, mu, CompForm::symmetric).total();
  p.newton_iters = iters;
  p.sigmin_A =
      opts.compute_sigmin ? min_singular_value(assemble_A(inst, w).matrix)
                          : std::numeric_limits<double>::quiet_NaN();
  p.norm_d = opts.xstar ? norm2(vsub(w.x, *opts.xstar))
                        : std::numeric_limits<double>::quiet_NaN();
  return p;
}

}  // namespace

PathTrace trace_path(const NsdpInstance& inst, double mu0, double sigma,
                     double mu_min, const Vec& x0, const TraceOptions& opts) {
  if (!(mu0 > 0.0) || !(mu_min > 0.0) || mu_min > mu0)
    throw Error("trace_path: need 0 < mu_min <= mu0");
  if (!(sigma > 0.0) || !(sigma < 1.0))
    throw Error("trace_path: sigma must lie in (0,1)");

  PathTrace trace;
  trace.instance = inst.name;
  trace.mu0 = mu0;
  trace.sigma = sigma;
  trace.mu_min = mu_min;

  std::vector<double> mus;
  for (double mu = mu0; mu >= mu_min * (1.0 - 1e-12); mu *= sigma)
    mus.push_back(mu);

  auto barrier_point = [&](double mu, const Vec& xw) {
    const BarrierSolveResult r = barrier_solve(inst, mu, xw, opts.barrier);
    const PrimalDualTriplet w = lift_to_triplet(inst, r.x, mu);
    return std::make_pair(w, r.iterations);
  };

  for (std::size_t k = 0; k < mus.size(); ++k) {
    const double mu = mus[k];
    PrimalDualTriplet w;
    std::size_t iters = 0;
    try {
      if (opts.mode == TraceMode::barrier) {
        const Vec warm = trace.points.empty() ? x0 : trace.points.back().w.x;
        std::tie(w, iters) = barrier_point(mu, warm);
      } else {
        // Predictor from the previous point, corrector at the new mu.
        PrimalDualTriplet start;
        if (trace.points.empty()) {
          start = lift_to_triplet(inst, x0, mu);
        } else {
          const PathPoint& prev = trace.points.back();
          start = prev.w;
          try {
            const TangentDir t = tangent(inst, prev.w);
            const double dmu = mu - prev.mu;
            PrimalDualTriplet pred;
            pred.x = vadd(prev.w.x, vscale(dmu, t.dx));
            pred.Y = prev.w.Y + t.dY.scaled(dmu);
            pred.z = inst.s > 0 ? vadd(prev.w.z, vscale(dmu, t.dz)) : Vec{};
            if (chol_psd_test(inst.eval_G(pred.x)) && chol_psd_test(pred.Y))
              start = pred;
          } catch (const Error&) {
            // fall back to the plain warm start
          }
        }
        try {
          const CorrectorResult c = pdipm_corrector(inst, start, mu, opts.corrector);
          w = c.w;
          iters = c.iterations;
        } catch (const Error&) {
          if (opts.mode != TraceMode::hybrid) throw;
          const Vec warm = trace.points.empty() ? x0 : trace.points.back().w.x;
          std::tie(w, iters) = barrier_point(mu, warm);
        }
      }
    } catch (const Error& e) {
      throw ConvergenceError("trace_path: failure at mu = " + std::to_string(mu) +
                             ": " + e.what());
    }
    PathPoint p = make_point(inst, w, mu, iters, opts);
    if (p.bkkt_res > opts.accept_tol)
      throw ConvergenceError("trace_path: point at mu = " + std::to_string(mu) +
                             " misses the acceptance tolerance, residual " +
                             std::to_string(p.bkkt_res));
    trace.points.push_back(std::move(p));
  }
  return trace;
}

bool in_region(const Vec& x, const Vec& xstar, const Vec& xi_star, double rho,
               double mu) {
  if (x.size() != xstar.size() || x.size() != xi_star.size())
    throw DimError("in_region: dimensions differ");
  const double xin = norm2(xi_star);
  if (xin == 0.0) throw Error("in_region: xi* must be nonzero");
  const Vec center = vadd(xstar, vscale(mu, xi_star));
  return norm2(vsub(center, x)) < rho * mu * xin;
}

double reduced_form_min_eig(const NsdpInstance& inst, const PrimalDualTriplet& w) {
  const SymMat g = inst.eval_G(w.x);
  if (!chol_psd_test(g))
    throw InteriorityError("reduced_form_min_eig: G(x) not positive definite",
                           min_eig(g));
  const SymMat hessL = hess_xx_lagrangian(inst, w);
  const std::size_t n = inst.n;
  Mat form(n, n);
  std::vector<SymMat> gi;
  gi.reserve(n);
  for (std::size_t i = 0; i < n; ++i) gi.push_back(inst.dG(w.x, i));
  std::vector<SymMat> solved;
  solved.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    solved.push_back(lyap_solve(g, lyap_apply(w.Y, gi[j])));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      form(i, j) = hessL(i, j) + inner(gi[i], solved[j]);

  const Mat zbasis = (inst.s > 0) ? nullspace(transpose(inst.jac_h(w.x)))
                                  : Mat::identity(n);
  if (zbasis.cols() == 0) return std::numeric_limits<double>::infinity();
  const Mat reduced = transpose(zbasis) * (0.5 * (form + transpose(form))) * zbasis;
  return min_eig(SymMat::sym_of(reduced));
}

}  // namespace cpath
