#include "cpath/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cpath {

namespace {

// Columns of the stationarity map in (svec(Y^EE), z) coordinates: the
// equation is sum_j u_j col_j = grad f(x*).
Mat stationarity_columns(const NsdpInstance& inst, const Vec& xstar,
                         const EigenSplit& split) {
  const std::size_t q = split.null_dim();
  const std::size_t K = svec_len(q);
  Mat cols(inst.n, K + inst.s);
  for (std::size_t j = 0; j < K; ++j) {
    Vec basis(K, 0.0);
    basis[j] = 1.0;
    const SymMat nj = smat(basis);
    for (std::size_t i = 0; i < inst.n; ++i) {
      const Mat aee = block_of(inst.dG(xstar, i), split, Block::EE);
      cols(i, j) = inner(SymMat::sym_of(aee), nj);
    }
  }
  if (inst.s > 0) {
    const Mat jac = inst.jac_h(xstar);
    for (std::size_t k = 0; k < inst.s; ++k)
      for (std::size_t i = 0; i < inst.n; ++i) cols(i, K + k) = -jac(i, k);
  }
  return cols;
}

// Rows of the map d -> (svec(DeltaG^EE(x*;d)), jac_h(x*)^T d) whose null
// space is U*.
Mat u_constraint_rows(const NsdpInstance& inst, const Vec& xstar,
                      const EigenSplit& split) {
  const std::size_t q = split.null_dim();
  const std::size_t K = svec_len(q);
  Mat rows(K, inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    const Mat aee = block_of(inst.dG(xstar, i), split, Block::EE);
    const Vec col = (q > 0) ? svec(SymMat::sym_of(aee)) : Vec{};
    for (std::size_t r = 0; r < K; ++r) rows(r, i) = col[r];
  }
  if (inst.s > 0) rows = vcat(rows, transpose(inst.jac_h(xstar)));
  return rows;
}

Mat mat_inverse_spd(const Mat& block) {
  const EigenDecomp d = eigh_ascending(SymMat::sym_of(block));
  if (d.values.front() <= 0.0)
    throw NotPsdError("analytic: positive block is singular", d.values.front());
  Mat lam(block.rows(), block.rows());
  for (std::size_t i = 0; i < block.rows(); ++i) lam(i, i) = 1.0 / d.values[i];
  return d.vectors * lam * transpose(d.vectors);
}

}  // namespace

Mat MultiplierSetParam::y_ee_at(const Vec& t) const {
  Mat y = y_ee0;
  for (std::size_t j = 0; j < basis_N.size(); ++j) y = y + t[j] * basis_N[j];
  return y;
}

Vec MultiplierSetParam::z_at(const Vec& t) const {
  Vec z = z0;
  for (std::size_t j = 0; j < basis_zeta.size(); ++j)
    z = vadd(z, vscale(t[j], basis_zeta[j]));
  return z;
}

MultiplierSetParam parametrize_multiplier_set(const NsdpInstance& inst,
                                              const Vec& xstar,
                                              const EigenSplit& split) {
  inst.check_x(xstar);
  if (inst.s > 0 &&
      numerical_rank(inst.jac_h(xstar)) < static_cast<int>(inst.s))
    throw Error("parametrize_multiplier_set: jac_h(x*) is rank deficient");

  const std::size_t q = split.null_dim();
  const std::size_t K = svec_len(q);
  const Mat cols = stationarity_columns(inst, xstar, split);
  const Vec gf = inst.grad_f(xstar);
  const LstsqResult part = lstsq_minnorm(cols, gf);
  if (part.residual > 1e-8 * std::max(1.0, norm2(gf)))
    throw AssumptionError(
        "parametrize_multiplier_set: stationarity system inconsistent, no "
        "Lagrange multiplier exists (residual " +
        std::to_string(part.residual) + ")");

  MultiplierSetParam param;
  param.split = split;
  if (q > 0) {
    Vec ysv(part.x.begin(), part.x.begin() + K);
    param.y_ee0 = smat(ysv).mat();
  } else {
    param.y_ee0 = Mat(0, 0);
  }
  param.z0.assign(part.x.begin() + K, part.x.end());

  const Mat null_basis = nullspace(cols);
  for (std::size_t j = 0; j < null_basis.cols(); ++j) {
    Vec u(cols.cols());
    for (std::size_t i = 0; i < cols.cols(); ++i) u[i] = null_basis(i, j);
    Vec ysv(u.begin(), u.begin() + K);
    param.basis_N.push_back(q > 0 ? smat(ysv).mat() : Mat(0, 0));
    param.basis_zeta.push_back(Vec(u.begin() + K, u.end()));
  }
  return param;
}

namespace {

struct LogDetNewton {
  Vec t;
  std::size_t iterations = 0;
  bool converged = true;
};

// Damped Newton minimization of -log det(Y(t) + shift I) over the affine
// family; assumes the start is interior for the shifted matrix.
LogDetNewton logdet_newton(const MultiplierSetParam& param, Vec t, double shift,
                           double decrement_tol, std::size_t max_iter,
                           double ridge) {
  const std::size_t p = param.dim();
  const std::size_t q = param.y_ee0.rows();
  LogDetNewton out;
  if (p == 0 || q == 0) {
    out.t = t;
    return out;
  }
  out.converged = false;
  auto shifted = [&](const Vec& tt) {
    Mat w = param.y_ee_at(tt);
    for (std::size_t i = 0; i < q; ++i) w(i, i) += shift;
    return w;
  };
  auto objective = [&](const Vec& tt) {
    Mat lower;
    if (!cholesky(SymMat::sym_of(shifted(tt)), lower))
      return std::numeric_limits<double>::infinity();
    double ld = 0.0;
    for (std::size_t i = 0; i < q; ++i) ld += std::log(lower(i, i));
    return -2.0 * ld + ridge * dot(tt, tt);
  };

  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    const Mat w = shifted(t);
    const Mat winv = mat_inverse_spd(w);
    Vec grad(p);
    for (std::size_t j = 0; j < p; ++j) {
      double tr = 0.0;
      const Mat prod = winv * param.basis_N[j];
      for (std::size_t k = 0; k < q; ++k) tr -= prod(k, k);
      grad[j] = tr + 2.0 * ridge * t[j];
    }
    Mat hess(p, p);
    std::vector<Mat> winv_nj(p);
    for (std::size_t j = 0; j < p; ++j) winv_nj[j] = winv * param.basis_N[j];
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j) {
        double tr = 0.0;
        const Mat prod = winv_nj[i] * winv_nj[j];
        for (std::size_t k = 0; k < q; ++k) tr += prod(k, k);
        hess(i, j) = tr + (i == j ? 2.0 * ridge : 0.0);
        hess(j, i) = hess(i, j);
      }
    Vec step;
    try {
      step = lu_solve(hess, vscale(-1.0, grad));
    } catch (const SingularSystemError&) {
      throw ConvergenceError("analytic_center: Newton system singular");
    }
    const double decrement2 = -dot(grad, step);
    if (decrement2 <= decrement_tol * decrement_tol) {
      out.converged = true;
      break;
    }

    const double phi0 = objective(t);
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-18) {
      const Vec tn = vadd(t, vscale(alpha, step));
      const double phin = objective(tn);
      if (phin <= phi0 + 1e-4 * alpha * dot(grad, step)) {
        t = tn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw ConvergenceError("analytic_center: log-det line search collapsed");
  }
  out.t = t;
  return out;
}

}  // namespace

AnalyticCenterResult analytic_center(const NsdpInstance& inst, const Vec& xstar,
                                     const EigenSplit& split,
                                     std::optional<Mat> warm_start_y_ee,
                                     const AnalyticCenterOptions& opts) {
  const MultiplierSetParam param = parametrize_multiplier_set(inst, xstar, split);
  const std::size_t q = split.null_dim();
  const std::size_t p = param.dim();

  AnalyticCenterResult res;
  res.iterations = 0;

  Vec t(p, 0.0);
  if (q > 0) {
    if (warm_start_y_ee && p > 0) {
      // Project the warm start onto the affine family.
      if (warm_start_y_ee->rows() != q || warm_start_y_ee->cols() != q)
        throw DimError("analytic_center: warm start has wrong order");
      Mat cols(q * q, p);
      Vec rhs(q * q);
      const Mat gap = *warm_start_y_ee - param.y_ee0;
      for (std::size_t j = 0; j < p; ++j)
        for (std::size_t a = 0; a < q; ++a)
          for (std::size_t b = 0; b < q; ++b)
            cols(a * q + b, j) = param.basis_N[j](a, b);
      for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b) rhs[a * q + b] = gap(a, b);
      t = lstsq_minnorm(cols, rhs).x;
    }

    // Phase one: shrink a diagonal shift until the family point is interior.
    double lam = min_eig(SymMat::sym_of(param.y_ee_at(t)));
    if (lam <= 0.0) {
      double shift = 2.0 * std::max(1e-3, -lam);
      bool interior = false;
      for (int round = 0; round < 80; ++round) {
        const LogDetNewton ph =
            logdet_newton(param, t, shift, 1e-10, opts.max_iter, 1e-12);
        t = ph.t;
        res.iterations += ph.iterations;
        lam = min_eig(SymMat::sym_of(param.y_ee_at(t)));
        if (lam > 0.0) {
          interior = true;
          break;
        }
        shift *= 0.25;
        if (shift < 1e-14) break;
      }
      if (!interior)
        throw AssumptionError(
            "analytic_center: no interior multiplier reachable; strict "
            "complementarity appears to fail");
    }

    const LogDetNewton main =
        logdet_newton(param, t, 0.0, opts.decrement_tol, opts.max_iter, 0.0);
    if (!main.converged)
      throw ConvergenceError(
          "analytic_center: Newton decrement did not reach tolerance within " +
          std::to_string(opts.max_iter) + " iterations");
    t = main.t;
    res.iterations += main.iterations;
  }

  const Mat y_ee = param.y_ee_at(t);
  Mat y_full(inst.m, inst.m);
  if (q > 0) y_full = split.Estar * y_ee * transpose(split.Estar);
  res.Y_a = SymMat::sym_of(y_full);
  res.z_a = param.z_at(t);

  if (q > 0) {
    Mat lower;
    if (!cholesky(SymMat::sym_of(y_ee), lower))
      throw AssumptionError("analytic_center: center is not interior");
    res.logdet = 0.0;
    for (std::size_t i = 0; i < q; ++i) res.logdet += 2.0 * std::log(lower(i, i));
  } else {
    res.logdet = 0.0;
  }

  // First-order certificate: DeltaG^EE(x*;v) = (Y_a^EE)^-1, jac_h^T v = 0.
  {
    const Mat rows = u_constraint_rows(inst, xstar, split);
    Vec rhs(rows.rows(), 0.0);
    if (q > 0) {
      const Vec target = svec(SymMat::sym_of(mat_inverse_spd(y_ee)));
      for (std::size_t k = 0; k < target.size(); ++k) rhs[k] = target[k];
    }
    const LstsqResult cert = lstsq_minnorm(rows, rhs);
    res.certificate_v = cert.x;
    res.cert_residual = cert.residual;
  }
  return res;
}

Mat u_basis(const NsdpInstance& inst, const Vec& xstar, const EigenSplit& split) {
  return nullspace(u_constraint_rows(inst, xstar, split));
}

XiStarResult xi_star(const NsdpInstance& inst, const Vec& xstar,
                     const EigenSplit& split, const SymMat& y_a) {
  inst.check_x(xstar);
  const std::size_t n = inst.n;
  const std::size_t q = split.null_dim();
  const std::size_t r = split.rstar;
  const std::size_t M = svec_len(inst.m);

  // Recover the limit multiplier z from Y_a by least squares.
  Vec z_a;
  if (inst.s > 0) {
    const Vec resid = vsub(inst.grad_f(xstar), adjoint_JG(inst, xstar, y_a));
    z_a = lstsq_minnorm(inst.jac_h(xstar), vscale(-1.0, resid)).x;
  }
  const PrimalDualTriplet w_a{xstar, y_a, z_a};
  const SymMat hessL = hess_xx_lagrangian(inst, w_a);

  const Mat u = u_basis(inst, xstar, split);
  const std::size_t p = u.cols();
  const Mat v = orth_complement(u, n);

  const Mat y_ee = block_of(y_a, split, Block::EE);
  const Mat g_ff = block_of(inst.eval_G(xstar), split, Block::FF);
  Mat y_ee_inv(0, 0), g_ff_inv(0, 0);
  if (q > 0) y_ee_inv = mat_inverse_spd(y_ee);
  if (r > 0) g_ff_inv = mat_inverse_spd(g_ff);

  // eta2: the component of xi in the complement of U*, pinned by
  // DeltaG^EE(x*; V eta2) = (Y_a^EE)^-1 and jac_h^T V eta2 = 0.
  const Mat rows = u_constraint_rows(inst, xstar, split);
  const Mat rows_v = rows * v;
  Vec rhs(rows.rows(), 0.0);
  if (q > 0) {
    const Vec target = svec(SymMat::sym_of(y_ee_inv));
    for (std::size_t k = 0; k < target.size(); ++k) rhs[k] = target[k];
  }
  const LstsqResult eta2 = lstsq_minnorm(rows_v, rhs);
  if (eta2.residual > 1e-8 * std::max(1.0, norm2(rhs)))
    throw AssumptionError(
        "xi_star: limiting tangent system inconsistent (solution set empty or "
        "assumptions violated); residual " +
        std::to_string(eta2.residual));
  const Vec v_eta2 = v * eta2.x;

  // eta1: the U* component, from the positive definite reduced system.
  Vec xi_structured = v_eta2;
  if (p > 0) {
    std::vector<Vec> ucols(p);
    std::vector<Mat> dg_fe_u(p), dg_ef_u(p), dg_ff_u(p);
    for (std::size_t i = 0; i < p; ++i) {
      Vec ui(n);
      for (std::size_t a = 0; a < n; ++a) ui[a] = u(a, i);
      ucols[i] = ui;
      const SymMat dgu = delta_G(inst, xstar, ui);
      dg_fe_u[i] = block_of(dgu, split, Block::FE);
      dg_ef_u[i] = block_of(dgu, split, Block::EF);
      dg_ff_u[i] = block_of(dgu, split, Block::FF);
    }
    auto sigma_pair = [&](const Mat& dg_fe_i, const Mat& dg_ef_j) {
      // Tr(DeltaG^FE(u_i) Y^EE DeltaG^EF(u_j) G_FF^-1)
      if (r == 0 || q == 0) return 0.0;
      const Mat prod = dg_fe_i * y_ee * dg_ef_j * g_ff_inv;
      double tr = 0.0;
      for (std::size_t k = 0; k < prod.rows(); ++k) tr += prod(k, k);
      return tr;
    };
    Mat lhs(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        lhs(i, j) = dot(ucols[i], hessL.mat() * ucols[j]) +
                    2.0 * sigma_pair(dg_fe_u[i], dg_ef_u[j]);
    Mat lower;
    if (!cholesky(SymMat::sym_of(lhs), lower))
      throw AssumptionError(
          "xi_star: reduced system matrix not positive definite; SSOSC "
          "appears to fail");

    const SymMat dg_v = delta_G(inst, xstar, v_eta2);
    const Mat dg_ef_v = block_of(dg_v, split, Block::EF);
    Vec rhs1(p);
    for (std::size_t i = 0; i < p; ++i) {
      double val = -dot(ucols[i], hessL.mat() * v_eta2);
      val -= 2.0 * sigma_pair(dg_fe_u[i], dg_ef_v);
      if (r > 0) {
        const Mat prod = dg_ff_u[i] * g_ff_inv;
        for (std::size_t k = 0; k < prod.rows(); ++k) val += prod(k, k);
      }
      rhs1[i] = val;
    }
    const Vec eta1 = lu_solve(SymMat::sym_of(lhs).mat(), rhs1);
    xi_structured = vadd(xi_structured, u * eta1);
  }

  // Direct route: least-norm solve of the stacked limit equations in
  // (dx, svec(dY)).
  Mat stacked(p + M + inst.s, n + M);
  Vec stacked_rhs(p + M + inst.s, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    Vec ui(n);
    for (std::size_t a = 0; a < n; ++a) ui[a] = u(a, i);
    const Vec hrow = hessL.mat() * ui;
    for (std::size_t a = 0; a < n; ++a) stacked(i, a) = hrow[a];
    const Vec dgrow = svec(delta_G(inst, xstar, ui));
    for (std::size_t k = 0; k < M; ++k) stacked(i, n + k) = -dgrow[k];
  }
  const SymMat gstar = inst.eval_G(xstar);
  for (std::size_t i = 0; i < n; ++i) {
    Vec ei(n, 0.0);
    ei[i] = 1.0;
    const Vec col = svec(lyap_apply(y_a, delta_G(inst, xstar, ei)));
    for (std::size_t k = 0; k < M; ++k) stacked(p + k, i) = col[k];
  }
  for (std::size_t j = 0; j < M; ++j) {
    Vec basis(M, 0.0);
    basis[j] = 1.0;
    const Vec col = svec(lyap_apply(gstar, smat(basis)));
    for (std::size_t k = 0; k < M; ++k) stacked(p + k, n + j) = col[k];
  }
  {
    const Vec two_i = svec(SymMat::identity(inst.m).scaled(2.0));
    for (std::size_t k = 0; k < M; ++k) stacked_rhs[p + k] = two_i[k];
  }
  if (inst.s > 0) {
    const Mat jt = transpose(inst.jac_h(xstar));
    for (std::size_t k = 0; k < inst.s; ++k)
      for (std::size_t a = 0; a < n; ++a) stacked(p + M + k, a) = jt(k, a);
  }
  const LstsqResult direct = lstsq_minnorm(stacked, stacked_rhs);
  if (direct.residual > 1e-8 * std::max(1.0, norm2(stacked_rhs)))
    throw AssumptionError(
        "xi_star: stacked limit system inconsistent (solution set empty)");

  XiStarResult out;
  out.xi = xi_structured;
  Vec xi_direct(direct.x.begin(), direct.x.begin() + n);
  Vec dy_svec(direct.x.begin() + n, direct.x.end());
  out.dY = smat(dy_svec);
  out.full_system_residual = direct.residual;
  out.structured_vs_full = norm2(vsub(xi_structured, xi_direct));
  out.p_star = p;
  return out;
}

std::vector<PrimalDualTriplet> sample_multipliers(const NsdpInstance& inst,
                                                  const Vec& xstar,
                                                  const MultiplierSetParam& param,
                                                  const Vec& center_t,
                                                  std::size_t count,
                                                  std::uint64_t seed) {
  std::vector<PrimalDualTriplet> out;
  const std::size_t p = param.dim();
  const std::size_t q = param.y_ee0.rows();
  Rng rng(seed ^ 0xc2b2ae3d27d4eb4full);
  const Mat estar = param.split.Estar;
  for (std::size_t i = 0; i < count; ++i) {
    Vec t = center_t;
    if (p > 0) {
      Vec dt = rng.normal_vec(p);
      double scale = 0.5;
      for (int attempt = 0; attempt < 40; ++attempt) {
        t = vadd(center_t, vscale(scale, dt));
        if (q == 0 || min_eig(SymMat::sym_of(param.y_ee_at(t))) > 1e-10) break;
        scale *= 0.5;
      }
      if (q > 0 && min_eig(SymMat::sym_of(param.y_ee_at(t))) <= 0.0) t = center_t;
    }
    Mat y_full(inst.m, inst.m);
    if (q > 0) y_full = estar * param.y_ee_at(t) * transpose(estar);
    out.push_back(PrimalDualTriplet{xstar, SymMat::sym_of(y_full), param.z_at(t)});
  }
  return out;
}

}  // namespace cpath
