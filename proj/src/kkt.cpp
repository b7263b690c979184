#include "cpath/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpath {

Vec grad_x_lagrangian(const NsdpInstance& inst, const PrimalDualTriplet& w) {
  inst.check_x(w.x);
  if (w.Y.dim() != inst.m) throw DimError("lagrangian: Y has wrong order");
  if (w.z.size() != inst.s) throw DimError("lagrangian: z has wrong length");
  Vec g = vsub(inst.grad_f(w.x), adjoint_JG(inst, w.x, w.Y));
  if (inst.s > 0) g = vadd(g, inst.jac_h(w.x) * w.z);
  return g;
}

SymMat hess_xx_lagrangian(const NsdpInstance& inst, const PrimalDualTriplet& w) {
  inst.check_x(w.x);
  SymMat h = inst.hess_f(w.x) - inst.hessG_contract(w.x, w.Y);
  if (inst.s > 0) h = h + inst.hessh_contract(w.x, w.z);
  return h;
}

KktReport kkt_residual(const NsdpInstance& inst, const PrimalDualTriplet& w) {
  KktReport rep;
  rep.stationarity_norm = norm2(grad_x_lagrangian(inst, w));
  const SymMat g = inst.eval_G(w.x);
  rep.comp_norm = frob_norm(g.mat() * w.Y.mat());
  rep.feas_h_norm = (inst.s > 0) ? norm2(inst.eval_h(w.x)) : 0.0;
  rep.min_eig_G = min_eig(g);
  rep.min_eig_Y = min_eig(w.Y);
  return rep;
}

BkktResidual bkkt_residual(const NsdpInstance& inst, const PrimalDualTriplet& w,
                           double mu, CompForm form) {
  if (!(mu > 0.0)) throw Error("bkkt_residual: mu must be positive");
  const SymMat g = inst.eval_G(w.x);
  if (!chol_psd_test(g))
    throw InteriorityError("bkkt_residual: G(x) not strictly positive definite",
                           min_eig(g));
  if (!chol_psd_test(w.Y))
    throw InteriorityError("bkkt_residual: Y not strictly positive definite",
                           min_eig(w.Y));
  BkktResidual r;
  r.stationarity = norm2(grad_x_lagrangian(inst, w));
  const Mat gy = g.mat() * w.Y.mat();
  Mat dev;
  if (form == CompForm::product) {
    dev = gy - mu * Mat::identity(inst.m);
  } else {
    dev = 0.5 * (gy + transpose(gy)) - mu * Mat::identity(inst.m);
  }
  r.complementarity = frob_norm(dev);
  r.feasibility = (inst.s > 0) ? norm2(inst.eval_h(w.x)) : 0.0;
  return r;
}

EigenSplit eigen_split(const SymMat& gstar, double rank_tol) {
  const EigenDecomp d = eigh_ascending(gstar);
  const double lam_max = d.values.back();
  const double cutoff = rank_tol * std::max(1.0, lam_max);
  if (d.values.front() < -cutoff)
    throw NotPsdError("eigen_split: matrix materially indefinite, lambda_min = " +
                          std::to_string(d.values.front()),
                      d.values.front());
  const std::size_t m = gstar.dim();
  EigenSplit split;
  split.Pstar = d.vectors;
  split.eigvals = d.values;
  split.rank_tol_used = rank_tol;
  split.cutoff = cutoff;
  std::size_t r = 0;
  for (double lam : d.values)
    if (lam >= cutoff) ++r;
  split.rstar = r;
  split.Estar = get_block(d.vectors, 0, 0, m, m - r);
  split.Fstar = get_block(d.vectors, 0, m - r, m, r);
  return split;
}

Mat block_of(const Mat& m, const EigenSplit& split, Block which) {
  if (m.rows() != split.dim() || m.cols() != split.dim())
    throw DimError("block_of: matrix order differs from split");
  switch (which) {
    case Block::EE: return transpose(split.Estar) * m * split.Estar;
    case Block::EF: return transpose(split.Estar) * m * split.Fstar;
    case Block::FE: return transpose(split.Fstar) * m * split.Estar;
    case Block::FF: return transpose(split.Fstar) * m * split.Fstar;
  }
  throw Error("block_of: unreachable");
}

namespace {

void check_split_matches(const NsdpInstance& inst, const Vec& xstar,
                         const EigenSplit& split) {
  const SymMat g = inst.eval_G(xstar);
  if (g.dim() != split.dim())
    throw DimError("sigma_term: split order differs from G(x*)");
  if (split.null_dim() == 0) return;
  const double ee = frob_norm(block_of(g, split, Block::EE));
  const double tol = 10.0 * split.cutoff * std::max(1.0, g.frob());
  if (ee > std::max(tol, 1e-8))
    throw ValidationError("sigma_term: split does not annihilate G(x*), |G^EE| = " +
                          std::to_string(ee));
}

// Symmetric power through the spectrum, clamping tiny negatives.
Mat sym_power(const Mat& block, double expo, double rank_tol) {
  if (block.rows() == 0) return block;
  const EigenDecomp d = eigh_ascending(SymMat::sym_of(block));
  const double cutoff = rank_tol * std::max(1.0, std::fabs(d.values.back()));
  Mat lam(block.rows(), block.rows());
  for (std::size_t i = 0; i < block.rows(); ++i) {
    const double v = d.values[i];
    if (v <= cutoff) {
      if (expo > 0.0)
        lam(i, i) = 0.0;
      else
        throw NotPsdError("sigma_term: singular positive block", v);
    } else {
      lam(i, i) = std::pow(v, expo);
    }
  }
  return d.vectors * lam * transpose(d.vectors);
}

}  // namespace

SymMat sigma_term(const NsdpInstance& inst, const Vec& xstar, const SymMat& y,
                  const EigenSplit& split) {
  inst.check_x(xstar);
  if (y.dim() != inst.m) throw DimError("sigma_term: Y has wrong order");
  check_split_matches(inst, xstar, split);
  const double ymin = min_eig(y);
  if (ymin < -split.rank_tol_used * std::max(1.0, y.frob()))
    throw NotPsdError("sigma_term: multiplier not PSD", ymin);
  const SymMat gdag = pinv_psd(inst.eval_G(xstar), split.rank_tol_used);
  SymMat omega(inst.n);
  std::vector<Mat> gi(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) gi[i] = inst.dG(xstar, i).mat();
  const Mat ym = y.mat();
  for (std::size_t i = 0; i < inst.n; ++i) {
    const Mat left = ym * gi[i] * gdag.mat();
    for (std::size_t j = i; j < inst.n; ++j) {
      double tr = 0.0;
      const Mat prod = left * gi[j];
      for (std::size_t k = 0; k < inst.m; ++k) tr += prod(k, k);
      omega.set(i, j, 2.0 * tr);
    }
  }
  return omega;
}

SigmaQuad sigma_quad(const NsdpInstance& inst, const Vec& xstar, const SymMat& y,
                     const EigenSplit& split, const Vec& d) {
  const SymMat omega = sigma_term(inst, xstar, y, split);
  SigmaQuad q{};
  q.by_definition = dot(d, omega.mat() * d);

  if (split.rstar == 0 || split.null_dim() == 0) {
    q.by_trace = 0.0;
    q.by_norm = 0.0;
    return q;
  }

  const SymMat dg = delta_G(inst, xstar, d);
  const Mat dg_ef = block_of(dg, split, Block::EF);
  const Mat dg_fe = block_of(dg, split, Block::FE);
  const Mat y_ee = block_of(y, split, Block::EE);
  const Mat g_ff = block_of(inst.eval_G(xstar), split, Block::FF);

  const Mat g_ff_inv = sym_power(g_ff, -1.0, split.rank_tol_used);
  const Mat prod = y_ee * dg_ef * g_ff_inv * dg_fe;
  double tr = 0.0;
  for (std::size_t k = 0; k < prod.rows(); ++k) tr += prod(k, k);
  q.by_trace = 2.0 * tr;

  const Mat y_half = sym_power(y_ee, 0.5, split.rank_tol_used);
  const Mat g_neg_half = sym_power(g_ff, -0.5, split.rank_tol_used);
  const double nrm = frob_norm(y_half * dg_ef * g_neg_half);
  q.by_norm = 2.0 * nrm * nrm;
  return q;
}

namespace {

// Rows of the map d -> svec(DeltaG^EE(x*; d)) stacked over the svec
// coordinates of S^(m-r), one column per primal coordinate.
Mat dg_ee_rows(const NsdpInstance& inst, const Vec& xstar, const EigenSplit& split) {
  const std::size_t q = split.null_dim();
  const std::size_t rows = svec_len(q);
  Mat out(rows, inst.n);
  if (q == 0) return Mat(0, inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    const Mat ee = block_of(inst.dG(xstar, i), split, Block::EE);
    const Vec col = svec(SymMat::sym_of(ee));
    for (std::size_t r = 0; r < rows; ++r) out(r, i) = col[r];
  }
  return out;
}

double quad_form(const SymMat& h, const Vec& d) { return dot(d, h.mat() * d); }

}  // namespace

ConditionReport condition_report(
    const NsdpInstance& inst, const Vec& xstar,
    const std::vector<PrimalDualTriplet>& multiplier_samples,
    const ConditionOptions& options) {
  inst.check_x(xstar);
  ConditionReport rep;

  std::vector<PrimalDualTriplet> valid;
  for (const auto& w : multiplier_samples) {
    PrimalDualTriplet probe{xstar, w.Y, w.z};
    if (kkt_residual(inst, probe).is_kkt(options.kkt_tol)) valid.push_back(probe);
  }
  if (valid.empty())
    throw AssumptionError(
        "condition_report: no supplied multiplier satisfies the KKT conditions");

  const SymMat gstar = inst.eval_G(xstar);
  const EigenSplit split = options.split ? *options.split
                                         : eigen_split(gstar, options.rank_tol);

  // Strict complementarity, checked through ranks and through G* + Y.
  {
    const SymMat y0 = valid.front().Y;
    const EigenDecomp dy = eigh_ascending(y0);
    const double ycut = options.rank_tol * std::max(1.0, dy.values.back());
    std::size_t rank_y = 0;
    for (double lam : dy.values)
      if (lam >= ycut) ++rank_y;
    rep.rank_G = split.rstar;
    rep.rank_Y = rank_y;
    const bool by_rank = (rep.rank_G + rep.rank_Y == inst.m);
    const bool by_sum = min_eig(gstar + y0) > split.cutoff;
    rep.sc = by_rank && by_sum;
  }

  // Nondegeneracy: rank of the v_ij rows plus the equality gradients.
  {
    const std::size_t q = split.null_dim();
    Mat rows(q * (q + 1) / 2, inst.n);
    std::size_t r = 0;
    std::vector<Mat> gi(inst.n);
    for (std::size_t k = 0; k < inst.n; ++k) gi[k] = inst.dG(xstar, k).mat();
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = i; j < q; ++j) {
        for (std::size_t k = 0; k < inst.n; ++k) {
          double acc = 0.0;
          for (std::size_t a = 0; a < inst.m; ++a)
            for (std::size_t b = 0; b < inst.m; ++b)
              acc += split.Estar(a, i) * gi[k](a, b) * split.Estar(b, j);
          rows(r, k) = acc;
        }
        ++r;
      }
    Mat stacked = rows;
    if (inst.s > 0) stacked = vcat(stacked, transpose(inst.jac_h(xstar)));
    rep.nc_required = q * (q + 1) / 2 + inst.s;
    rep.nc_rank = static_cast<std::size_t>(numerical_rank(stacked, options.rank_tol));
    rep.nc = (rep.nc_rank == rep.nc_required);
  }

  // MFCQ: full column rank of the equality Jacobian plus an interior
  // direction, searched when not supplied.
  {
    MfcqReport& mf = rep.mfcq;
    const Mat jh = inst.jac_h(xstar);
    mf.jac_full_rank =
        (inst.s == 0) ||
        (numerical_rank(jh, options.rank_tol) == static_cast<int>(inst.s));
    if (!mf.jac_full_rank) {
      mf.status = MfcqReport::Status::refuted;
    } else {
      const Mat zbasis = (inst.s > 0) ? nullspace(transpose(jh), options.rank_tol)
                                      : Mat::identity(inst.n);
      auto lam_of = [&](const Vec& d) {
        return min_eig(SymMat::sym_of(gstar.mat() + delta_G(inst, xstar, d).mat()));
      };
      auto consider = [&](const Vec& d, double lam) {
        if (lam > mf.witness_min_eig || !mf.witness_d) {
          mf.witness_min_eig = lam;
          mf.witness_d = d;
        }
      };
      mf.witness_min_eig = -std::numeric_limits<double>::infinity();
      bool found = false;
      if (options.mfcq_witness) {
        const Vec& d = *options.mfcq_witness;
        const double feas =
            (inst.s > 0) ? norm2(transpose(jh) * d) : 0.0;
        if (feas <= 1e-9 * std::max(1.0, norm2(d))) {
          const double lam = lam_of(d);
          consider(d, lam);
          if (lam > 0.0) found = true;
        }
      }
      const std::size_t q = zbasis.cols();
      if (!found && q > 0) {
        Rng rng(options.seed ^ 0x9e3779b97f4a7c15ull);
        for (std::size_t restart = 0; restart < options.mfcq_restarts && !found;
             ++restart) {
          Vec u = rng.unit_vec(q);
          double lam = lam_of(zbasis * u);
          // Projected gradient ascent on lambda_min over the unit ball.
          for (int it = 0; it < 40; ++it) {
            const Vec d = zbasis * u;
            const SymMat a = SymMat::sym_of(gstar.mat() + delta_G(inst, xstar, d).mat());
            const EigenDecomp ed = eigh_ascending(a);
            Vec v1(inst.m);
            for (std::size_t i = 0; i < inst.m; ++i) v1[i] = ed.vectors(i, 0);
            Vec grad(q, 0.0);
            for (std::size_t j = 0; j < q; ++j) {
              Vec ej(q, 0.0);
              ej[j] = 1.0;
              const SymMat dgj = delta_G(inst, xstar, zbasis * ej);
              grad[j] = dot(v1, dgj.mat() * v1);
            }
            double alpha = 0.5;
            bool improved = false;
            for (int ls = 0; ls < 12; ++ls) {
              Vec unew = vadd(u, vscale(alpha, grad));
              const double nn = norm2(unew);
              if (nn > 1.0) unew = vscale(1.0 / nn, unew);
              const double lnew = lam_of(zbasis * unew);
              if (lnew > lam + 1e-14) {
                u = unew;
                lam = lnew;
                improved = true;
                break;
              }
              alpha *= 0.5;
            }
            if (!improved) break;
          }
          consider(zbasis * u, lam);
          if (lam > 1e-8 * std::max(1.0, gstar.frob())) found = true;
        }
      }
      if (found && mf.witness_min_eig > 0.0)
        mf.status = MfcqReport::Status::verified;
      else
        mf.status = MfcqReport::Status::unknown;  // search failure proves nothing
    }
  }

  // SSOSC consistency against the supplied multipliers.
  {
    SsoscReport& so = rep.ssosc;
    so.multipliers_tested = valid.size();
    so.subspace_min_eig = std::numeric_limits<double>::infinity();
    so.cone_samples_min = std::numeric_limits<double>::infinity();

    const Vec gf = inst.grad_f(xstar);
    Mat eq_rows(1, inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) eq_rows(0, i) = gf[i];
    if (inst.s > 0) eq_rows = vcat(eq_rows, transpose(inst.jac_h(xstar)));

    const Mat dg_rows = dg_ee_rows(inst, xstar, split);
    const Mat sub_rows = vcat(eq_rows, dg_rows);
    const Mat sub_basis = nullspace(sub_rows, options.rank_tol);
    so.subspace_dim = sub_basis.cols();

    const Mat eq_basis = nullspace(eq_rows, options.rank_tol);

    Rng rng(options.seed ^ 0xda3e39cb94b95bdbull);
    std::vector<Vec> cone_dirs;
    const std::size_t q = split.null_dim();
    for (std::size_t t = 0; t < options.cone_samples && eq_basis.cols() > 0; ++t) {
      Vec d = eq_basis * rng.unit_vec(eq_basis.cols());
      bool ok = false;
      for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
        if (attempt == 1) d = vscale(-1.0, d);
        if (q == 0) {
          ok = true;
          break;
        }
        const Mat ee = block_of(delta_G(inst, xstar, d), split, Block::EE);
        const double lam = min_eig(SymMat::sym_of(ee));
        if (lam >= -1e-10 * std::max(1.0, frob_norm(ee))) ok = true;
      }
      if (ok && norm2(d) > 1e-12) cone_dirs.push_back(vscale(1.0 / norm2(d), d));
    }
    so.cone_samples = cone_dirs.size();

    bool all_positive = true;
    for (const auto& w : valid) {
      const SymMat h = hess_xx_lagrangian(inst, w) + sigma_term(inst, xstar, w.Y, split);
      const double pos_tol = 1e-9 * std::max(1.0, h.frob());
      if (so.subspace_dim > 0) {
        const Mat hr = transpose(sub_basis) * h.mat() * sub_basis;
        const double lam = min_eig(SymMat::sym_of(hr));
        so.subspace_min_eig = std::min(so.subspace_min_eig, lam);
        if (lam <= pos_tol) all_positive = false;
      }
      for (const Vec& d : cone_dirs) {
        const double v = quad_form(h, d);
        so.cone_samples_min = std::min(so.cone_samples_min, v);
        if (v <= pos_tol) all_positive = false;
      }
    }
    so.consistent = all_positive;
  }

  return rep;
}

}  // namespace cpath
