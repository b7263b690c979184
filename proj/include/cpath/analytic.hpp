#pragma once

#include <optional>
#include <vector>

#include "cpath/kkt.hpp"
#include "cpath/model.hpp"

namespace cpath {

// Affine parametrization of the Lagrange multiplier set at x* reduced to the
// EE block: every member is (Y0 + sum_j t_j N_j, z0 + sum_j t_j zeta_j).
struct MultiplierSetParam {
  EigenSplit split;
  Mat y_ee0{0, 0};                // particular EE block (least norm)
  Vec z0;                         // particular equality multiplier
  std::vector<Mat> basis_N;       // null directions, EE blocks
  std::vector<Vec> basis_zeta;    // matching z directions
  std::size_t dim() const { return basis_N.size(); }

  Mat y_ee_at(const Vec& t) const;
  Vec z_at(const Vec& t) const;
};

// Analyzes the stationarity system at x* and returns the particular solution
// plus a basis of its null space. Throws AssumptionError when no Lagrange
// multiplier exists at x*.
MultiplierSetParam parametrize_multiplier_set(const NsdpInstance& inst,
                                              const Vec& xstar,
                                              const EigenSplit& split);

struct AnalyticCenterResult {
  SymMat Y_a{1};
  Vec z_a;
  Vec certificate_v;
  double cert_residual;
  double logdet;          // log det of the EE block at the center
  std::size_t iterations;
};

struct AnalyticCenterOptions {
  double decrement_tol = 1e-12;
  std::size_t max_iter = 200;
  double rank_tol = kDefaultRankTol;
};

// Unique maximizer of log det Y^EE over the multiplier set, found by damped
// Newton on the affine parametrization, together with the first-order
// certificate direction v solving DeltaG^EE(x*;v) = (Y_a^EE)^-1,
// jac_h(x*)^T v = 0. Throws AssumptionError when no interior multiplier can
// be reached, which signals a strict-complementarity failure.
AnalyticCenterResult analytic_center(const NsdpInstance& inst, const Vec& xstar,
                                     const EigenSplit& split,
                                     std::optional<Mat> warm_start_y_ee = {},
                                     const AnalyticCenterOptions& opts = {});

// Orthonormal basis of U* = { d : DeltaG^EE(x*;d) = 0, jac_h(x*)^T d = 0 }.
Mat u_basis(const NsdpInstance& inst, const Vec& xstar, const EigenSplit& split);

struct XiStarResult {
  Vec xi;
  SymMat dY{1};        // least-norm dual direction from the direct solve
  double full_system_residual;
  double structured_vs_full;
  std::size_t p_star;  // dimension of U*
};

// Limiting direction of the primal path, computed twice: through the
// structured reduction (eta^2 least squares plus the positive definite eta^1
// system) and through a least-norm solve of the stacked limit equations.
// Throws AssumptionError when the structured matrix is not positive definite
// (SSOSC signal) or the system is inconsistent (empty solution set).
XiStarResult xi_star(const NsdpInstance& inst, const Vec& xstar,
                     const EigenSplit& split, const SymMat& y_a);

// Interior samples of the multiplier set around a center, used to feed the
// condition checkers.
std::vector<PrimalDualTriplet> sample_multipliers(const NsdpInstance& inst,
                                                  const Vec& xstar,
                                                  const MultiplierSetParam& param,
                                                  const Vec& center_t,
                                                  std::size_t count,
                                                  std::uint64_t seed);

}  // namespace cpath
