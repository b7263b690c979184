#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cpath/model.hpp"
#include "cpath/rng.hpp"
#include "cpath/symlin.hpp"

namespace cpath {

// Primal-dual iterate w = (x, Y, z).
struct PrimalDualTriplet {
  Vec x;
  SymMat Y{1};
  Vec z;
};

// Orthogonal split P = [E, F] separating the null eigenspace of G(x*) from
// its positive eigenspace, eigenvalues ascending.
struct EigenSplit {
  Mat Pstar;      // m x m orthogonal
  Mat Estar;      // m x (m - rstar)
  Mat Fstar;      // m x rstar
  std::size_t rstar = 0;
  Vec eigvals;    // ascending
  double rank_tol_used = 0.0;
  double cutoff = 0.0;

  std::size_t dim() const { return Pstar.rows(); }
  std::size_t null_dim() const { return dim() - rstar; }
};

enum class Block { EE, EF, FE, FF };

struct KktReport {
  double stationarity_norm;
  double comp_norm;   // ||G(x) Y||_F
  double feas_h_norm;
  double min_eig_G;
  double min_eig_Y;

  bool is_kkt(double tol = 1e-9) const {
    return stationarity_norm <= tol && comp_norm <= tol && feas_h_norm <= tol &&
           min_eig_G >= -tol && min_eig_Y >= -tol;
  }
};

enum class CompForm { product, symmetric };

struct BkktResidual {
  double stationarity;
  double complementarity;
  double feasibility;
  double total() const {
    return std::sqrt(stationarity * stationarity +
                     complementarity * complementarity +
                     feasibility * feasibility);
  }
};

struct MfcqReport {
  bool jac_full_rank = true;
  // verified: witness found; refuted: Jacobian rank deficient;
  // unknown: witness search failed, which proves nothing.
  enum class Status { verified, unknown, refuted } status = Status::unknown;
  std::optional<Vec> witness_d;
  double witness_min_eig = 0.0;

  bool holds() const { return status == Status::verified; }
};

struct SsoscReport {
  double subspace_min_eig = 0.0;  // +inf when the subspace is trivial
  std::size_t subspace_dim = 0;
  double cone_samples_min = 0.0;  // +inf when no cone sample was accepted
  std::size_t cone_samples = 0;
  std::size_t multipliers_tested = 0;
  bool consistent = false;
};

struct ConditionReport {
  bool sc = false;
  std::size_t rank_G = 0, rank_Y = 0;
  bool nc = false;
  std::size_t nc_rank = 0, nc_required = 0;
  MfcqReport mfcq;
  SsoscReport ssosc;
};

struct ConditionOptions {
  double rank_tol = kDefaultRankTol;
  double kkt_tol = 1e-7;          // admission test for the supplied multipliers
  std::size_t cone_samples = 256; // seeded draws from the critical cone
  std::size_t mfcq_restarts = 100;
  std::uint64_t seed = 42;
  std::optional<Vec> mfcq_witness; // user-supplied direction, verified not trusted
  std::optional<EigenSplit> split; // override the split (repeated eigenvalues)
};

Vec grad_x_lagrangian(const NsdpInstance& inst, const PrimalDualTriplet& w);
SymMat hess_xx_lagrangian(const NsdpInstance& inst, const PrimalDualTriplet& w);

KktReport kkt_residual(const NsdpInstance& inst, const PrimalDualTriplet& w);

// Residuals of the barrier KKT conditions at parameter mu > 0. Throws
// InteriorityError when G(x) or Y is not strictly positive definite; strict
// interiority is part of the conditions, not a soft residual.
BkktResidual bkkt_residual(const NsdpInstance& inst, const PrimalDualTriplet& w,
                           double mu, CompForm form = CompForm::symmetric);

// Spectral split of G(x*); rstar counts eigenvalues at or above
// rank_tol * max(1, lam_max). Throws NotPsdError when G* is materially
// indefinite.
EigenSplit eigen_split(const SymMat& gstar, double rank_tol = kDefaultRankTol);

// The named block of E/F-coordinates: EE = E^T M E and so on.
Mat block_of(const Mat& m, const EigenSplit& split, Block which);
inline Mat block_of(const SymMat& m, const EigenSplit& split, Block which) {
  return block_of(m.mat(), split, which);
}

// Curvature contribution of the semidefinite cone at (x*, Y):
// entries 2 Y . dG_i G*^+ dG_j.
SymMat sigma_term(const NsdpInstance& inst, const Vec& xstar, const SymMat& y,
                  const EigenSplit& split);

struct SigmaQuad {
  double by_definition;  // d^T Omega d through the Moore-Penrose inverse
  double by_trace;       // block trace formula
  double by_norm;        // squared-norm formula
};

// The quadratic form of the sigma term evaluated three ways; they agree for
// any multiplier-shaped Y (Y = E S E^T with S PSD).
SigmaQuad sigma_quad(const NsdpInstance& inst, const Vec& xstar, const SymMat& y,
                     const EigenSplit& split, const Vec& d);

// Checks strict complementarity, nondegeneracy, MFCQ, and consistency with
// the strong second-order condition at xstar against the supplied multiplier
// samples.
ConditionReport condition_report(
    const NsdpInstance& inst, const Vec& xstar,
    const std::vector<PrimalDualTriplet>& multiplier_samples,
    const ConditionOptions& options = {});

}  // namespace cpath
