#pragma once

#include "cpath/kkt.hpp"
#include "cpath/model.hpp"

namespace cpath {

struct PsiEval {
  double value;
  Vec gradient;
  SymMat hessian{1};
};

// Log-barrier merit psi_mu(x) = f(x) - mu log det G(x) with its derivatives.
// Throws InteriorityError when G(x) is not positive definite.
PsiEval psi_eval(const NsdpInstance& inst, const Vec& x, double mu);

struct BarrierOptions {
  double tol_abs = 1e-12;   // projected gradient threshold, absolute part
  double tol_rel = 1e-8;    // scaled by mu
  double feas_tol = 1e-10;  // ||h(x)||
  std::size_t max_iter = 200;
  double tau = 0.99;        // fraction to boundary
};

struct BarrierSolveResult {
  Vec x;
  double mu;
  std::size_t iterations;
  double projected_grad_norm;
  double feas_h_norm;
  double min_eig_G;
  bool converged;
};

// Equality-constrained Newton minimization of psi_mu. The start must be
// interior; infeasibility in h is removed by a Gauss-Newton phase first.
BarrierSolveResult barrier_solve(const NsdpInstance& inst, double mu,
                                 const Vec& x0, const BarrierOptions& opts = {});

// Lift a barrier solution to the primal-dual triplet: Y = mu G(x)^-1 and the
// least-squares multiplier z.
PrimalDualTriplet lift_to_triplet(const NsdpInstance& inst, const Vec& x, double mu);

}  // namespace cpath
