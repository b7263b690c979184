#pragma once

#include <string>
#include <vector>

#include "cpath/barrier.hpp"
#include "cpath/kkt.hpp"

namespace cpath {

// Jacobian of the symmetric-form barrier KKT system in (dx, svec(dY), dz)
// coordinates; square of order n + m(m+1)/2 + s.
struct AssembledSystem {
  Mat matrix;
  std::size_t n = 0, M = 0, s = 0;
  std::size_t order() const { return n + M + s; }
};

AssembledSystem assemble_A(const NsdpInstance& inst, const PrimalDualTriplet& w);

struct TangentDir {
  Vec dx;
  SymMat dY{1};
  Vec dz;
  double residual;  // relative residual of the linear solve
};

// Derivative of the path with respect to mu at w: solves A(w) wdot = [0;2I;0].
// Throws SingularSystemError when A(w) is numerically singular, which is the
// expected outcome exactly at degenerate KKT limits.
TangentDir tangent(const NsdpInstance& inst, const PrimalDualTriplet& w);

struct CorrectorOptions {
  double tol = 1e-11;       // symmetric-form residual
  std::size_t max_iter = 50;
  double tau = 0.99;        // fraction to boundary
  bool polish = true;       // one extra step after reaching tol
};

struct CorrectorResult {
  PrimalDualTriplet w;
  std::size_t iterations;
  double residual;
};

// Damped Newton on the symmetric-form barrier KKT equations at fixed mu.
CorrectorResult pdipm_corrector(const NsdpInstance& inst,
                                const PrimalDualTriplet& w0, double mu,
                                const CorrectorOptions& opts = {});

enum class TraceMode { barrier, pdipm, hybrid };

struct PathPoint {
  double mu;
  PrimalDualTriplet w;
  double bkkt_res;
  double sigmin_A;
  std::size_t newton_iters;
  double norm_d;  // ||x - x*|| when x* is known, else NaN
};

struct PathTrace {
  std::string instance;
  double mu0, sigma, mu_min;
  std::vector<PathPoint> points;
};

struct TraceOptions {
  TraceMode mode = TraceMode::hybrid;
  double accept_tol = 1e-9;  // symmetric-form residual per accepted point
  CorrectorOptions corrector;
  BarrierOptions barrier;
  std::optional<Vec> xstar;  // for the norm_d diagnostic only
  bool compute_sigmin = true;
};

// Follows the geometric schedule mu_{k+1} = sigma mu_k from mu0 down to
// mu_min, warm-starting each point from the previous one (with a first-order
// predictor in the pdipm and hybrid modes).
PathTrace trace_path(const NsdpInstance& inst, double mu0, double sigma,
                     double mu_min, const Vec& x0, const TraceOptions& opts = {});

// Membership in the tube P_rho(mu) = { x : ||x* + mu xi* - x|| < rho mu ||xi*|| }.
bool in_region(const Vec& x, const Vec& xstar, const Vec& xi_star, double rho,
               double mu);

// Minimum eigenvalue of d -> d^T hess L d + DeltaG(x;d) . L_G^-1 L_Y DeltaG(x;d)
// restricted to the null space of jac_h^T; positive value certifies the
// reduced convexity condition at w.
double reduced_form_min_eig(const NsdpInstance& inst, const PrimalDualTriplet& w);

}  // namespace cpath
