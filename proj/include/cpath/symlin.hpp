#pragma once

#include "cpath/matrix.hpp"

namespace cpath {

// Spectral cutoff used for numerical ranks throughout: singular values below
// rank_tol * sigma_max count as zero.
inline constexpr double kDefaultRankTol = 1e-8;

struct EigenDecomp {
  Vec values;   // nondecreasing
  Mat vectors;  // orthogonal; column j pairs with values[j]
};

// Full spectral decomposition by cyclic Jacobi with threshold sweeps.
// Deterministic: fixed sweep order, eigenvalues ascending, and the first
// nonzero component of each eigenvector made nonnegative.
EigenDecomp eigh_ascending(const SymMat& x);

double min_eig(const SymMat& x);

// L_X(Y) = XY + YX.
SymMat lyap_apply(const SymMat& x, const SymMat& y);

// Solves L_X(V) = W for X positive definite, via W'_ij / (lam_i + lam_j) in
// the eigenbasis of X. Throws NotPsdError when X is not positive definite.
SymMat lyap_solve(const SymMat& x, const SymMat& w);

// Moore-Penrose inverse of a positive semidefinite matrix; eigenvalues below
// rank_tol * max(1, lam_max) invert to zero. Throws NotPsdError for
// significantly indefinite input.
SymMat pinv_psd(const SymMat& x, double rank_tol = kDefaultRankTol);

// Smallest singular value of a square matrix via the spectrum of A^T A,
// sharpened by the residual norm ||A v|| along the trailing eigenvector.
double min_singular_value(const Mat& a);

// True iff a Cholesky factorization succeeds with strictly positive pivots.
bool chol_psd_test(const SymMat& x);

// Lower Cholesky factor; empty result when the matrix is not positive
// definite.
bool cholesky(const SymMat& x, Mat& lower);

// Solve A x = b for square A by LU with partial pivoting. Throws
// SingularSystemError when a pivot vanishes.
Vec lu_solve(const Mat& a, const Vec& b);

struct LstsqResult {
  Vec x;
  double residual;  // ||A x - b||
  int rank;
};

// Minimum-norm least-squares solution via the normal equations and a
// spectral pseudoinverse.
LstsqResult lstsq_minnorm(const Mat& a, const Vec& b,
                          double rank_tol = kDefaultRankTol);

// Orthonormal basis of the (right) null space of A.
Mat nullspace(const Mat& a, double rank_tol = kDefaultRankTol);

int numerical_rank(const Mat& a, double rank_tol = kDefaultRankTol);

// Orthonormal basis of the orthogonal complement of span(U) in R^n; U must
// have orthonormal columns (or be empty).
Mat orth_complement(const Mat& u, std::size_t n);

}  // namespace cpath
