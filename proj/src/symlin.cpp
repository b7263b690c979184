#include "cpath/symlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cpath/rng.hpp"

namespace cpath {

namespace {

double off_diag_sum(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += std::fabs(a(i, j));
  return s;
}

}  // namespace

EigenDecomp eigh_ascending(const SymMat& x) {
  const std::size_t m = x.dim();
  Mat a = x.mat();
  Mat q = Mat::identity(m);

  const int max_sweeps = 100;
  const double scale = std::max(1.0, frob_norm(a));
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double sm = off_diag_sum(a);
    if (sm <= 1e-15 * scale) {
      converged = true;
      break;
    }
    // Early sweeps skip small pivots; later sweeps rotate everything.
    const double thresh = (sweep < 3) ? 0.2 * sm / double(m * m) : 0.0;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q_idx = p + 1; q_idx < m; ++q_idx) {
        const double apq = a(p, q_idx);
        if (std::fabs(apq) <= thresh) continue;
        const double app = a(p, p);
        const double aqq = a(q_idx, q_idx);
        const double g = 100.0 * std::fabs(apq);
        // Pivot negligible relative to the diagonal: zero it outright.
        if (sweep > 4 && std::fabs(app) + g == std::fabs(app) &&
            std::fabs(aqq) + g == std::fabs(aqq)) {
          a(p, q_idx) = 0.0;
          a(q_idx, p) = 0.0;
          continue;
        }
        if (apq == 0.0) continue;
        const double h = aqq - app;
        double t;
        if (std::fabs(h) + g == std::fabs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double ha = t * apq;
        a(p, p) = app - ha;
        a(q_idx, q_idx) = aqq + ha;
        a(p, q_idx) = 0.0;
        a(q_idx, p) = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          if (k == p || k == q_idx) continue;
          const double akp = a(k, p);
          const double akq = a(k, q_idx);
          a(k, p) = akp - s * (akq + akp * tau);
          a(p, k) = a(k, p);
          a(k, q_idx) = akq + s * (akp - akq * tau);
          a(q_idx, k) = a(k, q_idx);
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double qkp = q(k, p);
          const double qkq = q(k, q_idx);
          q(k, p) = qkp - s * (qkq + qkp * tau);
          q(k, q_idx) = qkq + s * (qkp - qkq * tau);
        }
      }
    }
  }
  if (!converged && off_diag_sum(a) > 1e-13 * scale)
    throw ConvergenceError(
        "eigh_ascending: Jacobi sweeps did not converge, off-diagonal residual " +
        std::to_string(off_diag_sum(a)));

  // Sort ascending; stable so repeated eigenvalues keep sweep order.
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  EigenDecomp d;
  d.values.resize(m);
  d.vectors = Mat(m, m);
  for (std::size_t jj = 0; jj < m; ++jj) {
    const std::size_t src = idx[jj];
    d.values[jj] = a(src, src);
    // Sign convention: first nonzero component nonnegative.
    double sign = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (q(i, src) != 0.0) {
        sign = (q(i, src) < 0.0) ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < m; ++i) d.vectors(i, jj) = sign * q(i, src);
  }
  return d;
}

double min_eig(const SymMat& x) {
  const EigenDecomp d = eigh_ascending(x);
  return d.values.front();
}

SymMat lyap_apply(const SymMat& x, const SymMat& y) {
  if (x.dim() != y.dim()) throw DimError("lyap_apply: dims differ");
  const std::size_t m = x.dim();
  SymMat r(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        acc += x(i, k) * y(k, j) + y(i, k) * x(k, j);
      r.set(i, j, acc);
    }
  return r;
}

SymMat lyap_solve(const SymMat& x, const SymMat& w) {
  if (x.dim() != w.dim()) throw DimError("lyap_solve: dims differ");
  const EigenDecomp d = eigh_ascending(x);
  if (d.values.front() <= 0.0)
    throw NotPsdError("lyap_solve: matrix not positive definite, lambda_min = " +
                          std::to_string(d.values.front()),
                      d.values.front());
  const std::size_t m = x.dim();
  const Mat qt = transpose(d.vectors);
  const Mat wp = qt * w.mat() * d.vectors;
  Mat vp(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      vp(i, j) = wp(i, j) / (d.values[i] + d.values[j]);
  return SymMat::sym_of(d.vectors * vp * qt);
}

SymMat pinv_psd(const SymMat& x, double rank_tol) {
  const EigenDecomp d = eigh_ascending(x);
  const double lam_max = d.values.back();
  const double cutoff = rank_tol * std::max(1.0, lam_max);
  if (d.values.front() < -cutoff)
    throw NotPsdError("pinv_psd: matrix significantly indefinite, lambda_min = " +
                          std::to_string(d.values.front()),
                      d.values.front());
  const std::size_t m = x.dim();
  Mat dinv(m, m);
  for (std::size_t i = 0; i < m; ++i)
    dinv(i, i) = (d.values[i] > cutoff) ? 1.0 / d.values[i] : 0.0;
  return SymMat::sym_of(d.vectors * dinv * transpose(d.vectors));
}

double min_singular_value(const Mat& a) {
  if (a.rows() != a.cols()) throw DimError("min_singular_value: matrix not square");
  if (a.rows() == 0) return 0.0;
  const SymMat gram = SymMat::sym_of(transpose(a) * a);
  const EigenDecomp d = eigh_ascending(gram);
  const double s0 = std::sqrt(std::max(0.0, d.values.front()));
  // The Gram route loses half the digits near singularity; the residual
  // ||A v|| along the trailing eigenvector recovers them. Below the Gram
  // noise floor sqrt(eps)||A|| the eigenvalue carries no information at all
  // (it may even round negative), so only the residual is trusted there.
  Vec v(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) v[i] = d.vectors(i, 0);
  const double res = norm2(a * v);
  const double gram_floor = 1.5e-8 * std::max(1.0, frob_norm(a));
  return (s0 > gram_floor) ? std::min(s0, res) : res;
}

bool cholesky(const SymMat& x, Mat& lower) {
  const std::size_t m = x.dim();
  Mat l(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    double d = x(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = x(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  lower = std::move(l);
  return true;
}

bool chol_psd_test(const SymMat& x) {
  Mat l;
  return cholesky(x, l);
}

Vec lu_solve(const Mat& a, const Vec& b) {
  if (a.rows() != a.cols()) throw DimError("lu_solve: matrix not square");
  if (a.rows() != b.size()) throw DimError("lu_solve: rhs length differs");
  const std::size_t n = a.rows();
  Mat lu = a;
  std::vector<std::size_t> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  const double scale = std::max(1.0, max_abs(a));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::fabs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best <= 1e-300 * scale)
      throw SingularSystemError("lu_solve: zero pivot at column " +
                                    std::to_string(k),
                                0.0);
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
      std::swap(piv[k], piv[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      lu(i, k) /= lu(k, k);
      const double lik = lu(i, k);
      if (lik == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= lik * lu(k, j);
    }
  }
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[piv[i]];
  for (std::size_t i = 1; i < n; ++i) {
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * x[j];
    x[ii] = s / lu(ii, ii);
  }
  return x;
}

namespace {

// Shared spectral machinery for the normal-equation least squares family.
// The eigenvalues of A^T A lose half the digits near zero, so each singular
// value is re-measured as ||A v_j|| along its eigenvector; classification at
// tolerances below sqrt(eps) needs the direct residual.
struct GramSpectrum {
  EigenDecomp d;       // of A^T A
  Vec sigmas;          // refined singular values, ascending order of d
  double sigma_max;
};

GramSpectrum gram_spectrum(const Mat& a) {
  GramSpectrum g;
  g.sigma_max = 0.0;
  if (a.cols() == 0) return g;
  Mat gram(a.cols(), a.cols());
  if (a.rows() > 0) gram = transpose(a) * a;
  g.d = eigh_ascending(SymMat::sym_of(gram));
  g.sigmas.resize(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    if (a.rows() == 0) {
      g.sigmas[j] = 0.0;
      continue;
    }
    Vec v(a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) v[i] = g.d.vectors(i, j);
    g.sigmas[j] = norm2(a * v);
    g.sigma_max = std::max(g.sigma_max, g.sigmas[j]);
  }
  return g;
}

}  // namespace

LstsqResult lstsq_minnorm(const Mat& a, const Vec& b, double rank_tol) {
  if (a.rows() != b.size()) throw DimError("lstsq_minnorm: rhs length differs");
  LstsqResult out;
  if (a.cols() == 0) {
    out.x = Vec{};
    out.residual = norm2(b);
    out.rank = 0;
    return out;
  }
  const GramSpectrum g = gram_spectrum(a);
  const double cutoff = rank_tol * std::max(g.sigma_max, 1e-300);
  Vec atb(a.cols(), 0.0);
  if (a.rows() > 0) atb = transpose(a) * b;
  const std::size_t q = a.cols();
  Vec y(q, 0.0);
  int rank = 0;
  for (std::size_t j = 0; j < q; ++j) {
    if (g.sigmas[j] <= cutoff) continue;
    ++rank;
    double proj = 0.0;
    for (std::size_t i = 0; i < q; ++i) proj += g.d.vectors(i, j) * atb[i];
    y[j] = proj / (g.sigmas[j] * g.sigmas[j]);
  }
  Vec x(q, 0.0);
  for (std::size_t i = 0; i < q; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j) s += g.d.vectors(i, j) * y[j];
    x[i] = s;
  }
  out.x = std::move(x);
  out.rank = rank;
  out.residual = (a.rows() > 0) ? norm2(vsub(a * out.x, b)) : 0.0;
  return out;
}

Mat nullspace(const Mat& a, double rank_tol) {
  if (a.cols() == 0) return Mat(0, 0);
  if (a.rows() == 0) return Mat::identity(a.cols());
  const GramSpectrum g = gram_spectrum(a);
  const double cutoff = rank_tol * g.sigma_max;
  std::size_t count = 0;
  for (double s : g.sigmas)
    if (s <= cutoff) ++count;
  Mat basis(a.cols(), count);
  std::size_t col = 0;
  for (std::size_t j = 0; j < a.cols() && col < count; ++j) {
    if (g.sigmas[j] > cutoff) continue;
    for (std::size_t i = 0; i < a.cols(); ++i) basis(i, col) = g.d.vectors(i, j);
    ++col;
  }
  return basis;
}

int numerical_rank(const Mat& a, double rank_tol) {
  if (a.cols() == 0 || a.rows() == 0) return 0;
  const GramSpectrum g = gram_spectrum(a);
  const double cutoff = rank_tol * g.sigma_max;
  int rank = 0;
  for (double s : g.sigmas)
    if (s > cutoff) ++rank;
  return rank;
}

Mat orth_complement(const Mat& u, std::size_t n) {
  if (u.cols() == 0) return Mat::identity(n);
  if (u.rows() != n) throw DimError("orth_complement: basis rows differ from n");
  // Eigenvectors of U U^T with eigenvalue ~0 span the complement.
  const SymMat proj = SymMat::sym_of(u * transpose(u));
  const EigenDecomp d = eigh_ascending(proj);
  std::size_t count = 0;
  for (double lam : d.values)
    if (lam < 0.5) ++count;
  Mat basis(n, count);
  std::size_t col = 0;
  for (std::size_t j = 0; j < n && col < count; ++j) {
    if (d.values[j] >= 0.5) continue;
    for (std::size_t i = 0; i < n; ++i) basis(i, col) = d.vectors(i, j);
    ++col;
  }
  return basis;
}

Mat Rng::random_orthogonal(std::size_t m) {
  Mat g = normal_mat(m, m);
  // Modified Gram-Schmidt with re-draw on near-dependence.
  for (std::size_t j = 0; j < m; ++j) {
    for (int attempt = 0;; ++attempt) {
      Vec v(m);
      for (std::size_t i = 0; i < m; ++i) v[i] = g(i, j);
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < m; ++i) proj += g(i, k) * v[i];
        for (std::size_t i = 0; i < m; ++i) v[i] -= proj * g(i, k);
      }
      const double nn = norm2(v);
      if (nn > 1e-8) {
        for (std::size_t i = 0; i < m; ++i) g(i, j) = v[i] / nn;
        break;
      }
      if (attempt > 16) throw ConvergenceError("random_orthogonal: degenerate draw");
      for (std::size_t i = 0; i < m; ++i) g(i, j) = normal();
    }
  }
  return g;
}

SymMat Rng::random_psd(std::size_t m, std::size_t rank, double lo, double hi) {
  const Mat q = random_orthogonal(m);
  Mat d(m, m);
  for (std::size_t i = 0; i < m && i < rank; ++i) d(i, i) = uniform(lo, hi);
  return SymMat::sym_of(q * d * transpose(q));
}

}  // namespace cpath
