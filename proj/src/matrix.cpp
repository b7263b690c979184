#include "cpath/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cpath {

namespace {
void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimError(std::string(op) + ": shape mismatch " +
                   std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                   " vs " + std::to_string(b.rows()) + "x" +
                   std::to_string(b.cols()));
}
}  // namespace

Mat operator+(const Mat& a, const Mat& b) {
  check_same_shape(a, b, "mat add");
  Mat r(a.rows(), a.cols());
  for (std::size_t k = 0; k < r.data().size(); ++k)
    r.data()[k] = a.data()[k] + b.data()[k];
  return r;
}

Mat operator-(const Mat& a, const Mat& b) {
  check_same_shape(a, b, "mat sub");
  Mat r(a.rows(), a.cols());
  for (std::size_t k = 0; k < r.data().size(); ++k)
    r.data()[k] = a.data()[k] - b.data()[k];
  return r;
}

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimError("mat mul: inner dims differ");
  Mat r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

Mat operator*(double s, const Mat& a) {
  Mat r(a.rows(), a.cols());
  for (std::size_t k = 0; k < r.data().size(); ++k) r.data()[k] = s * a.data()[k];
  return r;
}

Vec operator*(const Mat& a, const Vec& v) {
  if (a.cols() != v.size()) throw DimError("matvec: dims differ");
  Vec r(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * v[j];
    r[i] = acc;
  }
  return r;
}

Mat transpose(const Mat& a) {
  Mat r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

double frob_norm(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s = std::max(s, std::fabs(v));
  return s;
}

Mat hcat(const Mat& a, const Mat& b) {
  if (a.empty() && a.rows() == 0) return b;
  if (b.empty() && b.rows() == 0) return a;
  if (a.rows() != b.rows()) throw DimError("hcat: row counts differ");
  Mat r(a.rows(), a.cols() + b.cols());
  set_block(r, 0, 0, a);
  set_block(r, 0, a.cols(), b);
  return r;
}

Mat vcat(const Mat& a, const Mat& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  if (a.cols() != b.cols()) throw DimError("vcat: column counts differ");
  Mat r(a.rows() + b.rows(), a.cols());
  set_block(r, 0, 0, a);
  set_block(r, a.rows(), 0, b);
  return r;
}

Mat col_matrix(const Vec& v) {
  Mat r(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) r(i, 0) = v[i];
  return r;
}

void set_block(Mat& dst, std::size_t i0, std::size_t j0, const Mat& src) {
  if (i0 + src.rows() > dst.rows() || j0 + src.cols() > dst.cols())
    throw DimError("set_block: block exceeds target");
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) dst(i0 + i, j0 + j) = src(i, j);
}

Mat get_block(const Mat& a, std::size_t i0, std::size_t j0, std::size_t rows,
              std::size_t cols) {
  if (i0 + rows > a.rows() || j0 + cols > a.cols())
    throw DimError("get_block: block exceeds source");
  Mat r(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) r(i, j) = a(i0 + i, j0 + j);
  return r;
}

Vec vadd(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimError("vadd: lengths differ");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec vsub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimError("vsub: lengths differ");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec vscale(double s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimError("dot: lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::fabs(v));
  return s;
}

SymMat::SymMat(std::size_t m) : m_(m, m) {
  if (m == 0) throw DimError("SymMat: dim must be >= 1");
}

SymMat::SymMat(const Mat& m, double tol) : m_(m) {
  if (m.rows() == 0) throw DimError("SymMat: dim must be >= 1");
  if (m.rows() != m.cols()) throw DimError("SymMat: matrix not square");
  double gap = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      gap = std::max(gap, std::fabs(m(i, j) - m(j, i)));
  const double scale = std::max(1.0, max_abs(m));
  if (gap > tol * scale)
    throw ValidationError("SymMat: asymmetry " + std::to_string(gap) +
                          " exceeds tolerance");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m_(i, j) + m_(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
}

SymMat SymMat::identity(std::size_t m) { return SymMat(Mat::identity(m), 0.0); }

SymMat SymMat::diag(const Vec& d) {
  SymMat r(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) r.set(i, i, d[i]);
  return r;
}

SymMat SymMat::sym_of(const Mat& m) {
  if (m.rows() != m.cols()) throw DimError("sym_of: matrix not square");
  if (m.rows() == 0) throw DimError("sym_of: dim must be >= 1");
  Mat r(m.rows(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.rows(); ++j)
      r(i, j) = 0.5 * (m(i, j) + m(j, i));
  return SymMat(std::move(r), unchecked_t{});
}

double SymMat::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += m_(i, i);
  return s;
}

SymMat SymMat::operator+(const SymMat& o) const {
  return SymMat(m_ + o.m_, unchecked_t{});
}

SymMat SymMat::operator-(const SymMat& o) const {
  return SymMat(m_ - o.m_, unchecked_t{});
}

SymMat SymMat::scaled(double s) const { return SymMat(s * m_, unchecked_t{}); }

double inner(const SymMat& x, const SymMat& y) {
  if (x.dim() != y.dim()) throw DimError("inner: dims differ");
  double s = 0.0;
  const std::size_t m = x.dim();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s += x(i, j) * y(j, i);
  return s;
}

std::size_t svec_len(std::size_t m) { return m * (m + 1) / 2; }

Vec svec(const SymMat& x) {
  const std::size_t m = x.dim();
  Vec v(svec_len(m));
  const double rt2 = std::sqrt(2.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j)
      v[k++] = (i == j) ? x(i, j) : rt2 * x(i, j);
  return v;
}

SymMat smat(const Vec& v) {
  // Invert k = m(m+1)/2.
  std::size_t m = 0;
  while (svec_len(m) < v.size()) ++m;
  if (svec_len(m) != v.size())
    throw DimError("smat: length is not a triangular number");
  SymMat x(m);
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const double val = v[k++];
      x.set(i, j, (i == j) ? val : inv_rt2 * val);
    }
  return x;
}

}  // namespace cpath
