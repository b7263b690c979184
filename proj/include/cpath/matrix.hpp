#pragma once

#include <cstddef>
#include <vector>

#include "cpath/error.hpp"

namespace cpath {

using Vec = std::vector<double>;

// Dense row-major matrix. Zero rows or columns are legal; they show up as
// empty constraint Jacobians and empty eigen-split blocks.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : r_(rows), c_(cols), a_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  bool empty() const { return r_ == 0 || c_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

 private:
  std::size_t r_ = 0, c_ = 0;
  std::vector<double> a_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);
Vec operator*(const Mat& a, const Vec& v);

Mat transpose(const Mat& a);
double frob_norm(const Mat& a);
double max_abs(const Mat& a);

// Column/row composition used when assembling block systems.
Mat hcat(const Mat& a, const Mat& b);
Mat vcat(const Mat& a, const Mat& b);
Mat col_matrix(const Vec& v);          // n x 1
void set_block(Mat& dst, std::size_t i0, std::size_t j0, const Mat& src);
Mat get_block(const Mat& a, std::size_t i0, std::size_t j0, std::size_t rows,
              std::size_t cols);

Vec vadd(const Vec& a, const Vec& b);
Vec vsub(const Vec& a, const Vec& b);
Vec vscale(double s, const Vec& a);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);

// Symmetry tolerance applied by checking constructors: the gap
// max|M_ij - M_ji| is compared against kSymGapTol * max(1, max|M_ij|).
inline constexpr double kSymGapTol = 1e-12;

// Dense real symmetric matrix. Constructed from a square Mat; asymmetry
// below tolerance is averaged away, above tolerance is rejected.
class SymMat {
 public:
  explicit SymMat(std::size_t m);                       // zero matrix
  explicit SymMat(const Mat& m, double tol = kSymGapTol);

  static SymMat identity(std::size_t m);
  static SymMat diag(const Vec& d);
  // Exact symmetrization (M + M^T)/2 with no gap check; for results that are
  // symmetric by construction up to roundoff.
  static SymMat sym_of(const Mat& m);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  void set(std::size_t i, std::size_t j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  const Mat& mat() const { return m_; }
  double frob() const { return frob_norm(m_); }
  double trace() const;

  SymMat operator+(const SymMat& o) const;
  SymMat operator-(const SymMat& o) const;
  SymMat scaled(double s) const;

 private:
  struct unchecked_t {};
  SymMat(Mat m, unchecked_t) : m_(std::move(m)) {}
  Mat m_;
};

double inner(const SymMat& x, const SymMat& y);  // trace(XY)

// Isometric vectorization with sqrt(2)-scaled off-diagonals, row-major upper
// triangle: (0,0),(0,1),...,(0,m-1),(1,1),...,(m-1,m-1).
Vec svec(const SymMat& x);
SymMat smat(const Vec& v);  // inverse; length must be a triangular number
std::size_t svec_len(std::size_t m);

}  // namespace cpath
