#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpath/matrix.hpp"

namespace cpath {

// One nonlinear semidefinite program
//   minimize f(x)  s.t.  G(x) PSD,  h(x) = 0
// presented through derivative oracles. Oracles are pure and the instance is
// immutable after construction, so concurrent evaluation is safe.
struct NsdpInstance {
  std::size_t n = 0;  // primal dimension
  std::size_t m = 0;  // matrix order
  std::size_t s = 0;  // number of equality constraints

  std::function<double(const Vec&)> eval_f;
  std::function<Vec(const Vec&)> grad_f;
  std::function<SymMat(const Vec&)> hess_f;  // n x n

  std::function<SymMat(const Vec&)> eval_G;              // m x m
  std::function<SymMat(const Vec&, std::size_t)> dG;     // dG/dx_i
  // n x n matrix with entries W . d2G/dx_i dx_j.
  std::function<SymMat(const Vec&, const SymMat&)> hessG_contract;

  std::function<Vec(const Vec&)> eval_h;  // length s
  std::function<Mat(const Vec&)> jac_h;   // n x s, column k = grad h_k
  // n x n matrix sum_k z_k hess h_k.
  std::function<SymMat(const Vec&, const Vec&)> hessh_contract;

  std::string name;
  std::string description;

  void check_x(const Vec& x) const {
    if (x.size() != n) throw DimError(name + ": point has wrong dimension");
  }
};

// Quadratic matrix inequality data: the concrete twice-differentiable family
// behind the file format.
//   G(x) = A0 + sum_i x_i A[i] + 1/2 sum_ij x_i x_j B[i][j]
//   f(x) = c0 + c.x + 1/2 x.Q x
//   h(x) = b + Hlin x + 1/2 (x.M_k x)_k
struct QmiData {
  std::string name;
  std::size_t n = 0, m = 0, s = 0;
  double c0 = 0.0;
  Vec c;                                // length n
  SymMat Q{1};                          // n x n
  SymMat A0{1};                         // m x m
  std::vector<SymMat> A;                // n blocks, m x m
  std::vector<std::vector<SymMat>> B;   // empty, or n x n table (B[i][j] = B[j][i])
  Vec b;                                // length s
  Mat Hlin;                             // s x n
  std::vector<SymMat> Mquad;            // empty, or s blocks, n x n

  bool has_quadratic_G() const { return !B.empty(); }
  bool has_quadratic_h() const { return !Mquad.empty(); }
  void validate() const;  // throws ValidationError on inconsistency
};

NsdpInstance make_instance(QmiData data);

// Directional derivative of G: sum_i d_i dG/dx_i.
SymMat delta_G(const NsdpInstance& inst, const Vec& x, const Vec& d);

// Adjoint of the Jacobian of G: component i is trace(dG/dx_i . Y).
Vec adjoint_JG(const NsdpInstance& inst, const Vec& x, const SymMat& y);

struct FdEntry {
  std::string oracle;  // which derivative was probed
  double max_rel_err;
  bool pass;
};

struct FdReport {
  std::vector<FdEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

// Central-difference cross-check of every supplied derivative oracle at x.
// Failures are report entries, never exceptions.
FdReport fd_check(const NsdpInstance& inst, const Vec& x, double step = 1e-5,
                  double tol = 1e-5);

// Parse a QMI instance file (UTF-8 JSON) or resolve a registry name.
NsdpInstance load_instance(const std::string& source);

// JSON serialization of the QMI family; inverse of the file parser.
std::string qmi_to_json(const QmiData& data);
QmiData qmi_from_json(const std::string& text);

}  // namespace cpath
