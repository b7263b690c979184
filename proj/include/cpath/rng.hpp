#pragma once

#include <cstdint>
#include <random>

#include "cpath/matrix.hpp"

namespace cpath {

// Deterministic random source. All randomized routines in the library take
// an explicit Rng (or a seed) so that runs are reproducible bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    // 53-bit mantissa draw in [0,1).
    return (gen_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller; self-contained so the stream does not depend on the
  // standard library's distribution internals.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  std::uint64_t next_u64() { return gen_(); }

  Vec normal_vec(std::size_t n) {
    Vec v(n);
    for (auto& x : v) x = normal();
    return v;
  }

  Vec unit_vec(std::size_t n) {
    Vec v = normal_vec(n);
    double nn = norm2(v);
    while (nn < 1e-12) {
      v = normal_vec(n);
      nn = norm2(v);
    }
    return vscale(1.0 / nn, v);
  }

  Mat normal_mat(std::size_t r, std::size_t c) {
    Mat m(r, c);
    for (auto& x : m.data()) x = normal();
    return m;
  }

  SymMat random_sym(std::size_t m, double scale = 1.0) {
    SymMat s(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) s.set(i, j, scale * uniform(-1.0, 1.0));
    return s;
  }

  // Orthogonal matrix from Gram-Schmidt on a Gaussian sample.
  Mat random_orthogonal(std::size_t m);

  // PSD matrix with exact rank r planted as Q diag(positive, 0) Q^T.
  SymMat random_psd(std::size_t m, std::size_t rank, double lo = 0.5,
                    double hi = 2.0);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cpath
