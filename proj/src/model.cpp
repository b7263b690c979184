#include "cpath/model.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include <json.hpp>

namespace cpath {

void QmiData::validate() const {
  if (n == 0) throw ValidationError("qmi: n must be positive");
  if (m == 0) throw ValidationError("qmi: m must be positive");
  if (c.size() != n) throw ValidationError("qmi: c has length " +
                                           std::to_string(c.size()) +
                                           ", expected " + std::to_string(n));
  if (Q.dim() != n) throw ValidationError("qmi: Q must be n x n");
  if (A0.dim() != m) throw ValidationError("qmi: A0 must be m x m");
  if (A.size() != n) throw ValidationError("qmi: G needs n coefficient blocks");
  for (const auto& ai : A)
    if (ai.dim() != m) throw ValidationError("qmi: A block is not m x m");
  if (!B.empty()) {
    if (B.size() != n) throw ValidationError("qmi: B table must be n x n");
    for (const auto& row : B) {
      if (row.size() != n) throw ValidationError("qmi: B table must be n x n");
      for (const auto& bij : row)
        if (bij.dim() != m) throw ValidationError("qmi: B block is not m x m");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (frob_norm(B[i][j].mat() - B[j][i].mat()) >
            kSymGapTol * std::max(1.0, B[i][j].frob()))
          throw ValidationError("qmi: B table not index-symmetric");
  }
  if (b.size() != s) throw ValidationError("qmi: b has wrong length");
  if (s > 0 && (Hlin.rows() != s || Hlin.cols() != n))
    throw ValidationError("qmi: H must be s x n");
  if (!Mquad.empty()) {
    if (Mquad.size() != s) throw ValidationError("qmi: M needs s blocks");
    for (const auto& mk : Mquad)
      if (mk.dim() != n) throw ValidationError("qmi: M block is not n x n");
  }
}

NsdpInstance make_instance(QmiData data) {
  data.validate();
  auto d = std::make_shared<const QmiData>(std::move(data));

  NsdpInstance inst;
  inst.n = d->n;
  inst.m = d->m;
  inst.s = d->s;
  inst.name = d->name;

  inst.eval_f = [d](const Vec& x) {
    double v = d->c0 + dot(d->c, x);
    v += 0.5 * dot(x, d->Q.mat() * x);
    return v;
  };
  inst.grad_f = [d](const Vec& x) { return vadd(d->c, d->Q.mat() * x); };
  inst.hess_f = [d](const Vec&) { return d->Q; };

  inst.eval_G = [d](const Vec& x) {
    Mat g = d->A0.mat();
    for (std::size_t i = 0; i < d->n; ++i) g = g + x[i] * d->A[i].mat();
    if (d->has_quadratic_G())
      for (std::size_t i = 0; i < d->n; ++i)
        for (std::size_t j = 0; j < d->n; ++j)
          g = g + (0.5 * x[i] * x[j]) * d->B[i][j].mat();
    return SymMat::sym_of(g);
  };
  inst.dG = [d](const Vec& x, std::size_t i) {
    Mat g = d->A[i].mat();
    if (d->has_quadratic_G())
      for (std::size_t j = 0; j < d->n; ++j) g = g + x[j] * d->B[i][j].mat();
    return SymMat::sym_of(g);
  };
  inst.hessG_contract = [d](const Vec&, const SymMat& w) {
    SymMat out(d->n);
    if (d->has_quadratic_G())
      for (std::size_t i = 0; i < d->n; ++i)
        for (std::size_t j = i; j < d->n; ++j)
          out.set(i, j, inner(w, d->B[i][j]));
    return out;
  };

  inst.eval_h = [d](const Vec& x) {
    Vec h = d->b;
    if (d->s > 0) h = vadd(h, d->Hlin * x);
    if (d->has_quadratic_h())
      for (std::size_t k = 0; k < d->s; ++k)
        h[k] += 0.5 * dot(x, d->Mquad[k].mat() * x);
    return h;
  };
  inst.jac_h = [d](const Vec& x) {
    Mat j(d->n, d->s);
    for (std::size_t k = 0; k < d->s; ++k) {
      Vec col(d->n, 0.0);
      for (std::size_t i = 0; i < d->n; ++i) col[i] = d->Hlin(k, i);
      if (d->has_quadratic_h()) col = vadd(col, d->Mquad[k].mat() * x);
      for (std::size_t i = 0; i < d->n; ++i) j(i, k) = col[i];
    }
    return j;
  };
  inst.hessh_contract = [d](const Vec&, const Vec& z) {
    SymMat out(d->n);
    if (d->has_quadratic_h()) {
      if (z.size() != d->s) throw DimError("hessh_contract: z has wrong length");
      Mat acc(d->n, d->n);
      for (std::size_t k = 0; k < d->s; ++k) acc = acc + z[k] * d->Mquad[k].mat();
      out = SymMat::sym_of(acc);
    }
    return out;
  };
  return inst;
}

SymMat delta_G(const NsdpInstance& inst, const Vec& x, const Vec& d) {
  inst.check_x(x);
  if (d.size() != inst.n) throw DimError("delta_G: direction has wrong dimension");
  Mat acc(inst.m, inst.m);
  for (std::size_t i = 0; i < inst.n; ++i) {
    if (d[i] == 0.0) continue;
    acc = acc + d[i] * inst.dG(x, i).mat();
  }
  return SymMat::sym_of(acc);
}

Vec adjoint_JG(const NsdpInstance& inst, const Vec& x, const SymMat& y) {
  inst.check_x(x);
  if (y.dim() != inst.m) throw DimError("adjoint_JG: multiplier has wrong order");
  Vec out(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) out[i] = inner(inst.dG(x, i), y);
  return out;
}

namespace {

Vec shifted(const Vec& x, std::size_t i, double delta) {
  Vec y = x;
  y[i] += delta;
  return y;
}

}  // namespace

FdReport fd_check(const NsdpInstance& inst, const Vec& x, double step, double tol) {
  inst.check_x(x);
  FdReport rep;
  const double abs_floor = 1e-8;
  auto push = [&](const std::string& name, double diff, double ref) {
    const double bound = std::max(abs_floor, tol * std::max(1.0, ref));
    rep.entries.push_back({name, diff / std::max(1.0, ref), diff <= bound});
  };

  const std::size_t n = inst.n;

  {  // grad_f vs central differences of f
    Vec fd(n);
    for (std::size_t i = 0; i < n; ++i)
      fd[i] = (inst.eval_f(shifted(x, i, step)) - inst.eval_f(shifted(x, i, -step))) /
              (2.0 * step);
    const Vec an = inst.grad_f(x);
    push("grad_f", norm2(vsub(fd, an)), norm2(an));
  }

  {  // hess_f vs central differences of grad_f
    const SymMat an = inst.hess_f(x);
    Mat fd(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      const Vec gp = inst.grad_f(shifted(x, j, step));
      const Vec gm = inst.grad_f(shifted(x, j, -step));
      for (std::size_t i = 0; i < n; ++i) fd(i, j) = (gp[i] - gm[i]) / (2.0 * step);
    }
    push("hess_f", frob_norm(fd - an.mat()), an.frob());
  }

  {  // dG vs central differences of G
    double worst_diff = 0.0, worst_ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const SymMat gp = inst.eval_G(shifted(x, i, step));
      const SymMat gm = inst.eval_G(shifted(x, i, -step));
      const Mat fd = (1.0 / (2.0 * step)) * (gp.mat() - gm.mat());
      const SymMat an = inst.dG(x, i);
      worst_diff = std::max(worst_diff, frob_norm(fd - an.mat()));
      worst_ref = std::max(worst_ref, an.frob());
    }
    push("dG", worst_diff, worst_ref);
  }

  {  // hessG_contract vs differences of dG, probed with W = I and a fixed W
    SymMat w_probe(inst.m);
    double c = 0.17;
    for (std::size_t i = 0; i < inst.m; ++i)
      for (std::size_t j = i; j < inst.m; ++j) {
        w_probe.set(i, j, c);
        c = std::fmod(c * 1.618 + 0.21, 1.0) - 0.5;
      }
    double worst_diff = 0.0, worst_ref = 0.0;
    for (const SymMat& w : {SymMat::identity(inst.m), w_probe}) {
      const SymMat an = inst.hessG_contract(x, w);
      Mat fd(n, n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const SymMat gp = inst.dG(shifted(x, j, step), i);
          const SymMat gm = inst.dG(shifted(x, j, -step), i);
          fd(i, j) = inner(SymMat::sym_of((1.0 / (2.0 * step)) * (gp.mat() - gm.mat())), w);
        }
      worst_diff = std::max(worst_diff, frob_norm(fd - an.mat()));
      worst_ref = std::max(worst_ref, an.frob());
    }
    push("hessG_contract", worst_diff, worst_ref);
  }

  if (inst.s > 0) {
    {  // jac_h vs central differences of h
      const Mat an = inst.jac_h(x);
      Mat fd(n, inst.s);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec hp = inst.eval_h(shifted(x, i, step));
        const Vec hm = inst.eval_h(shifted(x, i, -step));
        for (std::size_t k = 0; k < inst.s; ++k)
          fd(i, k) = (hp[k] - hm[k]) / (2.0 * step);
      }
      push("jac_h", frob_norm(fd - an), frob_norm(an));
    }
    {  // hessh_contract probed with z = ones and an alternating probe
      Vec z_alt(inst.s);
      for (std::size_t k = 0; k < inst.s; ++k) z_alt[k] = (k % 2 == 0) ? 1.0 : -0.7;
      double worst_diff = 0.0, worst_ref = 0.0;
      for (const Vec& z : {Vec(inst.s, 1.0), z_alt}) {
        const SymMat an = inst.hessh_contract(x, z);
        Mat fd(n, n);
        for (std::size_t j = 0; j < n; ++j) {
          const Mat jp = inst.jac_h(shifted(x, j, step));
          const Mat jm = inst.jac_h(shifted(x, j, -step));
          for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < inst.s; ++k)
              acc += z[k] * (jp(i, k) - jm(i, k)) / (2.0 * step);
            fd(i, j) = acc;
          }
        }
        worst_diff = std::max(worst_diff, frob_norm(fd - an.mat()));
        worst_ref = std::max(worst_ref, an.frob());
      }
      push("hessh_contract", worst_diff, worst_ref);
    }
  }

  return rep;
}

namespace {

using nlohmann::ordered_json;

ordered_json mat_to_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError("qmi: " + what + " is not an array");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  if (rows > 0) {
    if (!j[0].is_array())
      throw ValidationError("qmi: " + what + " rows must be arrays");
    cols = j[0].size();
  }
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ValidationError("qmi: " + what + " is ragged");
    for (std::size_t jj = 0; jj < cols; ++jj) {
      if (!j[i][jj].is_number())
        throw ValidationError("qmi: " + what + " has a non-numeric entry");
      m(i, jj) = j[i][jj].get<double>();
    }
  }
  return m;
}

SymMat sym_from_json(const ordered_json& j, const std::string& what) {
  const Mat m = mat_from_json(j, what);
  if (m.rows() != m.cols())
    throw ValidationError("qmi: " + what + " is not square");
  try {
    return SymMat(m);
  } catch (const ValidationError&) {
    throw ValidationError("qmi: block " + what + " is asymmetric beyond 1e-12");
  }
}

Vec vec_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError("qmi: " + what + " is not an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ValidationError("qmi: " + what + " has a non-numeric entry");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

std::string qmi_to_json(const QmiData& data) {
  data.validate();
  ordered_json j;
  j["name"] = data.name;
  j["n"] = data.n;
  j["m"] = data.m;
  j["s"] = data.s;
  ordered_json f;
  f["c0"] = data.c0;
  f["c"] = ordered_json(data.c);
  f["Q"] = mat_to_json(data.Q.mat());
  j["f"] = std::move(f);
  ordered_json g;
  g["A0"] = mat_to_json(data.A0.mat());
  ordered_json blocks = ordered_json::array();
  for (const auto& ai : data.A) blocks.push_back(mat_to_json(ai.mat()));
  g["A"] = std::move(blocks);
  if (data.has_quadratic_G()) {
    ordered_json table = ordered_json::array();
    for (const auto& row : data.B) {
      ordered_json jr = ordered_json::array();
      for (const auto& bij : row) jr.push_back(mat_to_json(bij.mat()));
      table.push_back(std::move(jr));
    }
    g["B"] = std::move(table);
  }
  j["G"] = std::move(g);
  ordered_json h;
  h["b"] = ordered_json(data.b);
  h["H"] = mat_to_json(data.Hlin);
  if (data.has_quadratic_h()) {
    ordered_json ms = ordered_json::array();
    for (const auto& mk : data.Mquad) ms.push_back(mat_to_json(mk.mat()));
    h["M"] = std::move(ms);
  }
  j["h"] = std::move(h);
  return j.dump(2);
}

QmiData qmi_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("qmi: JSON parse failure: ") + e.what());
  }
  QmiData d;
  try {
    d.name = j.value("name", std::string("unnamed"));
    d.n = j.at("n").get<std::size_t>();
    d.m = j.at("m").get<std::size_t>();
    d.s = j.at("s").get<std::size_t>();
    const auto& f = j.at("f");
    d.c0 = f.value("c0", 0.0);
    d.c = vec_from_json(f.at("c"), "f.c");
    d.Q = sym_from_json(f.at("Q"), "f.Q");
    const auto& g = j.at("G");
    d.A0 = sym_from_json(g.at("A0"), "G.A0");
    for (std::size_t i = 0; i < g.at("A").size(); ++i)
      d.A.push_back(sym_from_json(g.at("A")[i], "G.A[" + std::to_string(i) + "]"));
    if (g.contains("B")) {
      for (std::size_t i = 0; i < g.at("B").size(); ++i) {
        std::vector<SymMat> row;
        for (std::size_t jj = 0; jj < g.at("B")[i].size(); ++jj)
          row.push_back(sym_from_json(
              g.at("B")[i][jj],
              "G.B[" + std::to_string(i) + "][" + std::to_string(jj) + "]"));
        d.B.push_back(std::move(row));
      }
    }
    const auto& h = j.at("h");
    d.b = vec_from_json(h.at("b"), "h.b");
    d.Hlin = mat_from_json(h.at("H"), "h.H");
    if (h.contains("M"))
      for (std::size_t k = 0; k < h.at("M").size(); ++k)
        d.Mquad.push_back(
            sym_from_json(h.at("M")[k], "h.M[" + std::to_string(k) + "]"));
  } catch (const ordered_json::exception& e) {
    throw ValidationError(std::string("qmi: missing or malformed field: ") + e.what());
  }
  if (d.s == 0 && d.Hlin.rows() == 0) d.Hlin = Mat(0, d.n);
  d.validate();
  return d;
}

}  // namespace cpath
