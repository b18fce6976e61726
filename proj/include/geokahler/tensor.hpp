#pragma once

// Generic tensor calculus on jets at a point: Christoffel symbols, brackets,
// covariant derivatives, exterior derivatives and curvature.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "geokahler/chart.hpp"
#include "geokahler/jet.hpp"

namespace geokahler {

struct JetVec {
  int n = 0;
  std::array<Jet, kMaxDim> c{};

  JetVec() = default;
  explicit JetVec(int dim) : n(dim) {}
  Jet& operator[](int i) { return c[i]; }
  const Jet& operator[](int i) const { return c[i]; }
  std::vector<double> values() const {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = c[i].value();
    return v;
  }
  int order() const {
    int o = kMaxOrder;
    for (int i = 0; i < n; ++i) o = std::min(o, c[i].order());
    return o;
  }
};

struct JetMat {
  int n = 0;
  std::array<std::array<Jet, kMaxDim>, kMaxDim> m{};

  JetMat() = default;
  explicit JetMat(int dim) : n(dim) {}
  Jet& operator()(int i, int j) { return m[i][j]; }
  const Jet& operator()(int i, int j) const { return m[i][j]; }
  int order() const {
    int o = kMaxOrder;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) o = std::min(o, m[i][j].order());
    return o;
  }
  double max_abs() const {
    double r = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r = std::max(r, std::fabs(m[i][j].value()));
    return r;
  }
};

inline JetVec operator+(JetVec a, const JetVec& b) {
  for (int i = 0; i < a.n; ++i) a[i] += b[i];
  return a;
}
inline JetVec operator-(JetVec a, const JetVec& b) {
  for (int i = 0; i < a.n; ++i) a[i] -= b[i];
  return a;
}
inline JetVec operator*(const Jet& s, JetVec a) {
  for (int i = 0; i < a.n; ++i) a[i] = s * a[i];
  return a;
}
inline JetVec operator*(double s, JetVec a) {
  for (int i = 0; i < a.n; ++i) a[i] *= s;
  return a;
}
inline JetMat operator+(JetMat a, const JetMat& b) {
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) a(i, j) += b(i, j);
  return a;
}
inline JetMat operator-(JetMat a, const JetMat& b) {
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) a(i, j) -= b(i, j);
  return a;
}
inline JetMat operator*(double s, JetMat a) {
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) a(i, j) *= s;
  return a;
}
inline JetMat operator*(const JetMat& a, const JetMat& b) {
  JetMat r(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) {
      Jet s = a(i, 0) * b(0, j);
      for (int k = 1; k < a.n; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}
inline JetMat transpose(const JetMat& a) {
  JetMat r(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) r(i, j) = a(j, i);
  return r;
}
inline JetVec truncated(JetVec v, int order) {
  for (int i = 0; i < v.n; ++i) v[i] = v[i].truncated(order);
  return v;
}
inline JetMat truncated(JetMat a, int order) {
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) a(i, j) = a(i, j).truncated(order);
  return a;
}

// ---- field evaluation ----

inline Jet eval_jet(const ScalarField& f, const std::vector<Jet>& x) { return f.e.eval(x); }
inline JetVec eval_jet(const VectorField& v, const std::vector<Jet>& x) {
  JetVec r(static_cast<int>(x.size()));
  for (int i = 0; i < r.n; ++i) r[i] = v.c.at(i).eval(x);
  return r;
}
inline JetVec eval_jet(const CovectorField& v, const std::vector<Jet>& x) {
  JetVec r(static_cast<int>(x.size()));
  for (int i = 0; i < r.n; ++i) r[i] = v.c.at(i).eval(x);
  return r;
}
inline JetMat eval_jet(const MetricField& g, const std::vector<Jet>& x) {
  JetMat r(static_cast<int>(x.size()));
  for (int i = 0; i < r.n; ++i)
    for (int j = 0; j < r.n; ++j) r(i, j) = g.g.at(i).at(j).eval(x);
  return r;
}
inline Jet eval_jet(const ScalarField& f, const Point& p, int order) { return eval_jet(f, seeds(p, order)); }
inline JetVec eval_jet(const VectorField& v, const Point& p, int order) { return eval_jet(v, seeds(p, order)); }
inline JetMat eval_jet(const MetricField& g, const Point& p, int order) { return eval_jet(g, seeds(p, order)); }

inline JetVec coordinate_field(int i, int n) {
  JetVec e(n);
  for (int k = 0; k < n; ++k) e[k] = Jet(k == i ? 1.0 : 0.0, n);
  return e;
}

// ---- linear algebra on jets ----

inline JetMat inverse(const JetMat& a) {
  const int n = a.n;
  JetMat m = a;
  JetMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = Jet(i == j ? 1.0 : 0.0, n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row)
      if (std::fabs(m(row, col).value()) > std::fabs(m(piv, col).value())) piv = row;
    if (m(piv, col).value() == 0.0) throw std::domain_error("singular matrix");
    std::swap(m.m[piv], m.m[col]);
    std::swap(r.m[piv], r.m[col]);
    const Jet inv = reciprocal(m(col, col));
    for (int j = 0; j < n; ++j) {
      m(col, j) = m(col, j) * inv;
      r(col, j) = r(col, j) * inv;
    }
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      const Jet f = m(row, col);
      for (int j = 0; j < n; ++j) {
        m(row, j) -= f * m(col, j);
        r(row, j) -= f * r(col, j);
      }
    }
  }
  return r;
}

inline Jet determinant(const JetMat& a) {
  const int n = a.n;
  if (n == 1) return a(0, 0);
  Jet sum(0.0, n);
  for (int j = 0; j < n; ++j) {
    JetMat minor(n - 1);
    for (int r = 1; r < n; ++r) {
      int cc = 0;
      for (int c = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = a(r, c);
    }
    const Jet term = a(0, j) * determinant(minor);
    if (j % 2 == 0) sum += term;
    else sum -= term;
  }
  return sum;
}

// Matrix whose columns are the given vectors.
inline JetMat columns(const std::vector<JetVec>& cols) {
  const int n = cols.at(0).n;
  JetMat m(n);
  for (int j = 0; j < static_cast<int>(cols.size()); ++j)
    for (int i = 0; i < n; ++i) m(i, j) = cols[j][i];
  return m;
}

inline JetVec apply(const JetMat& a, const JetVec& v) {
  JetVec r(a.n);
  for (int i = 0; i < a.n; ++i) {
    Jet s = a(i, 0) * v[0];
    for (int j = 1; j < a.n; ++j) s += a(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

inline Jet pair(const JetVec& alpha, const JetVec& v) {
  Jet s = alpha[0] * v[0];
  for (int i = 1; i < v.n; ++i) s += alpha[i] * v[i];
  return s;
}

inline Jet inner(const JetMat& g, const JetVec& a, const JetVec& b) { return pair(apply(g, a), b); }

inline JetVec flat(const JetMat& g, const JetVec& v) { return apply(g, v); }
inline JetVec sharp(const JetMat& ginv, const JetVec& alpha) { return apply(ginv, alpha); }

inline JetVec differential(const Jet& f, int n) {
  JetVec r(n);
  for (int i = 0; i < r.n; ++i) r[i] = f.partial(i);
  return r;
}

inline JetVec gradient(const JetMat& ginv, const Jet& f) { return sharp(ginv, differential(f, ginv.n)); }

// X(f) for a vector field X.
inline Jet derivative_along(const JetVec& X, const Jet& f) { return pair(differential(f, X.n), X); }

inline JetVec lie_bracket(const JetVec& X, const JetVec& Y) {
  const int n = X.n;
  std::array<JetVec, kMaxDim> dX, dY;
  for (int i = 0; i < n; ++i) {
    dX[i] = JetVec(n);
    dY[i] = JetVec(n);
    for (int k = 0; k < n; ++k) {
      dX[i][k] = X[k].partial(i);
      dY[i][k] = Y[k].partial(i);
    }
  }
  JetVec r(n);
  for (int k = 0; k < n; ++k) {
    Jet s = X[0] * dY[0][k] - Y[0] * dX[0][k];
    for (int i = 1; i < n; ++i) s += X[i] * dY[i][k] - Y[i] * dX[i][k];
    r[k] = s;
  }
  return r;
}

// Gamma^k_ij stored as gamma[k](i, j).
struct Christoffel {
  int n = 0;
  std::array<JetMat, kMaxDim> gamma{};
  const Jet& operator()(int k, int i, int j) const { return gamma[k](i, j); }
};

inline Christoffel christoffel(const JetMat& g, const JetMat& ginv) {
  const int n = g.n;
  std::array<JetMat, kMaxDim> dg;  // dg[l](i,j) = d_l g_ij
  for (int l = 0; l < n; ++l) {
    dg[l] = JetMat(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg[l](i, j) = g(i, j).partial(l);
  }
  // first kind: G_lij = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::array<JetMat, kMaxDim> first;
  for (int l = 0; l < n; ++l) {
    first[l] = JetMat(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet v = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        first[l](i, j) = v;
        first[l](j, i) = v;
      }
  }
  Christoffel c;
  c.n = n;
  const int o = std::max(g.order() - 1, 0);
  for (int k = 0; k < n; ++k) {
    c.gamma[k] = JetMat(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s = ginv(k, 0).truncated(o) * first[0](i, j);
        for (int l = 1; l < n; ++l) s += ginv(k, l).truncated(o) * first[l](i, j);
        c.gamma[k](i, j) = s;
        c.gamma[k](j, i) = s;
      }
  }
  return c;
}

inline Christoffel christoffel(const JetMat& g) { return christoffel(g, inverse(g)); }

// nabla_X Y
inline JetVec covariant_derivative(const Christoffel& G, const JetVec& X, const JetVec& Y) {
  const int n = X.n;
  JetVec r(n);
  for (int k = 0; k < n; ++k) {
    Jet s(0.0, n);
    for (int i = 0; i < n; ++i) {
      Jet inner_sum = Y[k].partial(i);
      for (int j = 0; j < n; ++j) inner_sum += G(k, i, j) * Y[j];
      s += X[i] * inner_sum;
    }
    r[k] = s;
  }
  return r;
}

// (dalpha)_ij = d_i alpha_j - d_j alpha_i
inline JetMat exterior_derivative(const JetVec& alpha) {
  const int n = alpha.n;
  JetMat r(n);
  for (int i = 0; i < n; ++i) {
    r(i, i) = Jet(0.0, n, std::max(alpha.order() - 1, 0));
    for (int j = i + 1; j < n; ++j) {
      Jet v = alpha[j].partial(i) - alpha[i].partial(j);
      r(i, j) = v;
      r(j, i) = -v;
    }
  }
  return r;
}

// Totally antisymmetric 3-form stored densely.
struct Form3 {
  int n = 0;
  std::array<Jet, 64> c{};
  Jet& operator()(int i, int j, int k) { return c[(i * 4 + j) * 4 + k]; }
  const Jet& operator()(int i, int j, int k) const { return c[(i * 4 + j) * 4 + k]; }
  double max_abs() const {
    double r = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) r = std::max(r, std::fabs((*this)(i, j, k).value()));
    return r;
  }
};

inline Form3 exterior_derivative(const JetMat& beta) {
  Form3 r;
  r.n = beta.n;
  const int n = beta.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        r(i, j, k) = beta(j, k).partial(i) + beta(k, i).partial(j) + beta(i, j).partial(k);
  return r;
}

// (L_X g)_ij = X^l d_l g_ij + g_lj d_i X^l + g_il d_j X^l
inline JetMat lie_derivative_metric(const JetMat& g, const JetVec& X) {
  const int n = g.n;
  const int o = std::max(std::min(g.order(), X.order()) - 1, 0);
  JetMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(0.0, n, o);
      for (int l = 0; l < n; ++l)
        s += X[l].truncated(o) * g(i, j).partial(l) + g(l, j).truncated(o) * X[l].partial(i) +
             g(i, l).truncated(o) * X[l].partial(j);
      r(i, j) = s;
    }
  return r;
}

// (L_X A)^j_i = X^l d_l A^j_i - (d_l X^j) A^l_i + A^j_l d_i X^l
inline JetMat lie_derivative_endo(const JetMat& A, const JetVec& X) {
  const int n = A.n;
  const int o = std::max(std::min(A.order(), X.order()) - 1, 0);
  JetMat r(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Jet s(0.0, n, o);
      for (int l = 0; l < n; ++l)
        s += X[l].truncated(o) * A(j, i).partial(l) - X[j].partial(l) * A(l, i).truncated(o) +
             A(j, l).truncated(o) * X[l].partial(i);
      r(j, i) = s;
    }
  return r;
}

// Curvature values at the point.  riemann[a][b][c][d] = R^a_bcd with
// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z, i.e.
// R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb.
struct Curvature {
  int n = 0;
  std::array<std::array<std::array<std::array<double, 4>, 4>, 4>, 4> riemann{};
  std::array<std::array<double, 4>, 4> ricci{};
  double scalar = 0.0;
  double max_riemann_lowered = 0.0;  // max |R_abcd|
};

inline Curvature curvature(const JetMat& g) {
  if (g.order() < 2) throw std::logic_error("curvature needs metric jets of order >= 2");
  const int n = g.n;
  const JetMat ginv = inverse(g);
  const Christoffel G = christoffel(g, ginv);
  Curvature c;
  c.n = n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc)
        for (int d = 0; d < n; ++d) {
          double v = G(a, d, b).d(cc) - G(a, cc, b).d(d);
          for (int e = 0; e < n; ++e)
            v += G(a, cc, e).value() * G(e, d, b).value() - G(a, d, e).value() * G(e, cc, b).value();
          c.riemann[a][b][cc][d] = v;
        }
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += c.riemann[a][b][a][d];
      c.ricci[b][d] = s;
    }
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) c.scalar += ginv(b, d).value() * c.ricci[b][d];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc)
        for (int d = 0; d < n; ++d) {
          double low = 0.0;
          for (int e = 0; e < n; ++e) low += g(a, e).value() * c.riemann[e][b][cc][d];
          c.max_riemann_lowered = std::max(c.max_riemann_lowered, std::fabs(low));
        }
  return c;
}

// Convenience wrappers evaluating expression fields at a point.
inline Christoffel christoffel(const MetricField& g, const Point& p) { return christoffel(eval_jet(g, p, 1)); }
inline Curvature curvature(const MetricField& g, const Point& p) { return curvature(eval_jet(g, p, 2)); }
inline JetVec lie_bracket(const VectorField& X, const VectorField& Y, const Point& p) {
  const auto s = seeds(p, 1);
  return lie_bracket(eval_jet(X, s), eval_jet(Y, s));
}
inline JetVec covariant_derivative(const MetricField& g, const VectorField& X, const VectorField& Y,
                                   const Point& p) {
  const auto s = seeds(p, 1);
  return covariant_derivative(christoffel(eval_jet(g, s)), eval_jet(X, s), eval_jet(Y, s));
}
inline JetVec gradient(const MetricField& g, const ScalarField& f, const Point& p) {
  const auto s = seeds(p, 1);
  return gradient(inverse(eval_jet(g, s)), eval_jet(f, s));
}

}  // namespace geokahler
