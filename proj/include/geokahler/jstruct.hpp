#pragma once

// Almost complex structures J_{g,k,t}: J k = t on V and J x = y on H for the
// oriented frame (x, y).  Nijenhuis tensor, admissibility and related checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "geokahler/optics.hpp"
#include "geokahler/tensor.hpp"

namespace geokahler {

// J^i_j = t^i a_j - k^i b_j + y^i x_j - x^i y_j, where (a, b) are the V
// coordinates of a vector and x_j, y_j the flats of the frame.
inline JetMat build_J(const JetMat& g, const JetVec& k, const JetVec& t, const Frame& fr) {
  const int n = g.n;
  const JetVec kf = flat(g, k), tf = flat(g, t), xf = flat(g, fr.x), yf = flat(g, fr.y);
  JetMat J(n);
  for (int j = 0; j < n; ++j) {
    const Jet a = fr.Ainv(0, 0) * kf[j] + fr.Ainv(0, 1) * tf[j];
    const Jet b = fr.Ainv(1, 0) * kf[j] + fr.Ainv(1, 1) * tf[j];
    for (int i = 0; i < n; ++i) J(i, j) = t[i] * a - k[i] * b + fr.y[i] * xf[j] - fr.x[i] * yf[j];
  }
  return J;
}

// N(a,b) = [Ja,Jb] - J[Ja,b] - J[a,Jb] - [a,b]
inline JetVec nijenhuis(const JetMat& J, const JetVec& a, const JetVec& b) {
  const JetVec Ja = apply(J, a), Jb = apply(J, b);
  const int o = std::max(std::min({J.order(), a.order(), b.order()}) - 1, 0);
  const JetMat Jt = truncated(J, o);
  return lie_bracket(Ja, Jb) - apply(Jt, lie_bracket(Ja, b)) - apply(Jt, lie_bracket(a, Jb)) - lie_bracket(a, b);
}

// Largest component of N over coordinate basis pairs.
inline double nijenhuis_max(const JetMat& J) {
  double m = 0.0;
  for (int i = 0; i < J.n; ++i)
    for (int j = i + 1; j < J.n; ++j) {
      const JetVec N = nijenhuis(J, coordinate_field(i, J.n), coordinate_field(j, J.n));
      for (int k = 0; k < J.n; ++k) m = std::max(m, std::fabs(N[k].value()));
    }
  return m;
}

inline double max_abs(const JetVec& v) {
  double m = 0.0;
  for (int i = 0; i < v.n; ++i) m = std::max(m, std::fabs(v[i].value()));
  return m;
}

// Local data for a pair (k, t) spanning V at a point.
struct SplitLocal {
  JetMat g, ginv;
  Christoffel Gamma;
  JetVec k, t;
  Frame frame;
  JetMat J;
};

inline SplitLocal make_split_local(const JetMat& g, const JetVec& k, const JetVec& t, int orientation) {
  SplitLocal L;
  L.g = g;
  L.ginv = inverse(g);
  L.Gamma = christoffel(g, L.ginv);
  L.k = k;
  L.t = t;
  L.frame = build_frame(g, {k, t}, orientation);
  L.J = build_J(g, k, t, L.frame);
  return L;
}

// Component of a vector along H, expressed in the frame.
inline std::array<double, 2> h_components(const SplitLocal& L, const JetVec& v) {
  const int o = v.order();
  const JetMat g = truncated(L.g, o);
  return {inner(g, v, truncated(L.frame.x, o)).value(), inner(g, v, truncated(L.frame.y, o)).value()};
}

// |df(x)|, |df(y)| normalized by (1 + |df|).
inline double h_gradient_residual(const SplitLocal& L, const Jet& f) {
  const JetVec df = differential(f, L.g.n);
  const double fx = pair(df, truncated(L.frame.x, df.order())).value();
  const double fy = pair(df, truncated(L.frame.y, df.order())).value();
  double nrm = 0.0;
  for (int i = 0; i < df.n; ++i) nrm += df[i].value() * df[i].value();
  return std::max(std::fabs(fx), std::fabs(fy)) / (1.0 + std::sqrt(nrm));
}

// Sufficient integrability conditions: V-components of [k,x], [k,y], [t,x],
// [t,y], and |J S_k - S_t| on H with S the shear matrices.
struct IntegrabilityResiduals {
  double brackets = 0.0;
  double shear = 0.0;
};

inline IntegrabilityResiduals check_integrability_sufficient(const SplitLocal& L) {
  IntegrabilityResiduals r;
  const int o = std::max(std::min(L.k.order(), L.frame.x.order()) - 1, 0);
  const JetMat g = truncated(L.g, o);
  const JetVec k = truncated(L.k, o), t = truncated(L.t, o);
  for (const JetVec* v : {&L.k, &L.t})
    for (const JetVec* h : {&L.frame.x, &L.frame.y}) {
      const JetVec br = lie_bracket(*v, *h);
      r.brackets = std::max({r.brackets, std::fabs(inner(g, br, k).value()), std::fabs(inner(g, br, t).value())});
    }
  const OpticalScalars sk = optical_scalars(optics_jets(L.g, L.Gamma, L.k, L.frame));
  const OpticalScalars st = optical_scalars(optics_jets(L.g, L.Gamma, L.t, L.frame));
  // J on H in the frame is [[0,-1],[1,0]].
  const auto& Sk = sk.shear_matrix;
  const auto& St = st.shear_matrix;
  const double JS[2][2] = {{-Sk[1][0], -Sk[1][1]}, {Sk[0][0], Sk[0][1]}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) r.shear = std::max(r.shear, std::fabs(JS[a][b] - St[a][b]));
  return r;
}

// J for the opposite orientation of H: J x = -y.
inline JetMat opposite_J(const SplitLocal& L) {
  Frame fr = L.frame;
  fr.y = -1.0 * fr.y;
  return build_J(L.g, L.k, L.t, fr);
}

// (L_X J) a = [X, J a] - J [X, a]
inline JetMat lie_derivative_J(const JetVec& X, const JetMat& J) { return lie_derivative_endo(J, X); }

struct AdmissibilityReport {
  double G = 0.0;
  bool nonsingular = false;
  double h_min_eig = 0.0;
  bool h_spacelike = false;
  double nij_i = 0.0;  // V-components of [k,x],[k,y],[t,x],[t,y]
  double nij_ii = 0.0;  // |J S_k - S_t| on H
  double t_gradient = 0.0;  // |t - ell grad tau| / (1 + |t|), when tau is given
  double gkt_h_gradient = 0.0;  // H-gradient of g(k,t)
  double gkk_h_gradient = 0.0;  // H-gradient of g(k,k)
  double ell = 0.0;
  bool nij_i_ok = false, nij_ii_ok = false, t_gradient_ok = false, gkt_ok = false, gkk_ok = false;
  bool integrable = false;
  bool admissible = false;
};

inline AdmissibilityReport check_admissible(const SplitLocal& L, const Jet* tau, double tol = 1e-7) {
  AdmissibilityReport r;
  r.G = L.frame.G.value();
  r.nonsingular = std::fabs(r.G) > tol;
  r.h_min_eig = std::min(inner(L.g, L.frame.x, L.frame.x).value(), inner(L.g, L.frame.y, L.frame.y).value());
  r.h_spacelike = r.h_min_eig > 0.0;

  const IntegrabilityResiduals ir = check_integrability_sufficient(L);
  r.nij_i = ir.brackets;
  r.nij_ii = ir.shear;

  if (tau != nullptr) {
    const JetVec dtau = differential(*tau, L.g.n);
    const JetVec grad = apply(truncated(L.ginv, dtau.order()), dtau);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < L.g.n; ++i) {
      num += L.t[i].value() * grad[i].value();
      den += grad[i].value() * grad[i].value();
    }
    r.ell = den > 0.0 ? num / den : 0.0;
    double res = 0.0, tn = 0.0;
    for (int i = 0; i < L.g.n; ++i) {
      res = std::max(res, std::fabs(L.t[i].value() - r.ell * grad[i].value()));
      tn = std::max(tn, std::fabs(L.t[i].value()));
    }
    r.t_gradient = res / (1.0 + tn);
  }
  r.gkt_h_gradient = h_gradient_residual(L, inner(L.g, L.k, L.t));
  r.gkk_h_gradient = h_gradient_residual(L, inner(L.g, L.k, L.k));

  r.nij_i_ok = r.nij_i < tol;
  r.nij_ii_ok = r.nij_ii < tol;
  r.t_gradient_ok = tau == nullptr || r.t_gradient < tol;
  r.gkt_ok = r.gkt_h_gradient < tol;
  r.gkk_ok = r.gkk_h_gradient < tol;
  r.integrable = r.nij_i_ok && r.nij_ii_ok;
  r.admissible = r.nonsingular && r.h_spacelike && r.integrable && r.t_gradient_ok && r.gkt_ok && r.gkk_ok;
  return r;
}

struct GeometricSufficients {
  double k_constant_length = 0.0, t_constant_length = 0.0;
  double k_killing = 0.0, t_killing = 0.0;
  double k_pregeodesic = 0.0, t_pregeodesic = 0.0;
  double semrm = 0.0;  // max |g(nabla_k t + nabla_t k, h)| over the frame
};

inline GeometricSufficients check_geometric_sufficients(const SplitLocal& L) {
  GeometricSufficients s;
  auto const_len = [&](const JetVec& X) {
    const JetVec d = differential(inner(L.g, X, X), L.g.n);
    return max_abs(d);
  };
  s.k_constant_length = const_len(L.k);
  s.t_constant_length = const_len(L.t);
  s.k_killing = lie_derivative_metric(L.g, L.k).max_abs();
  s.t_killing = lie_derivative_metric(L.g, L.t).max_abs();
  s.k_pregeodesic = pregeodesic_factor(L.Gamma, L.k).residual;
  s.t_pregeodesic = pregeodesic_factor(L.Gamma, L.t).residual;
  const JetVec sum = covariant_derivative(L.Gamma, L.k, L.t) + covariant_derivative(L.Gamma, L.t, L.k);
  const auto hc = h_components(L, sum);
  s.semrm = std::max(std::fabs(hc[0]), std::fabs(hc[1]));
  return s;
}

// g(Ja,b) = g(a,Jb) for a, b in V; for J k = t, J t = -k this reduces to
// g(k,k) + g(t,t) = 0.
inline double split_adjoint_residual(const SplitLocal& L) {
  double m = 0.0;
  const JetVec V[2] = {L.k, L.t};
  for (const auto& a : V)
    for (const auto& b : V)
      m = std::max(m, std::fabs(inner(L.g, apply(L.J, a), b).value() - inner(L.g, a, apply(L.J, b)).value()));
  return m;
}

// Condition i) for null k+, k-:
// g([k-,Jx],k+) - g([k+,Jx],k-) - g([k+,x],k+) - g([k-,x],k-) for x in the frame.
inline double kerr_nut_residual(const SplitLocal& L) {
  const int o = std::max(std::min(L.k.order(), L.frame.x.order()) - 1, 0);
  const JetMat g = truncated(L.g, o);
  const JetVec kp = truncated(L.k, o), km = truncated(L.t, o);
  double m = 0.0;
  for (const JetVec* h : {&L.frame.x, &L.frame.y}) {
    const JetVec Jh = apply(L.J, *h);
    const double v = inner(g, lie_bracket(L.t, Jh), kp).value() - inner(g, lie_bracket(L.k, Jh), km).value() -
                     inner(g, lie_bracket(L.k, *h), kp).value() - inner(g, lie_bracket(L.t, *h), km).value();
    m = std::max(m, std::fabs(v));
  }
  return m;
}

struct RescaleVerdict {
  double nijenhuis = 0.0;
  double ratio_h_gradient = 0.0;
  bool integrable = false;
  bool ratio_vertical = false;
};

// J for the rescaled pair (f1 k+, f2 k-).
inline RescaleVerdict rescaled_J(const JetMat& g, const JetVec& kp, const JetVec& km, const Jet& f1, const Jet& f2,
                                 int orientation, double tol = 1e-7) {
  const SplitLocal L = make_split_local(g, f1 * kp, f2 * km, orientation);
  RescaleVerdict v;
  v.nijenhuis = nijenhuis_max(L.J);
  v.ratio_h_gradient = h_gradient_residual(L, f1 / f2);
  v.integrable = v.nijenhuis < tol;
  v.ratio_vertical = v.ratio_h_gradient < tol;
  return v;
}

// (nabla_i J)^k_j = d_i J^k_j + G^k_il J^l_j - G^l_ij J^k_l
inline double covariant_J_max(const Christoffel& Gam, const JetMat& J) {
  const int n = J.n;
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double v = J(k, j).d(i);
        for (int l = 0; l < n; ++l)
          v += Gam(k, i, l).value() * J(l, j).value() - Gam(l, i, j).value() * J(k, l).value();
        m = std::max(m, std::fabs(v));
      }
  return m;
}

}  // namespace geokahler
