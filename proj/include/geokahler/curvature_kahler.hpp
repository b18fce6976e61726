#pragma once

// Ricci form and scalar curvature of g_K from data of (g, k, t, f) on a line
// bundle over a Kahler surface with g|H = pi^*h, compared with the generic
// Levi-Civita curvature of g_K.  Primes denote d/dtau.

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "geokahler/kahler.hpp"

namespace geokahler {

enum class CurvatureCase { Geodesic, Killing };

// (J alpha)(v) = -alpha(J v)
inline JetVec J_on_form(const JetMat& J, const JetVec& alpha) {
  const int o = alpha.order();
  JetVec r(alpha.n);
  for (int j = 0; j < alpha.n; ++j) {
    Jet s(0.0, alpha.n, o);
    for (int i = 0; i < alpha.n; ++i) s -= alpha[i] * J(i, j).truncated(o);
    r[j] = s;
  }
  return r;
}

// d J d F as a 2-form.
inline JetMat dJd(const JetMat& J, const Jet& F) { return exterior_derivative(J_on_form(J, differential(F, J.n))); }

// (a ^ b)_{0123} for 2-forms a, b on a 4-manifold.
inline double wedge_top(const JetMat& a, const JetMat& b) {
  return a(0, 1).value() * b(2, 3).value() - a(0, 2).value() * b(1, 3).value() + a(0, 3).value() * b(1, 2).value() +
         a(1, 2).value() * b(0, 3).value() - a(1, 3).value() * b(0, 2).value() + a(2, 3).value() * b(0, 1).value();
}

// F' for a function F of tau, from dF = F' dtau by componentwise least
// squares.  (dF(t)/dtau(t) would break down for null t = ell grad tau.)
inline Jet tau_prime(const Jet& F, const Jet& tau) {
  const int n = tau.dim();
  const int o = std::max(std::min(F.order(), tau.order()) - 1, 0);
  const JetVec dF = truncated(differential(F, n), o), dtau = truncated(differential(tau, n), o);
  Jet num = dF[0] * dtau[0], den = dtau[0] * dtau[0];
  for (int i = 1; i < n; ++i) {
    num += dF[i] * dtau[i];
    den += dtau[i] * dtau[i];
  }
  return num / den;
}

struct CurvatureHypotheses {
  double commute = 0.0;            // |[k,t]|
  double shear = 0.0;              // max shear coefficient of k and t
  double ell_of_tau = 0.0;         // |d ell - ell' d tau|
  double k_geodesic = 0.0;         // |nabla_k k|
  double k_constant_length = 0.0;  // |d g(k,k)|
  double k_length = 0.0;           // |g(k,k)|
  double kflat_mixed = 0.0;        // |dk^flat(v, h)|, v in V, h in H
  double k_killing = 0.0;
  double gkt = 0.0;                // |g(k,t)|
  double q = 0.0;                  // g(t,t)
  double p_of_tau = 0.0, iota_of_tau = 0.0;
  bool admissible = false;

  bool geodesic_case(double tol) const {
    return admissible && commute < tol && shear < tol && ell_of_tau < tol && k_geodesic < tol &&
           k_constant_length < tol && k_length > tol && kflat_mixed < tol;
  }
  bool killing_case(double tol) const {
    return admissible && commute < tol && shear < tol && ell_of_tau < tol && k_killing < tol && gkt < tol &&
           std::fabs(q) > tol && p_of_tau < tol && iota_of_tau < tol && kflat_mixed < tol;
  }
  // Name of the first failing hypothesis, or empty.
  std::string first_failure(CurvatureCase c, double tol) const {
    if (!admissible) return "admissible";
    if (commute >= tol) return "[k,t]=0";
    if (shear >= tol) return "shear-free";
    if (ell_of_tau >= tol) return "ell function of tau";
    if (kflat_mixed >= tol) return "dk^flat(V,H)=0";
    if (c == CurvatureCase::Geodesic) {
      if (k_geodesic >= tol) return "k geodesic";
      if (k_constant_length >= tol) return "k constant length";
      if (k_length <= tol) return "k nonzero length";
    } else {
      if (k_killing >= tol) return "k Killing";
      if (gkt >= tol) return "g(k,t)=0";
      if (std::fabs(q) <= tol) return "g(t,t) nonzero";
      if (p_of_tau >= tol) return "g(k,k) function of tau";
      if (iota_of_tau >= tol) return "iota function of tau";
    }
    return {};
  }
};

// |dF - F' dtau| / (1 + |dF|)
inline double function_of_tau_residual(const Jet& F, const JetVec& t, const Jet& tau) {
  const JetVec dF = differential(F, t.n);
  const Jet Fp = tau_prime(F, tau);
  const JetVec dtau = differential(tau, t.n);
  double m = 0.0, nrm = 0.0;
  for (int i = 0; i < t.n; ++i) {
    m = std::max(m, std::fabs(dF[i].value() - Fp.value() * dtau[i].value()));
    nrm = std::max(nrm, std::fabs(dF[i].value()));
  }
  return m / (1.0 + nrm);
}

inline CurvatureHypotheses curvature_hypotheses(const KahlerLocal& K, const Jet* tau, double tol = 1e-7) {
  const SplitLocal& S = K.S;
  CurvatureHypotheses h;
  h.admissible = check_admissible(S, tau, tol).admissible;
  h.commute = max_abs(lie_bracket(S.k, S.t));
  const OpticsJets ot = optics_jets(S.g, S.Gamma, S.t, S.frame);
  h.shear = std::max({std::fabs(K.opt.sigma1.value()), std::fabs(K.opt.sigma2.value()), std::fabs(ot.sigma1.value()),
                      std::fabs(ot.sigma2.value())});
  h.ell_of_tau = function_of_tau_residual(K.ell, S.t, K.tau);
  h.k_geodesic = max_abs(covariant_derivative(S.Gamma, S.k, S.k));
  const Jet p = inner(S.g, S.k, S.k);
  h.k_constant_length = max_abs(differential(p, S.g.n));
  h.k_length = std::fabs(p.value());
  for (const JetVec* v : {&S.k, &S.t})
    for (const JetVec* w : {&S.frame.x, &S.frame.y}) {
      double s = 0.0;
      for (int i = 0; i < S.g.n; ++i)
        for (int j = 0; j < S.g.n; ++j) s += K.dkflat(i, j).value() * (*v)[i].value() * (*w)[j].value();
      h.kflat_mixed = std::max(h.kflat_mixed, std::fabs(s));
    }
  h.k_killing = lie_derivative_metric(S.g, S.k).max_abs();
  h.gkt = std::fabs(inner(S.g, S.k, S.t).value());
  h.q = inner(S.g, S.t, S.t).value();
  h.p_of_tau = function_of_tau_residual(p, S.t, K.tau);
  h.iota_of_tau = function_of_tau_residual(K.opt.iota, S.t, K.tau);
  return h;
}

struct CurvatureResult {
  std::array<std::array<double, 4>, 4> ricci_form{};         // formula
  std::array<std::array<double, 4>, 4> ricci_form_oracle{};  // Ric(J., .)
  double ricci_discrepancy = 0.0;
  double scalar_formula = 0.0;
  double scalar_oracle = 0.0;        // *(omega ^ rho_oracle)
  double scalar_trace = 0.0;         // g_K-trace of Ric
  double discrepancy = 0.0;          // |formula - oracle| / (1 + |oracle|)
  double volume_check = 0.0;         // | |Vol_0123| - sqrt(det g_K) | / sqrt(det g_K)
  double max_riemann = 0.0;
};

// Needs primitives of order 3.  r_base is the coefficient of the base Kahler
// form in holomorphic coordinates.
inline CurvatureResult kahler_curvature(const KahlerLocal& K, const ParamFn& f, const Jet& r_base, CurvatureCase cc) {
  const SplitLocal& S = K.S;
  const int n = S.g.n;
  CurvatureResult R;

  // Oracle.
  const Curvature C = curvature(K.gK);
  R.scalar_trace = C.scalar;
  R.max_riemann = C.max_riemann_lowered;
  JetMat rho_o(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += S.J(c, a).value() * C.ricci[c][b];
      rho_o(a, b) = Jet(s, n, 0);
      R.ricci_form_oracle[a][b] = s;
    }
  const double vol = 0.5 * wedge_top(K.omega, K.omega);
  R.scalar_oracle = wedge_top(K.omega, rho_o) / vol;
  const double detg = determinant(truncated(K.gK, 0)).value();
  R.volume_check = std::fabs(std::fabs(vol) - std::sqrt(std::fabs(detg))) / std::sqrt(std::fabs(detg));

  // Formula ingredients.
  const Jet& tau = K.tau;
  const Jet fj = f(tau).truncated(2);
  const Jet fp = f.derivative(tau);
  const Jet ell = K.ell;  // order 2
  const Jet iota = K.opt.iota;  // order 2
  const Jet r = r_base.truncated(2);
  Jet mu_over_nu;
  if (cc == CurvatureCase::Geodesic) {
    mu_over_nu = -(fj * fp * r * iota) / ell;
  } else {
    const Jet p = inner(S.g, S.k, S.k).truncated(2);
    const Jet pp = tau_prime(inner(S.g, S.k, S.k), tau);
    mu_over_nu = -(fj * (fp + fj * pp / p) * r * iota * p) / ell;
  }
  const JetMat rho = -0.5 * dJd(S.J, log(mu_over_nu));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      R.ricci_form[a][b] = rho(a, b).value();
      R.ricci_discrepancy = std::max(R.ricci_discrepancy, std::fabs(R.ricci_form[a][b] - R.ricci_form_oracle[a][b]));
    }

  // a from J dtau = a k^flat + b dtau, solved on (k, t).
  const JetVec dtau = differential(tau, n);
  const JetVec Jdtau = J_on_form(S.J, dtau);
  const int o2 = Jdtau.order();
  const JetVec k2 = truncated(S.k, o2), t2 = truncated(S.t, o2);
  const JetVec kf2 = truncated(K.kflat, o2);
  const Jet m11 = pair(kf2, k2), m12 = pair(dtau, k2), m21 = pair(kf2, t2), m22 = pair(dtau, t2);
  const Jet r1 = pair(Jdtau, k2), r2 = pair(Jdtau, t2);
  const Jet acoef = (r1 * m22 - m12 * r2) / (m11 * m22 - m12 * m21);

  if (cc == CurvatureCase::Geodesic) {
    const Jet L = log(fp * fj / ell);
    const Jet Lp = tau_prime(L, tau);
    const Jet inner_term = Lp * acoef.truncated(1) * fj.truncated(1);
    // omega ^ (first two terms of rho) = 1/2 ((L a f)') r iota dtau^k^dx^dy and
    // Vol = -f f' r iota dtau^k^dx^dy, so the Hodge star carries a minus sign.
    const double first = -0.5 * tau_prime(inner_term, tau).value() / (fj.value() * fp.value());
    const JetMat w = dJd(S.J, log(-(r * iota)));
    const double second = 0.5 * wedge_top(K.omega, w) / vol;
    R.scalar_formula = first - second;
  } else {
    const Jet p = inner(S.g, S.k, S.k).truncated(2);
    const Jet pp = tau_prime(inner(S.g, S.k, S.k), tau);
    const Jet fsum = fp + fj * pp / p;
    const Jet P = -0.5 * log(-(fj * fsum * p * iota) / ell);
    const Jet Pp = tau_prime(P, tau);
    const Jet q = inner(S.g, S.t, S.t).truncated(1);
    const Jet a = -q / (p.truncated(1) * ell.truncated(1));
    const Jet faP = fj.truncated(1) * a * Pp;
    const double num = tau_prime(faP, tau).value() + 2.0 * faP.value() * pp.value() / p.value();
    const double den = fj.value() * fsum.value();
    const JetMat w = dJd(S.J, log(r_base.truncated(2)));
    R.scalar_formula = num / den - 0.5 * wedge_top(K.omega, w) / vol;
  }
  R.discrepancy = std::fabs(R.scalar_formula - R.scalar_oracle) / (1.0 + std::fabs(R.scalar_oracle));
  return R;
}

// Coefficient a of J dtau = a k^flat + b dtau at the point (value only).
inline double jdtau_coefficient(const KahlerLocal& K) {
  const JetVec dtau = differential(K.tau, K.S.g.n);
  const JetVec Jdtau = J_on_form(K.S.J, dtau);
  const double m11 = pair(K.kflat, K.S.k).value(), m12 = pair(dtau, K.S.k).value();
  const double m21 = pair(K.kflat, K.S.t).value(), m22 = pair(dtau, K.S.t).value();
  const double r1 = pair(Jdtau, K.S.k).value(), r2 = pair(Jdtau, K.S.t).value();
  return (r1 * m22 - m12 * r2) / (m11 * m22 - m12 * m21);
}

}  // namespace geokahler
