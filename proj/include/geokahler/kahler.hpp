#pragma once

// Kahler metrics g_K = omega(., J.) built from omega = d(phi k^flat), with
// phi = f(tau) (standard construction) or phi = f(u) p, p = 1/sqrt(-g(k+,k-))
// (Petrov construction).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "geokahler/chart.hpp"
#include "geokahler/expr.hpp"
#include "geokahler/jstruct.hpp"
#include "geokahler/optics.hpp"
#include "geokahler/tensor.hpp"

namespace geokahler {

// Positive function of one variable: affine (s - c), exp(s), or an expression in `tau`.
struct ParamFn {
  enum class Kind { Affine, Exp, Custom };
  Kind kind = Kind::Exp;
  double c = 0.0;
  Expr expr;
  std::string source = "exp";

  static ParamFn affine(double c) {
    ParamFn f;
    f.kind = Kind::Affine;
    f.c = c;
    char buf[64];
    std::snprintf(buf, sizeof buf, "affine:%.17g", c);
    f.source = buf;
    return f;
  }
  static ParamFn exponential() { return ParamFn{}; }
  static ParamFn custom(const std::string& text, const std::map<std::string, double>& params = {}) {
    ParamFn f;
    f.kind = Kind::Custom;
    f.expr = Expr::parse(text, Symbols{{"tau"}, params});
    f.source = "expr:" + text;
    return f;
  }
  // "affine:c" | "exp" | "expr:<expression in tau>"
  static ParamFn parse(const std::string& spec, const std::map<std::string, double>& params = {}) {
    if (spec == "exp") return exponential();
    if (spec.rfind("affine:", 0) == 0) {
      const std::string rest = spec.substr(7);
      try {
        std::size_t used = 0;
        const double c = std::stod(rest, &used);
        if (used == rest.size()) return affine(c);
      } catch (const std::exception&) {
      }
      const Expr e = Expr::parse(rest, Symbols{{}, params});
      ParamFn f = affine(e.eval(std::vector<double>{}));
      return f;
    }
    if (spec.rfind("expr:", 0) == 0) return custom(spec.substr(5), params);
    throw std::invalid_argument("unknown function spec '" + spec + "' (expected affine:c, exp or expr:...)");
  }

  // f, f', f'', f''' at s.
  std::array<double, 4> derivs(double s) const {
    switch (kind) {
      case Kind::Affine: return {s - c, 1.0, 0.0, 0.0};
      case Kind::Exp: {
        const double e = std::exp(s);
        return {e, e, e, e};
      }
      case Kind::Custom: {
        const Jet j = expr.eval(std::vector<Jet>{Jet::variable(s, 0, 1, 3)});
        return {j.value(), j.d(0), j.d(0, 0), j.d(0, 0, 0)};
      }
    }
    return {0, 0, 0, 0};
  }
  double operator()(double s) const { return derivs(s)[0]; }
  Jet operator()(const Jet& s) const {
    const auto d = derivs(s.value());
    return s.compose(d[0], d[1], d[2], d[3]);
  }
  // f' composed with s; accurate to order 2, which is all the curvature
  // formulas consume.
  Jet derivative(const Jet& s) const {
    const auto d = derivs(s.value());
    return s.truncated(std::min(s.order(), 2)).compose(d[1], d[2], d[3], 0.0);
  }
};

enum class Construction { Standard, Petrov };

// Expression-level candidate.  For the Petrov construction k and t hold k+ and k-.
struct Candidate {
  Chart chart;
  MetricField g;
  VectorField k, t;
  std::optional<ScalarField> tau;
  std::optional<ScalarField> ell;
  std::optional<ScalarField> u;
  ParamFn f;
  Construction kind = Construction::Standard;
};

struct Primitives {
  JetMat g;
  JetVec k, t;
  std::optional<Jet> tau;
  std::optional<Jet> u;
};

inline Primitives eval_primitives(const Candidate& c, const Point& p, int order) {
  const auto s = seeds(p, order);
  Primitives pr;
  pr.g = eval_jet(c.g, s);
  pr.k = eval_jet(c.k, s);
  pr.t = eval_jet(c.t, s);
  if (c.tau) pr.tau = eval_jet(*c.tau, s);
  if (c.u) pr.u = eval_jet(*c.u, s);
  return pr;
}

struct KahlerLocal {
  SplitLocal S;
  Construction kind = Construction::Standard;
  Jet tau, ell;
  Jet phi;
  JetVec kflat;
  JetMat dkflat;
  JetMat omega;
  JetMat gK;
  OpticsJets opt;
  double f = 0.0, fprime = 0.0;
  double lhs1 = 0.0, lhs2 = 0.0;
  bool in_region = false;
};

inline KahlerLocal kahler_local(const Primitives& pr, const ParamFn& f, Construction kind, int orientation) {
  KahlerLocal K;
  K.kind = kind;
  K.S = make_split_local(pr.g, pr.k, pr.t, orientation);
  const int n = pr.g.n;
  K.kflat = flat(pr.g, pr.k);
  K.dkflat = exterior_derivative(K.kflat);
  K.opt = optics_jets(pr.g, K.S.Gamma, pr.k, K.S.frame);
  if (kind == Construction::Standard) {
    if (!pr.tau) throw std::invalid_argument("standard construction needs tau");
    K.tau = *pr.tau;
    K.phi = f(K.tau);
    const JetVec dtau = differential(K.tau, n);
    const int o = dtau.order();
    const JetVec tt = truncated(pr.t, o);
    // t = ell grad tau; componentwise least squares also covers null t.
    const JetVec grad = apply(truncated(K.S.ginv, o), dtau);
    Jet num = tt[0] * grad[0], den = grad[0] * grad[0];
    for (int i = 1; i < n; ++i) {
      num += tt[i] * grad[i];
      den += grad[i] * grad[i];
    }
    K.ell = num / den;
    const auto d = f.derivs(K.tau.value());
    K.f = d[0];
    K.fprime = d[1];
    K.lhs1 = K.f * K.opt.iota.value();
    double dk_kt = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dk_kt += K.dkflat(i, j).value() * pr.k[i].value() * pr.t[j].value();
    K.lhs2 = K.fprime * K.S.frame.G.value() / K.ell.value() - K.f * dk_kt;
  } else {
    if (!pr.u) throw std::invalid_argument("Petrov construction needs u");
    const Jet gpm = inner(pr.g, pr.k, pr.t);
    if (!(gpm.value() < 0.0)) throw std::domain_error("g(k+, k-) must be negative");
    const Jet p = reciprocal(sqrt(-gpm));
    K.phi = f(*pr.u) * p;
    K.f = f(pr.u->value());
    K.lhs1 = K.opt.iota.value();
    K.lhs2 = derivative_along(pr.k, K.phi).value();
  }
  K.in_region = K.lhs1 < 0.0 && K.lhs2 < 0.0;
  const JetVec alpha = K.phi * K.kflat;
  K.omega = exterior_derivative(alpha);
  const int o = K.omega.order();
  K.gK = K.omega * truncated(K.S.J, o);
  return K;
}

inline double symmetric_min_eig(const JetMat& a) {
  Eigen::MatrixXd m(a.n, a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) m(i, j) = 0.5 * (a(i, j).value() + a(j, i).value());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct KahlerVerification {
  double closed = 0.0;       // |d omega| / (1 + |omega|)
  double j_compat = 0.0;     // |g_K(J.,J.) - g_K| / (1 + |g_K|)
  double symmetric = 0.0;    // |g_K - g_K^T| / (1 + |g_K|)
  double min_eig = 0.0;
  double nijenhuis = 0.0;    // |N| / (1 + |J|)
  double nabla_J = 0.0;      // |nabla^K J| / (1 + |J|)
  bool is_kahler = false;
};

inline KahlerVerification verify_kahler(const KahlerLocal& K, double tol = 1e-7) {
  KahlerVerification v;
  const double om = K.omega.max_abs(), gk = K.gK.max_abs(), jm = K.S.J.max_abs();
  v.closed = exterior_derivative(K.omega).max_abs() / (1.0 + om);
  const JetMat J0 = truncated(K.S.J, 0);
  const JetMat gk0 = truncated(K.gK, 0);
  const JetMat pulled = transpose(J0) * gk0 * J0;
  double jc = 0.0, sy = 0.0;
  for (int i = 0; i < K.gK.n; ++i)
    for (int j = 0; j < K.gK.n; ++j) {
      jc = std::max(jc, std::fabs(pulled(i, j).value() - gk0(i, j).value()));
      sy = std::max(sy, std::fabs(gk0(i, j).value() - gk0(j, i).value()));
    }
  v.j_compat = jc / (1.0 + gk);
  v.symmetric = sy / (1.0 + gk);
  v.min_eig = symmetric_min_eig(K.gK);
  v.nijenhuis = nijenhuis_max(K.S.J) / (1.0 + jm);
  v.nabla_J = covariant_J_max(christoffel(K.gK), K.S.J) / (1.0 + jm);
  v.is_kahler = v.closed < tol && v.j_compat < tol && v.symmetric < tol && v.min_eig > 0.0 && v.nijenhuis < tol &&
                v.nabla_J < tol;
  return v;
}

// ---- transfer properties (all need primitives of order >= 2) ----

struct TransferGeodesic {
  double k_geodesic = 0.0;   // |nabla^K_k k|
  double t_geodesic = 0.0;   // |nabla^K_t t|
  double k_constant = 0.0;   // |d g_K(k,k)|
};

inline TransferGeodesic transfer_geodesic(const KahlerLocal& K) {
  const Christoffel GK = christoffel(K.gK);
  const int o = K.gK.order();
  const JetVec k = truncated(K.S.k, o), t = truncated(K.S.t, o);
  TransferGeodesic r;
  r.k_geodesic = max_abs(covariant_derivative(GK, k, k));
  r.t_geodesic = max_abs(covariant_derivative(GK, t, t));
  r.k_constant = max_abs(differential(inner(K.gK, k, k), K.gK.n));
  return r;
}

inline double transfer_killing(const KahlerLocal& K) {
  return lie_derivative_metric(K.gK, truncated(K.S.k, K.gK.order())).max_abs();
}

inline PregeodesicResult gk_pregeodesic(const KahlerLocal& K, const JetVec& X, double tol = 1e-7) {
  return pregeodesic_factor(christoffel(K.gK), truncated(X, K.gK.order()), tol);
}

// Shear of k and t with respect to g_K in the frame (x/s, y/s), s = sqrt(-f iota),
// next to the values for g.  Entries: {sigma1_k, sigma2_k, sigma1_t, sigma2_t}.
struct ShearTransfer {
  std::array<double, 4> g{}, gK{};
  double max_diff = 0.0;
};

inline ShearTransfer shear_transfer(const KahlerLocal& K) {
  ShearTransfer r;
  const OpticsJets tk = optics_jets(K.S.g, K.S.Gamma, K.S.t, K.S.frame);
  r.g = {K.opt.sigma1.value(), K.opt.sigma2.value(), tk.sigma1.value(), tk.sigma2.value()};
  const int o = K.gK.order();
  Jet s2 = K.kind == Construction::Standard ? -(K.phi.truncated(o) * K.opt.iota.truncated(o))
                                           : inner(K.gK, truncated(K.S.frame.x, o), truncated(K.S.frame.x, o));
  const Jet inv = reciprocal(sqrt(s2));
  Frame fk = K.S.frame;
  fk.x = inv * truncated(K.S.frame.x, o);
  fk.y = inv * truncated(K.S.frame.y, o);
  const Christoffel GK = christoffel(K.gK);
  const OpticsJets ok = optics_jets(K.gK, GK, truncated(K.S.k, o), fk);
  const OpticsJets ot = optics_jets(K.gK, GK, truncated(K.S.t, o), fk);
  r.gK = {ok.sigma1.value(), ok.sigma2.value(), ot.sigma1.value(), ot.sigma2.value()};
  for (int i = 0; i < 4; ++i) r.max_diff = std::max(r.max_diff, std::fabs(r.g[i] - r.gK[i]));
  return r;
}

// (g_K, k, t, tau) as a new set of primitives, one order lower.
inline Primitives iterate_primitives(const KahlerLocal& K, const Primitives& pr) {
  const int o = K.gK.order();
  Primitives q;
  q.g = K.gK;
  q.k = truncated(pr.k, o);
  q.t = truncated(pr.t, o);
  if (pr.tau) q.tau = pr.tau->truncated(o);
  if (pr.u) q.u = pr.u->truncated(o);
  return q;
}

// ---- variations ----

// g~ = g on V, beta^2 g on H, V and H kept orthogonal.
inline JetMat biconformal_metric(const JetMat& g, const JetVec& k, const JetVec& t, const Jet& beta, int orientation) {
  const Frame fr = build_frame(g, {k, t}, orientation);
  const int n = g.n;
  std::array<JetVec, kMaxDim> PH, PV;
  for (int i = 0; i < n; ++i) {
    PH[i] = project_H(g, {k, t}, fr.Ainv, coordinate_field(i, n));
    PV[i] = coordinate_field(i, n) - PH[i];
  }
  const Jet b2 = beta * beta;
  JetMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = inner(g, PV[i], PV[j]) + b2 * inner(g, PH[i], PH[j]);
  return r;
}

inline JetMat vertical_metric(const JetMat& g, const Jet& tau, double eps) {
  const JetVec d = differential(tau, g.n);
  const int o = d.order();
  JetMat r = truncated(g, o);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) r(i, j) += eps * d[i] * d[j];
  return r;
}

inline double max_abs_diff(const JetMat& a, const JetMat& b) {
  double m = 0.0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) m = std::max(m, std::fabs(a(i, j).value() - b(i, j).value()));
  return m;
}

// ---- point-level entry points ----

inline JetMat symplectic_form(const Candidate& c, const Point& p, int orientation) {
  return kahler_local(eval_primitives(c, p, 2), c.f, c.kind, orientation).omega;
}
inline JetMat kahler_metric(const Candidate& c, const Point& p, int orientation, int order = 3) {
  return kahler_local(eval_primitives(c, p, order), c.f, c.kind, orientation).gK;
}

struct RegionVerdict {
  double lhs1 = 0.0, lhs2 = 0.0;
  bool in_region = false;
};
inline RegionVerdict region_predicate(const Candidate& c, const Point& p, int orientation) {
  const KahlerLocal K = kahler_local(eval_primitives(c, p, 1), c.f, c.kind, orientation);
  return {K.lhs1, K.lhs2, K.in_region};
}

}  // namespace geokahler
