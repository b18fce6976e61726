#pragma once

// Ready-to-run spacetime entries with expected closed-form values, and the
// sectioned text format used for custom specs.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geokahler/chart.hpp"
#include "geokahler/curvature_kahler.hpp"
#include "geokahler/expr.hpp"
#include "geokahler/kahler.hpp"
#include "geokahler/optics.hpp"
#include "geokahler/tensor.hpp"

namespace geokahler {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Expected {
  std::string quantity;
  Expr value;
  double tol = 1e-9;
  std::string source;  // where the closed form comes from
};

// [a, b] = sum coeff_i * field_i, fields addressed by name ("k", "t" or extras).
struct Relation {
  std::string name;
  std::string a, b;
  std::vector<std::pair<Expr, std::string>> rhs;
};

// Entry-specific check evaluated per sample.  With expect_nonzero the check
// passes when the residual stays above tol at every sample.
struct Validation {
  std::string name;
  double tol = 1e-9;
  std::function<double(const Point&)> residual;
  bool expect_nonzero = false;
};

struct SpacetimeSpec {
  std::string id;
  std::string description;
  Chart chart;
  std::map<std::string, double> params;
  MetricField g;
  VectorField k, t;
  std::optional<ScalarField> tau;
  std::optional<ScalarField> potential;  // u of the Petrov construction
  ParamFn f;
  Construction kind = Construction::Standard;
  Box box;
  std::map<std::string, VectorField> fields;  // extra named vector fields
  std::vector<Relation> relations;
  std::vector<Expected> expected;
  std::vector<Validation> validations;
  std::optional<MetricField> reference;  // g_K is expected to equal this
  std::optional<ScalarField> r_base;     // base Kahler form coefficient
  std::optional<ScalarField> beta;       // biconformal variation factor
  std::vector<std::string> expected_negative;  // check names that are expected to fail

  Symbols symbols() const { return Symbols{chart.coords, params}; }
  Expr parse(const std::string& src) const { return Expr::parse(src, symbols()); }

  Candidate candidate() const {
    Candidate c;
    c.chart = chart;
    c.g = g;
    c.k = k;
    c.t = t;
    c.tau = tau;
    c.u = potential;
    c.f = f;
    c.kind = kind;
    return c;
  }
  const VectorField& field(const std::string& name) const {
    if (name == "k") return k;
    if (name == "t") return t;
    auto it = fields.find(name);
    if (it == fields.end()) throw ConfigError("unknown field '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::map<std::string, double> resolve_params(const std::string& id, std::map<std::string, double> defaults,
                                                    const std::map<std::string, double>& overrides) {
  for (const auto& [key, val] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) throw ConfigError("entry '" + id + "' has no parameter '" + key + "'");
    it->second = val;
  }
  return defaults;
}

struct Builder {
  SpacetimeSpec s;

  Builder(std::string id, std::string description, std::vector<std::string> coords,
          std::map<std::string, double> params) {
    s.id = std::move(id);
    s.description = std::move(description);
    s.chart.name = s.id;
    s.chart.coords = std::move(coords);
    s.params = std::move(params);
    const int n = s.chart.dim();
    s.g.g.assign(n, std::vector<Expr>(n, Expr::constant(0.0)));
  }
  Expr E(const std::string& src) const { return s.parse(src); }
  int idx(const std::string& c) const {
    const int i = s.chart.index_of(c);
    if (i < 0) throw std::logic_error("unknown coordinate " + c);
    return i;
  }
  void metric(const std::string& a, const std::string& b, const std::string& src) {
    const Expr e = E(src);
    s.g.g[idx(a)][idx(b)] = e;
    s.g.g[idx(b)][idx(a)] = e;
  }
  VectorField vec(const std::vector<std::string>& comps) const {
    VectorField v;
    for (const auto& c : comps) v.c.push_back(E(c));
    return v;
  }
  void domain(const std::string& src) { s.chart.domain.push_back(E(src)); }
  void expect(const std::string& q, const std::string& value, double tol, const std::string& source) {
    s.expected.push_back({q, E(value), tol, source});
  }
  void box(const std::vector<Interval>& b) { s.box = b; }
};

// Residual of a bracket relation at a point.
inline double relation_residual(const SpacetimeSpec& s, const Relation& r, const Point& p) {
  const auto x = seeds(p, 1);
  const JetVec a = eval_jet(s.field(r.a), x), b = eval_jet(s.field(r.b), x);
  JetVec lhs = lie_bracket(a, b);
  const std::vector<double> pv = p;
  for (const auto& [coef, name] : r.rhs) {
    const double c = coef.eval(pv);
    const JetVec f = eval_jet(s.field(name), x);
    for (int i = 0; i < lhs.n; ++i) lhs[i] -= c * f[i].value();
  }
  return max_abs(lhs);
}

inline Relation rel(const SpacetimeSpec& s, const std::string& name, const std::string& a, const std::string& b,
                    const std::vector<std::pair<std::string, std::string>>& rhs) {
  Relation r{name, a, b, {}};
  for (const auto& [coef, f] : rhs) r.rhs.push_back({s.parse(coef), f});
  return r;
}

inline MetricField round_s3_metric(const std::string& R2over4) {
  Symbols sym{{"theta", "psi", "phi"}, {}};
  MetricField g;
  g.g.assign(3, std::vector<Expr>(3, Expr::constant(0.0)));
  const std::string c = "(" + R2over4 + ")";
  g.g[0][0] = Expr::parse(c, sym);
  g.g[1][1] = Expr::parse(c, sym);
  g.g[2][2] = Expr::parse(c, sym);
  g.g[1][2] = g.g[2][1] = Expr::parse(c + "*cos(theta)", sym);
  return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entries

// Euler chart (theta, psi, phi) on the round S^3 of radius R:
// gbar = R^2/4 (dtheta^2 + dpsi^2 + dphi^2 + 2 cos(theta) dpsi dphi), Hopf field kbar = (2/R) d_psi.
inline SpacetimeSpec direct_product_hopf(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("direct_product_hopf", {{"R", 1.0}}, overrides);
  if (!(params["R"] > 0)) throw ConfigError("direct_product_hopf requires R > 0");
  detail::Builder b("direct_product_hopf", "R x S^3 with k = d_t + Hopf field, f = e^t",
                    {"t", "theta", "psi", "phi"}, params);
  b.metric("t", "t", "-1");
  b.metric("theta", "theta", "R^2/4");
  b.metric("psi", "psi", "R^2/4");
  b.metric("phi", "phi", "R^2/4");
  b.metric("psi", "phi", "R^2/4*cos(theta)");
  b.s.k = b.vec({"1", "0", "2/R", "0"});
  b.s.t = b.vec({"-1", "0", "0", "0"});
  b.s.tau = ScalarField{b.E("t")};
  b.s.f = ParamFn::exponential();
  b.s.chart.orientation = 1;
  b.domain("sin(theta)");
  b.box({{-1.0, 1.0}, {0.2, std::numbers::pi - 0.2}, {0.0, 2 * std::numbers::pi}, {0.0, 2 * std::numbers::pi}});
  b.s.fields["kbar"] = b.vec({"0", "0", "2/R", "0"});
  b.expect("iota_sq", "2", 1e-8, "Hopf field twist, literal value");
  b.expect("g_kk", "0", 1e-10, "k null");
  b.expect("k_geodesic", "0", 1e-9, "k geodesic");
  b.expect("riemann_K_max", "0", 1e-5, "g_K flat for f = e^t");

  const double R = params["R"];
  auto sub = [R](const Point& p) { return Point{p[1], p[2], p[3]}; };
  const MetricField gbar = detail::round_s3_metric(detail::num(R * R / 4));
  VectorField kbar;
  kbar.c = {Expr::constant(0.0), Expr::constant(2.0 / R), Expr::constant(0.0)};
  b.s.validations.push_back({"hopf_unit_length", 1e-9, [=](const Point& p) {
                               return riemannian3_optics(gbar, kbar, 1, sub(p)).unit_residual;
                             }});
  b.s.validations.push_back({"hopf_killing", 1e-9, [=](const Point& p) {
                               return riemannian3_optics(gbar, kbar, 1, sub(p)).killing_residual;
                             }});
  b.s.validations.push_back({"hopf_geodesic", 1e-9, [=](const Point& p) {
                               return riemannian3_optics(gbar, kbar, 1, sub(p)).geodesic_residual;
                             }});
  b.s.validations.push_back({"hopf_shear", 1e-9, [=](const Point& p) {
                               const auto o = riemannian3_optics(gbar, kbar, 1, sub(p));
                               return std::sqrt(o.scalars.shear_invariant);
                             }});
  b.s.validations.push_back({"iota_bar^2 = 2 Ric(kbar,kbar)", 1e-8, [=](const Point& p) {
                               const auto o = riemannian3_optics(gbar, kbar, 1, sub(p));
                               return std::fabs(o.scalars.iota * o.scalars.iota - 2.0 * o.ric_kk);
                             }});
  return b.s;
}

// w = r^2 cosh^2(t/r) as printed, or r cosh(t/r) with w_variant = 1 (textbook).
inline SpacetimeSpec de_sitter(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("de_sitter", {{"r", 2.0}, {"w_variant", 0.0}}, overrides);
  if (!(params["r"] > 0)) throw ConfigError("de_sitter requires r > 0");
  const bool textbook = params["w_variant"] != 0.0;
  detail::Builder b("de_sitter", "warped R x S^3, w = r^2 cosh^2(t/r), f = e^t", {"t", "theta", "psi", "phi"},
                    params);
  const std::string w = textbook ? "(r*cosh(t/r))" : "(r^2*cosh(t/r)^2)";
  const std::string wlog = textbook ? "tanh(t/r)/r" : "2/r*tanh(t/r)";
  b.metric("t", "t", "-1");
  b.metric("theta", "theta", w + "^2/4");
  b.metric("psi", "psi", w + "^2/4");
  b.metric("phi", "phi", w + "^2/4");
  b.metric("psi", "phi", w + "^2/4*cos(theta)");
  b.s.k = b.vec({"1", "0", "2/" + w, "0"});
  b.s.t = b.vec({"-1", "0", "0", "0"});
  b.s.tau = ScalarField{b.E("t")};
  b.s.f = ParamFn::exponential();
  b.s.chart.orientation = 1;
  b.domain("sin(theta)");
  b.box({{-2.0, 2.0}, {0.2, std::numbers::pi - 0.2}, {0.0, 2 * std::numbers::pi}, {0.0, 2 * std::numbers::pi}});
  b.expect("g_kk", "0", 1e-10, "k null by construction");
  b.expect("alpha_k", wlog, 1e-9, "nabla_k k = (w'/w) k");
  b.expect("iota", "-2/" + w, 1e-9, "iota = iota_bar / w with iota_bar = -2");
  const Expr wl = b.E(wlog);
  b.s.validations.push_back({"w'/w > -1", 0.0, [wl](const Point& p) { return std::max(0.0, -1.0 - wl.eval(p)); }});
  return b.s;
}

// gbar = (dv - k dx - h dy)^2 + dx^2 + dy^2 on (v, x, y), kbar = d_v, and the
// warped metric -dt^2 + w^2 gbar with k = d_t + kbar/w.
inline SpacetimeSpec pp_truncated(const std::string& k_fn = "-y", const std::string& h_fn = "x",
                                  const std::string& w = "cosh(t)", const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("pp_truncated", {}, overrides);
  detail::Builder b("pp_truncated", "warped product over a truncated pp-wave slice (Heisenberg-type gbar)",
                    {"t", "v", "x", "y"}, params);
  const std::string K = "(" + k_fn + ")", H = "(" + h_fn + ")", W = "(" + w + ")";
  const std::string W2 = W + "^2";
  b.metric("t", "t", "-1");
  b.metric("v", "v", W2);
  b.metric("v", "x", "-" + W2 + "*" + K);
  b.metric("v", "y", "-" + W2 + "*" + H);
  b.metric("x", "x", W2 + "*(1 + " + K + "^2)");
  b.metric("y", "y", W2 + "*(1 + " + H + "^2)");
  b.metric("x", "y", W2 + "*" + K + "*" + H);
  b.s.k = b.vec({"1", "1/" + W, "0", "0"});
  b.s.t = b.vec({"-1", "0", "0", "0"});
  b.s.tau = ScalarField{b.E("t")};
  b.s.f = ParamFn::exponential();
  b.box({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}});
  b.s.beta = ScalarField{b.E("exp(x*y)")};

  const Expr Ke = b.E(K), He = b.E(H), We = b.E(W);
  // twist_bar = h_x - k_y through jets of the component functions
  auto twist_bar = [Ke, He](const Point& p) {
    const auto s = seeds(p, 1);
    return He.eval(s).d(2) - Ke.eval(s).d(3);
  };
  // Orientation chosen so that iota is negative at the box centre.
  Point centre;
  for (const auto& iv : b.s.box) centre.push_back(0.5 * (iv.lo + iv.hi));
  if (std::fabs(twist_bar(centre)) < 1e-12) throw ConfigError("pp_truncated requires h_x - k_y != 0");
  b.s.chart.orientation = 1;
  {
    const Candidate c = b.s.candidate();
    const Primitives pr = eval_primitives(c, centre, 1);
    const SplitLocal L = make_split_local(pr.g, pr.k, pr.t, 1);
    const double iota = optics_jets(pr.g, L.Gamma, pr.k, L.frame).iota.value();
    if (iota > 0) b.s.chart.orientation = -1;
  }
  b.s.validations.push_back({"twist_bar nonzero", 1e-12, twist_bar, true});
  const SpacetimeSpec copy = b.s;
  b.s.validations.push_back({"iota = -|h_x - k_y|/w", 1e-9, [copy, twist_bar, We](const Point& p) {
                               const Primitives pr = eval_primitives(copy.candidate(), p, 1);
                               const SplitLocal L = make_split_local(pr.g, pr.k, pr.t, copy.chart.orientation);
                               const double iota = optics_jets(pr.g, L.Gamma, pr.k, L.frame).iota.value();
                               return std::fabs(iota + std::fabs(twist_bar(p)) / We.eval(p));
                             }});
  // kbar unit Killing on the slice (v, x, y).
  MetricField gbar;
  {
    Symbols sym{{"v", "x", "y"}, params};
    auto P = [&](const std::string& s) { return Expr::parse(s, sym); };
    gbar.g = {{P("1"), P("-" + K), P("-" + H)},
              {P("-" + K), P("1 + " + K + "^2"), P(K + "*" + H)},
              {P("-" + H), P(K + "*" + H), P("1 + " + H + "^2")}};
  }
  VectorField kbar;
  kbar.c = {Expr::constant(1.0), Expr::constant(0.0), Expr::constant(0.0)};
  b.s.validations.push_back({"kbar unit", 1e-9, [=](const Point& p) {
                               return riemannian3_optics(gbar, kbar, 1, {p[1], p[2], p[3]}).unit_residual;
                             }});
  b.s.validations.push_back({"kbar Killing", 1e-9, [=](const Point& p) {
                               return riemannian3_optics(gbar, kbar, 1, {p[1], p[2], p[3]}).killing_residual;
                             }});
  b.s.validations.push_back({"|iota_bar| = |h_x - k_y|", 1e-9, [=](const Point& p) {
                               const auto o = riemannian3_optics(gbar, kbar, 1, {p[1], p[2], p[3]});
                               return std::fabs(std::fabs(o.scalars.iota) - std::fabs(twist_bar(p)));
                             }});
  return b.s;
}

// g = H du^2 + 2 du dv + dx^2 + dy^2, H = -x^2 - y^2, k = Z, t = grad u = d_v.
inline SpacetimeSpec plane_wave(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("plane_wave", {}, overrides);
  detail::Builder b("plane_wave", "plane wave H = -x^2 - y^2 with null Z, t = grad u, f = e^u",
                    {"u", "v", "x", "y"}, params);
  b.metric("u", "u", "-x^2 - y^2");
  b.metric("u", "v", "1");
  b.metric("x", "x", "1");
  b.metric("y", "y", "1");
  // Z = 1/2 (H + k^2 + h^2) d_v - d_u + k d_x + h d_y with k = -y, h = x
  b.s.k = b.vec({"-1", "(-x^2 - y^2 + y^2 + x^2)/2", "-y", "x"});
  b.s.t = b.vec({"0", "1", "0", "0"});
  b.s.tau = ScalarField{b.E("u")};
  b.s.f = ParamFn::exponential();
  b.s.chart.orientation = -1;
  b.box({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}});
  b.expect("iota", "-2", 1e-12, "iota^Z = k_y - h_x");
  b.expect("k_geodesic", "0", 1e-10, "Z geodesic");
  b.expect("k_shear", "0", 1e-10, "Z shear-free");
  b.expect("g_kk", "0", 1e-12, "Z null");
  // Z geodesic iff k k_xy + 2 k_x k_y + h k_yy = 0 (with the companion equation for h).
  const Expr kf = b.E("-y"), hf = b.E("x");
  b.s.validations.push_back({"k k_xy + 2 k_x k_y + h k_yy = 0", 1e-12, [kf, hf](const Point& p) {
                               const auto s = seeds(p, 2);
                               const Jet k = kf.eval(s), h = hf.eval(s);
                               return std::fabs(k.value() * k.d(2, 3) + 2 * k.d(2) * k.d(3) + h.value() * k.d(3, 3));
                             }});
  return b.s;
}

// Boyer-Lindquist Kerr with a > m.
inline SpacetimeSpec kerr(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("kerr", {{"a", 2.0}, {"m", 1.0}}, overrides);
  if (!(params["m"] > 0) || !(params["a"] > params["m"]))
    throw ConfigError("kerr requires a > m > 0 (rapid rotation)");
  detail::Builder b("kerr", "rapidly rotating Kerr, Petrov construction with u = e^h p, f(u) = u",
                    {"t", "r", "theta", "phi"}, params);
  const std::string rho2 = "(r^2 + a^2*cos(theta)^2)", D = "(r^2 - 2*m*r + a^2)";
  b.metric("t", "t", "-1 + 2*m*r/" + rho2);
  b.metric("r", "r", rho2 + "/" + D);
  b.metric("theta", "theta", rho2);
  b.metric("phi", "phi", "(r^2 + a^2 + 2*m*r*a^2*sin(theta)^2/" + rho2 + ")*sin(theta)^2");
  b.metric("t", "phi", "-2*m*r*a*sin(theta)^2/" + rho2);
  b.s.k = b.vec({"(r^2 + a^2)/" + D, "1", "0", "a/" + D});
  b.s.t = b.vec({"(r^2 + a^2)/" + D, "-1", "0", "a/" + D});
  b.s.kind = Construction::Petrov;
  b.s.potential = ScalarField{b.E("(r^2 + a^2 + 1)/" + D + "*sqrt(" + D + "/2)/sqrt(" + rho2 + ")")};
  b.s.f = ParamFn::affine(0.0);
  b.s.chart.orientation = 1;
  b.domain(rho2);
  b.domain("sin(theta)");
  b.domain(D);
  b.box({{-1.0, 1.0}, {0.5, 10.0}, {std::numbers::pi / 2 + 0.1, std::numbers::pi - 0.1}, {0.1, 6.2}});
  b.s.fields["E2"] = b.vec({"0", "0", "1/sqrt(" + rho2 + ")", "0"});
  b.s.fields["E3"] = b.vec({"a*sin(theta)/sqrt(" + rho2 + ")", "0", "0", "1/(sqrt(" + rho2 + ")*sin(theta))"});
  b.s.relations.push_back(detail::rel(b.s, "[k+,E2] = -(r/rho^2) E2", "k", "E2", {{"-r/" + rho2, "E2"}}));
  b.s.relations.push_back(detail::rel(b.s, "[k+,E3] = -(r/rho^2) E3", "k", "E3", {{"-r/" + rho2, "E3"}}));
  b.s.relations.push_back(detail::rel(b.s, "[k-,E2] = (r/rho^2) E2", "t", "E2", {{"r/" + rho2, "E2"}}));
  b.s.relations.push_back(detail::rel(b.s, "[k-,E3] = (r/rho^2) E3", "t", "E3", {{"r/" + rho2, "E3"}}));
  b.expect("iota", "2*a*cos(theta)/" + rho2, 1e-8, "twist of k+ in Kerr");
  b.expect("ricci_max", "0", 1e-6, "Kerr is Ricci-flat");
  b.expect("k_shear", "0", 1e-8, "k+ shear-free");
  b.expect("t_shear", "0", 1e-8, "k- shear-free");
  b.expect("k_geodesic", "0", 1e-9, "k+ geodesic");
  b.expect("g_kt", "-2*" + rho2 + "/" + D, 1e-9, "g(k+,k-) = -2 rho^2/Delta");
  b.expect("g_kk", "0", 1e-10, "k+ null");
  b.expect("g_tt", "0", 1e-10, "k- null");
  b.s.expected_negative.push_back("admissible");
  return b.s;
}

// NUT in coordinates (u, r, x, y), Petrov construction with potential -r, f = exp.
inline SpacetimeSpec nut(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("nut", {{"m", 1.0}, {"l", 1.0}}, overrides);
  if (!(params["l"] > 0)) throw ConfigError("nut requires l > 0");
  detail::Builder b("nut", "NUT spacetime, Petrov construction with f = e^u, u = -r", {"u", "r", "x", "y"}, params);
  const std::string R2 = "(r^2 + l^2)", F = "(r^2 - 2*m*r - l^2)";
  b.metric("u", "u", "-" + F + "/" + R2);
  b.metric("u", "r", "-1");
  b.metric("r", "y", "2*l*cos(x)");
  b.metric("u", "y", "2*l*cos(x)*" + F + "/" + R2);
  b.metric("x", "x", R2);
  b.metric("y", "y", "-" + F + "/" + R2 + "*4*l^2*cos(x)^2 + " + R2 + "*sin(x)^2");
  b.s.k = b.vec({"0", "1", "0", "0"});
  b.s.t = b.vec({"1", "-" + F + "/(2*" + R2 + ")", "0", "0"});
  b.s.kind = Construction::Petrov;
  b.s.potential = ScalarField{b.E("-r")};
  b.s.f = ParamFn::exponential();
  b.s.chart.orientation = 1;
  b.domain("sin(x)");
  b.box({{-1.0, 1.0}, {-4.0, 4.0}, {0.3, std::numbers::pi - 0.3}, {0.0, 2 * std::numbers::pi}});
  // m = (E2 - i E3)/sqrt 2 = -(rhobar/sqrt 2)(2 i l cot x d_u + d_x + i csc x d_y), rho = -1/(r + i l)
  b.s.fields["E2"] = b.vec({"-2*l^2*cos(x)/sin(x)/" + R2, "0", "r/" + R2, "-l/(sin(x)*" + R2 + ")"});
  b.s.fields["E3"] = b.vec({"-2*l*r*cos(x)/sin(x)/" + R2, "0", "-l/" + R2, "-r/(sin(x)*" + R2 + ")"});
  b.expect("iota", "-2*l/" + R2, 1e-9, "iota of k+ = -2 Im(rho)");
  b.expect("g_kt", "-1", 1e-12, "g_ur = -1, so p = 1");
  b.expect("ricci_max", "0", 1e-6, "NUT is Ricci-flat");
  b.expect("k_shear", "0", 1e-8, "k+ shear-free");
  b.expect("t_shear", "0", 1e-8, "k- shear-free");
  b.expect("k_geodesic", "0", 1e-9, "k+ geodesic");
  return b.s;
}

// (Delta/rho^2) g_Kerr with k = k+, t = grad r, f = exp(-h), h = log Delta - 2 log|r| + const.
inline SpacetimeSpec conformal_kerr(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("conformal_kerr", {{"a", 2.0}, {"m", 1.0}, {"r0", 1.0}}, overrides);
  if (!(params["m"] > 0) || !(params["a"] > params["m"]))
    throw ConfigError("conformal_kerr requires a > m > 0 (rapid rotation)");
  if (params["r0"] == 0.0) throw ConfigError("conformal_kerr requires r0 != 0");
  detail::Builder b("conformal_kerr", "(Delta/rho^2) Kerr, standard construction with t = grad r",
                    {"t", "r", "theta", "phi"}, params);
  const std::string rho2 = "(r^2 + a^2*cos(theta)^2)", D = "(r^2 - 2*m*r + a^2)";
  const std::string cf = D + "/" + rho2 + "*";
  b.metric("t", "t", cf + "(-1 + 2*m*r/" + rho2 + ")");
  b.metric("r", "r", "1");
  b.metric("theta", "theta", D);
  b.metric("phi", "phi", cf + "(r^2 + a^2 + 2*m*r*a^2*sin(theta)^2/" + rho2 + ")*sin(theta)^2");
  b.metric("t", "phi", cf + "(-2*m*r*a*sin(theta)^2/" + rho2 + ")");
  b.s.k = b.vec({"(r^2 + a^2)/" + D, "1", "0", "a/" + D});
  b.s.t = b.vec({"0", "1", "0", "0"});
  b.s.tau = ScalarField{b.E("r")};
  b.s.f = ParamFn::custom("(r0^2 - 2*m*r0 + a^2)/r0^2*tau^2/(tau^2 - 2*m*tau + a^2)", params);
  b.s.chart.orientation = -1;
  b.domain(rho2);
  b.domain("sin(theta)");
  b.domain("abs(r)");
  b.box({{-1.0, 1.0}, {0.5, 10.0}, {std::numbers::pi / 2 + 0.1, std::numbers::pi - 0.1}, {0.1, 6.2}});
  b.expect("g_tt", "1", 1e-10, "grad r has unit length");
  b.expect("alpha_k", "2*((r - m)/" + D + " - r/" + rho2 + ")", 1e-8, "pre-geodesic factor of k");
  b.expect("iota", "2*a*cos(theta)/" + rho2, 1e-9, "twist is conformally invariant");
  b.expect("t_geodesic", "0", 1e-9, "grad r geodesic");
  b.s.beta = ScalarField{b.E("1 + 0.3*sin(theta)")};
  return b.s;
}

// Left-invariant frame on R^2 x R^2 with ad_t = Id, ad_x = [[0, r], [-1, 1]] on
// span(k, y):  t = d_s1, x = d_s2, (k, y) = exp(s1) exp(s2 M) applied to e1, e2.
inline SpacetimeSpec lie_group(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("lie_group", {{"r", -1.0}}, overrides);
  const double r = params["r"];
  if (r == 0.0) throw ConfigError("lie_group requires r != 0");
  detail::Builder b("lie_group", "solvable Lie group, (k,t,x,y) orthonormal, f = e^tau", {"s1", "s2", "v1", "v2"},
                    params);
  // exp(s M) = e^{s/2} (C I + S N), N = M - I/2, N^2 = (1/4 - r) I.
  std::string C, S;
  const double disc = 0.25 - r;
  if (disc > 0) {
    const std::string mu = detail::num(std::sqrt(disc));
    C = "cosh(" + mu + "*s2)";
    S = "sinh(" + mu + "*s2)/" + mu;
  } else if (disc < 0) {
    const std::string nu = detail::num(std::sqrt(-disc));
    C = "cos(" + nu + "*s2)";
    S = "sin(" + nu + "*s2)/" + nu;
  } else {
    C = "1";
    S = "s2";
  }
  C = "(" + C + ")";
  S = "(" + S + ")";
  const std::string E = "exp(s1 + s2/2)", Ei2 = "exp(-2*s1 - s2)";
  b.s.k = b.vec({"0", "0", E + "*(" + C + " - " + S + "/2)", "-" + E + "*" + S});
  b.s.t = b.vec({"1", "0", "0", "0"});
  b.s.fields["x"] = b.vec({"0", "1", "0", "0"});
  b.s.fields["y"] = b.vec({"0", "0", E + "*" + S + "*r", E + "*(" + C + " + " + S + "/2)"});
  // coframe: khat = e^{-..}((C + S/2) dv1 - S r dv2), yhat = e^{-..}(S dv1 + (C - S/2) dv2)
  const std::string a1 = "(" + C + " + " + S + "/2)", a2 = "(-" + S + "*r)";
  const std::string b1 = S, b2 = "(" + C + " - " + S + "/2)";
  b.metric("s1", "s1", "-1");
  b.metric("s2", "s2", "1");
  b.metric("v1", "v1", Ei2 + "*(" + a1 + "^2 + " + b1 + "^2)");
  b.metric("v1", "v2", Ei2 + "*(" + a1 + "*" + a2 + " + " + b1 + "*" + b2 + ")");
  b.metric("v2", "v2", Ei2 + "*(" + a2 + "^2 + " + b2 + "^2)");
  b.s.tau = ScalarField{b.E("-s1")};
  b.s.f = ParamFn::exponential();
  b.s.chart.orientation = 1;
  b.box({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}});
  using detail::rel;
  b.s.relations.push_back(rel(b.s, "[k,x] = y", "k", "x", {{"1", "y"}}));
  b.s.relations.push_back(rel(b.s, "[t,y] = y", "t", "y", {{"1", "y"}}));
  b.s.relations.push_back(rel(b.s, "[t,k] = k", "t", "k", {{"1", "k"}}));
  b.s.relations.push_back(rel(b.s, "[x,y] = y + r k", "x", "y", {{"1", "y"}, {"r", "k"}}));
  b.s.relations.push_back(rel(b.s, "[k,y] = 0", "k", "y", {}));
  b.s.relations.push_back(rel(b.s, "[t,x] = 0", "t", "x", {}));
  b.s.relations.push_back(rel(b.s, "[x,k] = -y", "x", "k", {{"-1", "y"}}));
  b.s.relations.push_back(rel(b.s, "[y,t] = -y", "y", "t", {{"-1", "y"}}));
  b.s.relations.push_back(rel(b.s, "[k,t] = -k", "k", "t", {{"-1", "k"}}));
  b.s.relations.push_back(rel(b.s, "[y,x] = -y - r k", "y", "x", {{"-1", "y"}, {"-r", "k"}}));
  b.s.relations.push_back(rel(b.s, "[y,k] = 0", "y", "k", {}));
  b.s.relations.push_back(rel(b.s, "[x,t] = 0", "x", "t", {}));
  const SpacetimeSpec copy = b.s;
  const char* names[4] = {"k", "t", "x", "y"};
  const double norms[4] = {1.0, -1.0, 1.0, 1.0};
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const std::string a = names[i], c = names[j];
      const double target = i == j ? norms[i] : 0.0;
      b.s.validations.push_back({"g(" + a + "," + c + ") = " + detail::num(target), 1e-9,
                                 [copy, a, c, target](const Point& p) {
                                   const auto s = seeds(p, 0);
                                   const JetMat g = eval_jet(copy.g, s);
                                   return std::fabs(
                                       inner(g, eval_jet(copy.field(a), s), eval_jet(copy.field(c), s)).value() -
                                       target);
                                 }});
    }
  b.expect("sigma1_k", "0", 1e-9, "shear of k");
  b.expect("sigma2_k", "-1", 1e-9, "printed value");
  b.expect("sigma1_t", "-1", 1e-9, "printed value");
  b.expect("sigma2_t", "0", 1e-9, "shear of t");
  b.expect("iota", "r", 1e-9, "iota = g(k,[x,y]) = r");
  b.expect("t_geodesic", "0", 1e-9, "t geodesic");
  // Shear coefficients from the bracket form in the frame (x, y) of the entry.
  for (const std::string X : {"k", "t"}) {
    b.s.validations.push_back({"sigma_" + X + " matches bracket form", 1e-9, [copy, X](const Point& p) {
                                 const auto sd = seeds(p, 1);
                                 const JetMat g = truncated(eval_jet(copy.g, sd), 0);
                                 const JetVec v = eval_jet(copy.field(X), sd), x = eval_jet(copy.field("x"), sd),
                                              y = eval_jet(copy.field("y"), sd);
                                 const JetVec x0 = truncated(x, 0), y0 = truncated(y, 0);
                                 const double s1 = 0.5 * (inner(g, lie_bracket(v, x), x0).value() -
                                                          inner(g, lie_bracket(v, y), y0).value());
                                 const double s2 = -0.5 * (inner(g, lie_bracket(v, x), y0).value() +
                                                           inner(g, lie_bracket(v, y), x0).value());
                                 const Primitives pr = eval_primitives(copy.candidate(), p, 1);
                                 const SplitLocal L = make_split_local(pr.g, pr.k, pr.t, copy.chart.orientation);
                                 const OpticsJets o = optics_jets(pr.g, L.Gamma, X == "k" ? pr.k : pr.t, L.frame);
                                 return std::max(std::fabs(o.sigma1.value() - s1), std::fabs(o.sigma2.value() - s2));
                               }});
  }
  b.s.validations.push_back({"k not geodesic", 1e-6, [copy](const Point& p) {
                               const Primitives pr = eval_primitives(copy.candidate(), p, 1);
                               return max_abs(covariant_derivative(christoffel(pr.g), pr.k, pr.k));
                             },
                             true});
  b.s.validations.push_back({"k not pre-geodesic", 1e-6, [copy](const Point& p) {
                               const Primitives pr = eval_primitives(copy.candidate(), p, 1);
                               return pregeodesic_factor(christoffel(pr.g), pr.k).residual;
                             },
                             true});
  b.s.validations.push_back({"k not Killing", 1e-6, [copy](const Point& p) {
                               const Primitives pr = eval_primitives(copy.candidate(), p, 1);
                               return lie_derivative_metric(pr.g, pr.k).max_abs();
                             },
                             true});
  return b.s;
}

// Lorentzian ansatz over the SKR model on the line bundle over the flat plane.
// Chart (tau, theta, x, y); u = d_theta, v = Q d_tau, w_x = d_x + y d_theta,
// w_y = d_y - x d_theta, uhat = a (dtheta - y dx + x dy).
inline SpacetimeSpec skr_entry(const std::string& id, const std::string& Q, const std::string& pfn,
                               const std::map<std::string, double>& param_defaults,
                               const std::map<std::string, double>& overrides) {
  auto params = detail::resolve_params(id, param_defaults, overrides);
  if (!(params["q"] < 0)) throw ConfigError(id + " requires q < 0");
  if (params["a"] == 0.0) throw ConfigError(id + " requires a != 0");
  detail::Builder b(id, "Lorentzian metric inducing the SKR model, p(tau) = " + pfn, {"tau", "theta", "x", "y"},
                    params);
  const std::string Qs = "(" + Q + ")", P = "(" + pfn + ")";
  b.metric("tau", "tau", "q/" + Qs + "^2");
  b.metric("theta", "theta", P);
  b.metric("theta", "x", "-" + P + "*y");
  b.metric("theta", "y", P + "*x");
  b.metric("x", "x", "1 + " + P + "*y^2");
  b.metric("y", "y", "1 + " + P + "*x^2");
  b.metric("x", "y", "-" + P + "*x*y");
  b.s.k = b.vec({"0", "1", "0", "0"});
  b.s.t = b.vec({"-" + Qs, "0", "0", "0"});
  b.s.tau = ScalarField{b.E("tau")};
  b.s.f = ParamFn::custom("(tau - c)/" + P, params);
  b.s.chart.orientation = 1;
  b.s.r_base = ScalarField{b.E("1")};
  b.domain("tau - c");
  b.domain(Qs);
  b.domain(P);
  b.box({{params["c"] + 0.5, params["c"] + 3.0}, {0.0, 2 * std::numbers::pi}, {-1.0, 1.0}, {-1.0, 1.0}});

  MetricField gS;
  gS.g.assign(4, std::vector<Expr>(4, Expr::constant(0.0)));
  auto setS = [&](int i, int j, const std::string& s) { gS.g[i][j] = gS.g[j][i] = b.E(s); };
  setS(0, 0, "1/" + Qs);
  setS(1, 1, Qs);
  setS(1, 2, "-" + Qs + "*y");
  setS(1, 3, Qs + "*x");
  setS(2, 2, Qs + "*y^2 + 2*abs(tau - c)");
  setS(3, 3, Qs + "*x^2 + 2*abs(tau - c)");
  setS(2, 3, "-" + Qs + "*x*y");
  b.s.reference = gS;

  b.s.fields["u"] = b.vec({"0", "1", "0", "0"});
  b.s.fields["v"] = b.vec({Qs, "0", "0", "0"});
  b.s.fields["wx"] = b.vec({"0", "y", "1", "0"});
  b.s.fields["wy"] = b.vec({"0", "-x", "0", "1"});
  using detail::rel;
  b.s.relations.push_back(rel(b.s, "SKR iii) [u,v] = 0", "u", "v", {}));
  b.s.relations.push_back(rel(b.s, "SKR iv) [v,wx] = 0", "v", "wx", {}));
  b.s.relations.push_back(rel(b.s, "SKR iv) [v,wy] = 0", "v", "wy", {}));
  b.s.relations.push_back(rel(b.s, "SKR v) [u,wx] = 0", "u", "wx", {}));
  b.s.relations.push_back(rel(b.s, "SKR v) [u,wy] = 0", "u", "wy", {}));
  b.s.relations.push_back(rel(b.s, "SKR vi) [wx,wy] = -2 u", "wx", "wy", {{"-2", "u"}}));
  const SpacetimeSpec copy = b.s;
  b.s.validations.push_back({"SKR i) g_S(u,v) = 0", 1e-9, [copy](const Point& p) {
                               const auto s = seeds(p, 0);
                               return std::fabs(inner(eval_jet(*copy.reference, s), eval_jet(copy.field("u"), s),
                                                      eval_jet(copy.field("v"), s))
                                                    .value());
                             }});
  const Expr Qe = b.E(Qs);
  b.s.validations.push_back({"SKR ii) Q > 0", 0.0, [Qe](const Point& p) { return std::max(0.0, -Qe.eval(p)); }});
  b.expect("ell", "-q/" + Qs, 1e-8, "ell = -q/Q");
  b.expect("iota", "-2*" + P, 1e-8, "iota = -2p");
  b.expect("gK_minus_reference", "0", 1e-7, "g_K = g_S");
  b.expect("g_kt", "0", 1e-12, "g(k,t) = 0");
  return b.s;
}

inline SpacetimeSpec skr(const std::map<std::string, double>& overrides = {}) {
  return skr_entry("skr", "tau^2 + 1", "tau - c", {{"a", 1.0}, {"c", 0.0}, {"q", -1.0}}, overrides);
}
inline SpacetimeSpec skr_const_p(const std::map<std::string, double>& overrides = {}) {
  return skr_entry("skr_const_p", "tau^2 + 1", "p0", {{"a", 1.0}, {"c", 0.0}, {"q", -1.0}, {"p0", 1.0}}, overrides);
}

// Minkowski with a null pair; iota = 0 so the Kahler region is empty.
inline SpacetimeSpec minkowski(const std::map<std::string, double>& overrides = {}) {
  auto params = detail::resolve_params("minkowski", {}, overrides);
  detail::Builder b("minkowski", "flat spacetime with the null pair d_t + d_z, (d_z - d_t)/2",
                    {"t", "x", "y", "z"}, params);
  b.metric("t", "t", "-1");
  b.metric("x", "x", "1");
  b.metric("y", "y", "1");
  b.metric("z", "z", "1");
  b.s.k = b.vec({"1", "0", "0", "1"});
  b.s.t = b.vec({"-0.5", "0", "0", "0.5"});
  b.s.tau = ScalarField{b.E("(t + z)/2")};
  b.s.f = ParamFn::exponential();
  b.box({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}});
  b.expect("iota", "0", 1e-12, "flat null pair is twist-free");
  b.expect("riemann_max", "0", 1e-12, "flat");
  return b.s;
}

struct CatalogItem {
  std::string id;
  std::string description;
  std::function<SpacetimeSpec(const std::map<std::string, double>&)> make;
};

inline const std::vector<CatalogItem>& catalog() {
  static const std::vector<CatalogItem> items = {
      {"conformal_kerr", "(Delta/rho^2) Kerr, standard construction with t = grad r", conformal_kerr},
      {"de_sitter", "warped R x S^3 with w = r^2 cosh^2(t/r), f = e^t", de_sitter},
      {"direct_product_hopf", "R x S^3 with k = d_t + Hopf field, f = e^t", direct_product_hopf},
      {"kerr", "rapidly rotating Kerr, Petrov construction (not admissible)", kerr},
      {"lie_group", "solvable Lie group with orthonormal (k,t,x,y), f = e^tau", lie_group},
      {"minkowski", "flat spacetime with a null pair (empty Kahler region)", minkowski},
      {"nut", "NUT spacetime, Petrov construction with f = e^-r", nut},
      {"plane_wave", "plane wave H = -x^2 - y^2, k = Z, t = grad u", plane_wave},
      {"pp_truncated", "warped product over a truncated pp-wave slice",
       [](const std::map<std::string, double>& o) { return pp_truncated("-y", "x", "cosh(t)", o); }},
      {"skr", "Lorentzian ansatz inducing the SKR model, Killing k", skr},
      {"skr_const_p", "SKR ansatz with constant g(k,k), geodesic k", skr_const_p},
  };
  return items;
}

inline SpacetimeSpec make_entry(const std::string& id, const std::map<std::string, double>& overrides = {}) {
  for (const auto& it : catalog())
    if (it.id == id) return it.make(overrides);
  throw ConfigError("unknown entry '" + id + "'");
}

// ---------------------------------------------------------------------------
// Text format
//
//   [chart]    name, coords (comma separated), orientation (+1|-1), domain (repeatable, expr > 0)
//   [params]   name = number
//   [metric]   a,b = expr        (symmetric; unset components are 0)
//   [reference] a,b = expr       optional metric g_K is compared against
//   [fields]   kind = standard|petrov, k = e1; e2; ..., t = ..., tau = expr,
//              potential = expr, f = exp|affine:c|expr:..., r_base = expr, beta = expr,
//              field.<name> = e1; ...
//   [box]      coord = lo:hi
//   [expected] quantity = expr ; tol, and expected_negative = check, check, ...
//
// '#' starts a comment that runs to the end of the line.

inline std::string to_spec_text(const SpacetimeSpec& s) {
  std::ostringstream o;
  o << "[chart]\nname = " << s.id << "\ncoords = ";
  for (std::size_t i = 0; i < s.chart.coords.size(); ++i) o << (i ? ", " : "") << s.chart.coords[i];
  o << "\norientation = " << s.chart.orientation << "\n";
  for (const auto& d : s.chart.domain) o << "domain = " << d.str() << "\n";
  o << "\n[params]\n";
  for (const auto& [k, v] : s.params) o << k << " = " << detail::num(v) << "\n";
  const int n = s.chart.dim();
  auto metric = [&](const char* sec, const MetricField& m) {
    o << "\n[" << sec << "]\n";
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (!m.g[i][j].is_zero_literal())
          o << s.chart.coords[i] << "," << s.chart.coords[j] << " = " << m.g[i][j].str() << "\n";
  };
  metric("metric", s.g);
  if (s.reference) metric("reference", *s.reference);
  auto vec = [&](const VectorField& v) {
    std::string r;
    for (std::size_t i = 0; i < v.c.size(); ++i) r += (i ? "; " : "") + v.c[i].str();
    return r;
  };
  o << "\n[fields]\nkind = " << (s.kind == Construction::Standard ? "standard" : "petrov") << "\n";
  o << "k = " << vec(s.k) << "\nt = " << vec(s.t) << "\n";
  if (s.tau) o << "tau = " << s.tau->e.str() << "\n";
  if (s.potential) o << "potential = " << s.potential->e.str() << "\n";
  o << "f = " << s.f.source << "\n";
  if (s.r_base) o << "r_base = " << s.r_base->e.str() << "\n";
  if (s.beta) o << "beta = " << s.beta->e.str() << "\n";
  for (const auto& [name, v] : s.fields) o << "field." << name << " = " << vec(v) << "\n";
  o << "\n[box]\n";
  for (int i = 0; i < n; ++i)
    o << s.chart.coords[i] << " = " << detail::num(s.box[i].lo) << ":" << detail::num(s.box[i].hi) << "\n";
  if (!s.expected.empty() || !s.expected_negative.empty()) {
    o << "\n[expected]\n";
    for (const auto& e : s.expected) o << e.quantity << " = " << e.value.str() << " ; " << detail::num(e.tol) << "\n";
    if (!s.expected_negative.empty()) {
      o << "expected_negative = ";
      for (std::size_t i = 0; i < s.expected_negative.size(); ++i) o << (i ? ", " : "") << s.expected_negative[i];
      o << "\n";
    }
  }
  return o.str();
}

class SpecParseError : public ConfigError {
 public:
  SpecParseError(const std::string& msg, int line) : ConfigError("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}
}  // namespace detail

// Parameter overrides replace values from [params]; unknown names are errors.
inline SpacetimeSpec parse_spec_text(const std::string& text, const std::map<std::string, double>& overrides = {}) {
  struct Line {
    std::string key, value;
    int line;
  };
  std::map<std::string, std::vector<Line>> sections;
  const std::vector<std::string> known = {"chart", "params", "metric", "reference", "fields", "box", "expected"};
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line[0] == '[') {
      if (line.back() != ']') throw SpecParseError("malformed section header '" + line + "'", lineno);
      current = detail::trim(line.substr(1, line.size() - 2));
      if (std::find(known.begin(), known.end(), current) == known.end())
        throw SpecParseError("unknown section '" + current + "'", lineno);
      continue;
    }
    if (current.empty()) throw SpecParseError("key outside of a section", lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SpecParseError("expected key = value", lineno);
    sections[current].push_back({detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), lineno});
  }

  SpacetimeSpec s;
  auto one = [&](const std::string& sec, const std::string& key) -> const Line* {
    for (const auto& l : sections[sec])
      if (l.key == key) return &l;
    return nullptr;
  };
  auto parse_expr = [&](const std::string& src, int line) {
    try {
      return s.parse(src);
    } catch (const ExprError& e) {
      throw SpecParseError(e.what(), line);
    }
  };

  const Line* name = one("chart", "name");
  const Line* coords = one("chart", "coords");
  if (!coords) throw SpecParseError("[chart] needs coords", lineno);
  s.id = name ? name->value : "custom";
  s.chart.name = s.id;
  s.description = "custom spec";
  s.chart.coords = detail::split(coords->value, ',');
  const int n = s.chart.dim();
  if (n != 4) throw SpecParseError("chart must have 4 coordinates", coords->line);
  for (const auto& l : sections["params"]) {
    try {
      std::size_t used = 0;
      s.params[l.key] = std::stod(l.value, &used);
      if (used != l.value.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw SpecParseError("parameter '" + l.key + "' must be a decimal number", l.line);
    }
  }
  for (const auto& [key, val] : overrides) {
    auto it = s.params.find(key);
    if (it == s.params.end()) throw ConfigError("spec has no parameter '" + key + "'");
    it->second = val;
  }
  if (const Line* o = one("chart", "orientation")) {
    if (o->value == "1" || o->value == "+1") s.chart.orientation = 1;
    else if (o->value == "-1") s.chart.orientation = -1;
    else throw SpecParseError("orientation must be +1 or -1", o->line);
  }
  for (const auto& l : sections["chart"])
    if (l.key == "domain") s.chart.domain.push_back(parse_expr(l.value, l.line));

  auto parse_metric = [&](const std::string& sec) {
    MetricField m;
    m.g.assign(n, std::vector<Expr>(n, Expr::constant(0.0)));
    for (const auto& l : sections[sec]) {
      const auto ab = detail::split(l.key, ',');
      if (ab.size() != 2) throw SpecParseError("metric key must be 'a,b'", l.line);
      const int i = s.chart.index_of(ab[0]), j = s.chart.index_of(ab[1]);
      if (i < 0 || j < 0) throw SpecParseError("unknown coordinate in metric key '" + l.key + "'", l.line);
      m.g[i][j] = m.g[j][i] = parse_expr(l.value, l.line);
    }
    return m;
  };
  s.g = parse_metric("metric");
  if (!sections["reference"].empty()) s.reference = parse_metric("reference");
  auto parse_vec = [&](const Line& l) {
    const auto parts = detail::split(l.value, ';');
    if (static_cast<int>(parts.size()) != n) throw SpecParseError("vector field needs 4 components", l.line);
    VectorField v;
    for (const auto& p : parts) v.c.push_back(parse_expr(p, l.line));
    return v;
  };
  const Line* kind = one("fields", "kind");
  if (kind && kind->value == "petrov") s.kind = Construction::Petrov;
  else if (kind && kind->value != "standard") throw SpecParseError("kind must be standard or petrov", kind->line);
  const Line* k = one("fields", "k");
  const Line* t = one("fields", "t");
  if (!k || !t) throw SpecParseError("[fields] needs k and t", lineno);
  s.k = parse_vec(*k);
  s.t = parse_vec(*t);
  if (const Line* l = one("fields", "tau")) s.tau = ScalarField{parse_expr(l->value, l->line)};
  if (const Line* l = one("fields", "potential")) s.potential = ScalarField{parse_expr(l->value, l->line)};
  if (const Line* l = one("fields", "r_base")) s.r_base = ScalarField{parse_expr(l->value, l->line)};
  if (const Line* l = one("fields", "beta")) s.beta = ScalarField{parse_expr(l->value, l->line)};
  if (const Line* l = one("fields", "f")) {
    try {
      s.f = ParamFn::parse(l->value, s.params);
    } catch (const std::exception& e) {
      throw SpecParseError(e.what(), l->line);
    }
  }
  for (const auto& l : sections["fields"])
    if (l.key.rfind("field.", 0) == 0) s.fields[l.key.substr(6)] = parse_vec(l);
  if (s.kind == Construction::Standard && !s.tau) throw SpecParseError("standard construction needs tau", lineno);
  if (s.kind == Construction::Petrov && !s.potential) throw SpecParseError("petrov construction needs potential", lineno);

  s.box.assign(n, Interval{});
  std::vector<bool> seen(n, false);
  for (const auto& l : sections["box"]) {
    const int i = s.chart.index_of(l.key);
    if (i < 0) throw SpecParseError("unknown coordinate '" + l.key + "' in [box]", l.line);
    const auto lohi = detail::split(l.value, ':');
    if (lohi.size() != 2) throw SpecParseError("box interval must be lo:hi", l.line);
    const Expr lo = parse_expr(lohi[0], l.line), hi = parse_expr(lohi[1], l.line);
    if (lo.depends_on_coordinates() || hi.depends_on_coordinates())
      throw SpecParseError("box bounds must not depend on coordinates", l.line);
    s.box[i] = {lo.eval(std::vector<double>(n, 0.0)), hi.eval(std::vector<double>(n, 0.0))};
    if (!(s.box[i].lo < s.box[i].hi)) throw SpecParseError("box interval must have lo < hi", l.line);
    seen[i] = true;
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw SpecParseError("[box] missing coordinate '" + s.chart.coords[i] + "'", lineno);
  for (const auto& l : sections["expected"]) {
    if (l.key == "expected_negative") {
      for (const auto& c : detail::split(l.value, ','))
        if (!c.empty()) s.expected_negative.push_back(c);
      continue;
    }
    const auto parts = detail::split(l.value, ';');
    Expected e{l.key, parse_expr(parts[0], l.line), 1e-9, "custom"};
    if (parts.size() > 1) {
      try {
        e.tol = std::stod(parts[1]);
      } catch (const std::exception&) {
        throw SpecParseError("bad tolerance", l.line);
      }
    }
    s.expected.push_back(e);
  }
  return s;
}

}  // namespace geokahler
