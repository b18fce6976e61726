#pragma once

// Command engine behind the geokahler tool: run configuration, the verify /
// region / curvature pipelines and report rendering (json, csv, text).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "geokahler/catalog.hpp"
#include "geokahler/curvature_kahler.hpp"
#include "geokahler/jstruct.hpp"
#include "geokahler/kahler.hpp"
#include "geokahler/optics.hpp"

namespace geokahler::cli {

inline constexpr const char* kEngineVersion = "geokahler 0.1.0";
inline constexpr int kSchema = 1;

enum ExitCode { kPass = 0, kFail = 1, kConfig = 2 };

struct RunConfig {
  std::string command = "verify";
  std::string entry;      // catalog id
  std::string spec_path;  // custom spec file
  std::map<std::string, double> params;
  std::vector<std::pair<std::string, Interval>> box;
  int samples = 100;
  double tol = 1e-7;
  double fd_tol = 1e-4;
  std::optional<int> orientation;
  std::optional<std::string> f;
  std::string format = "json";
  std::string out;
  std::vector<std::string> checks;  // name prefixes to keep
  std::string curvature_case = "auto";
};

// Default jet tolerance: GEOKAHLER_TOL if set and valid, else 1e-7.
inline double default_tolerance() {
  if (const char* env = std::getenv("GEOKAHLER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && *end == '\0' && v > 0.0) return v;
  }
  return 1e-7;
}

struct Check {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = true;
  bool expected_negative = false;
  bool skipped = false;
  int samples = 0;
  std::string note;
};

struct Report {
  RunConfig config;
  std::string entry;
  std::map<std::string, double> params;
  std::vector<std::string> coords;
  int samples = 0;
  std::vector<Check> checks;
  std::vector<std::string> columns;  // per-sample table
  std::vector<std::vector<double>> rows;
  bool refused = false;
  std::string reason;

  bool pass() const {
    if (refused) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.skipped || c.pass; });
  }
  std::string verdict() const { return refused ? "refused" : (pass() ? "pass" : "fail"); }
  int exit_code() const { return pass() ? kPass : kFail; }
};

// ---------------------------------------------------------------------------
// Spec loading

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SpacetimeSpec load_spec(const RunConfig& cfg) {
  SpacetimeSpec s;
  if (!cfg.spec_path.empty()) {
    s = parse_spec_text(read_file(cfg.spec_path), cfg.params);
  } else {
    if (cfg.entry.empty()) throw ConfigError("no entry given");
    s = make_entry(cfg.entry, cfg.params);
  }
  if (cfg.orientation) {
    if (*cfg.orientation != 1 && *cfg.orientation != -1) throw ConfigError("orientation must be +1 or -1");
    s.chart.orientation = *cfg.orientation;
  }
  if (cfg.f) {
    try {
      s.f = ParamFn::parse(*cfg.f, s.params);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  for (const auto& [coord, iv] : cfg.box) {
    const int i = s.chart.index_of(coord);
    if (i < 0) throw ConfigError("unknown coordinate '" + coord + "' in --box");
    if (!(iv.lo < iv.hi)) throw ConfigError("empty box for '" + coord + "'");
    s.box[i] = iv;
  }
  return s;
}

// "name=value" with a decimal value.
inline std::pair<std::string, double> parse_param(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects name=value, got '" + kv + "'");
  const std::string name = kv.substr(0, eq), val = kv.substr(eq + 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(val, &used);
    if (used != val.size()) throw std::invalid_argument("trailing");
    return {name, v};
  } catch (const std::exception&) {
    throw ConfigError("--param " + name + ": '" + val + "' is not a decimal number");
  }
}

// "coord=lo:hi" with decimal bounds.
inline std::pair<std::string, Interval> parse_box(const std::string& kv) {
  const auto eq = kv.find('=');
  const auto colon = kv.find(':', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || colon == std::string::npos) throw ConfigError("--box expects coord=lo:hi");
  try {
    std::size_t u1 = 0, u2 = 0;
    const std::string a = kv.substr(eq + 1, colon - eq - 1), b = kv.substr(colon + 1);
    const double lo = std::stod(a, &u1), hi = std::stod(b, &u2);
    if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument("trailing");
    return {kv.substr(0, eq), Interval{lo, hi}};
  } catch (const std::exception&) {
    throw ConfigError("--box " + kv + ": bounds must be decimal numbers");
  }
}

// ---------------------------------------------------------------------------
// Quantities named in expected-value tables

inline const std::vector<std::string>& known_quantities() {
  static const std::vector<std::string> q = {
      "iota",      "iota_sq",    "twist_function", "sigma1_k",    "sigma2_k",      "sigma1_t",
      "sigma2_t",  "k_shear",    "t_shear",        "alpha_k",     "alpha_t",       "k_geodesic",
      "t_geodesic", "g_kk",      "g_kt",           "g_tt",        "G",             "ell",
      "ricci_max", "riemann_max", "riemann_K_max", "gK_minus_reference"};
  return q;
}

inline double quantity(const std::string& q, const SpacetimeSpec& s, const Point& p) {
  const Candidate c = s.candidate();
  if (q == "g_kk" || q == "g_kt" || q == "g_tt") {
    const Primitives pr = eval_primitives(c, p, 0);
    const JetVec& a = q == "g_tt" ? pr.t : pr.k;
    const JetVec& b = q == "g_kk" ? pr.k : pr.t;
    return inner(pr.g, a, b).value();
  }
  if (q == "ricci_max" || q == "riemann_max") {
    const Curvature C = curvature(eval_jet(s.g, p, 2));
    if (q == "riemann_max") return C.max_riemann_lowered;
    double m = 0.0;
    for (const auto& r : C.ricci)
      for (double v : r) m = std::max(m, std::fabs(v));
    return m;
  }
  if (q == "riemann_K_max") {
    const KahlerLocal K = kahler_local(eval_primitives(c, p, 3), s.f, s.kind, s.chart.orientation);
    return curvature(K.gK).max_riemann_lowered;
  }
  if (q == "ell" || q == "gK_minus_reference") {
    const KahlerLocal K = kahler_local(eval_primitives(c, p, 1), s.f, s.kind, s.chart.orientation);
    if (q == "ell") return K.ell.value();
    if (!s.reference) throw ConfigError("entry has no reference metric");
    return max_abs_diff(K.gK, eval_jet(*s.reference, seeds(p, 0)));
  }
  const Primitives pr = eval_primitives(c, p, 1);
  const SplitLocal L = make_split_local(pr.g, pr.k, pr.t, s.chart.orientation);
  if (q == "G") return L.frame.G.value();
  if (q == "alpha_k") return pregeodesic_factor(L.Gamma, pr.k).alpha;
  if (q == "alpha_t") return pregeodesic_factor(L.Gamma, pr.t).alpha;
  if (q == "k_geodesic") return max_abs(covariant_derivative(L.Gamma, pr.k, pr.k));
  if (q == "t_geodesic") return max_abs(covariant_derivative(L.Gamma, pr.t, pr.t));
  const bool on_t = q.size() > 2 && q.substr(q.size() - 2) == "_t";
  const OpticsJets o = optics_jets(pr.g, L.Gamma, on_t ? pr.t : pr.k, L.frame);
  if (q == "iota") return o.iota.value();
  if (q == "iota_sq") return o.iota.value() * o.iota.value();
  if (q == "twist_function") return std::fabs(o.iota.value());
  if (q == "sigma1_k" || q == "sigma1_t") return o.sigma1.value();
  if (q == "sigma2_k" || q == "sigma2_t") return o.sigma2.value();
  if (q == "k_shear" || q == "t_shear") return std::max(std::fabs(o.sigma1.value()), std::fabs(o.sigma2.value()));
  throw ConfigError("unknown quantity '" + q + "'");
}

// ---------------------------------------------------------------------------
// Finite-difference oracle for component functions

// Worst relative error of jet first and second derivatives against central
// differences, over all coordinates.
inline double fd_component_error(const Expr& e, const Point& p) {
  const int n = static_cast<int>(p.size());
  const Jet j = e.eval(seeds(p, 2));
  double worst = 0.0;
  const double h1 = 1e-5, h2 = 1e-3;
  for (int a = 0; a < n; ++a) {
    Point pp = p, pm = p;
    pp[a] += h1;
    pm[a] -= h1;
    const double d1 = (e.eval(pp) - e.eval(pm)) / (2 * h1);
    worst = std::max(worst, std::fabs(d1 - j.d(a)) / (1.0 + std::fabs(j.d(a))));
    Point qp = p, qm = p;
    qp[a] += h2;
    qm[a] -= h2;
    const double d2 = (e.eval(qp) - 2 * e.eval(p) + e.eval(qm)) / (h2 * h2);
    worst = std::max(worst, std::fabs(d2 - j.d(a, a)) / (1.0 + std::fabs(j.d(a, a))));
  }
  return worst;
}

inline std::vector<const Expr*> component_functions(const SpacetimeSpec& s) {
  std::vector<const Expr*> out;
  for (const auto& row : s.g.g)
    for (const auto& e : row) out.push_back(&e);
  for (const auto& e : s.k.c) out.push_back(&e);
  for (const auto& e : s.t.c) out.push_back(&e);
  if (s.tau) out.push_back(&s.tau->e);
  if (s.potential) out.push_back(&s.potential->e);
  if (s.reference)
    for (const auto& row : s.reference->g)
      for (const auto& e : row) out.push_back(&e);
  for (const auto& [name, v] : s.fields)
    for (const auto& e : v.c) out.push_back(&e);
  return out;
}

// ---------------------------------------------------------------------------
// Check accumulation

namespace detail {

inline Check make_check(std::string name, double tol) {
  Check c;
  c.name = std::move(name);
  c.tol = tol;
  return c;
}

// Informational record; always passes.
inline Check info_check(std::string name, double value) {
  Check c = make_check(std::move(name), 0.0);
  c.residual = value;
  return c;
}

// Max-residual check: passes when every sample residual is below tol.
class Acc {
 public:
  Acc(std::string name, double tol, bool want_above = false) : c_{make_check(std::move(name), tol)}, above_(want_above) {
    if (above_) c_.residual = std::numeric_limits<double>::infinity();
  }
  void add(double r) {
    ++c_.samples;
    if (!std::isfinite(r)) {
      bad_ = true;
      ++nonfinite_;
      c_.note = "non-finite residual at " + std::to_string(nonfinite_) + " sample(s)";
      return;
    }
    c_.residual = above_ ? std::min(c_.residual, r) : std::max(c_.residual, r);
  }
  void error(int sample, const std::string& what) {
    ++c_.samples;
    bad_ = true;
    if (c_.note.empty()) c_.note = "sample " + std::to_string(sample) + ": " + what;
  }
  void note(const std::string& n) { c_.note = n; }
  Check done() {
    Check c = c_;
    if (above_ && c.samples == 0) c.residual = 0.0;
    // A zero tolerance marks a sign condition whose residual is the size of the violation.
    const bool within = c.tol == 0.0 ? c.residual == 0.0 : c.residual < c.tol;
    c.pass = !bad_ && c.samples > 0 && (above_ ? c.residual > c.tol : within);
    if (!std::isfinite(c.residual)) c.residual = 0.0;
    return c;
  }

 private:
  Check c_;
  int nonfinite_ = 0;
  bool above_ = false;
  bool bad_ = false;
};

inline Check skipped(const std::string& name, const std::string& why) {
  Check c;
  c.name = name;
  c.skipped = true;
  c.note = "skipped: " + why;
  return c;
}

inline void apply_expected_negative(const SpacetimeSpec& s, std::vector<Check>& checks) {
  for (auto& c : checks) {
    if (std::find(s.expected_negative.begin(), s.expected_negative.end(), c.name) == s.expected_negative.end())
      continue;
    c.expected_negative = true;
    c.pass = !c.pass;
    c.note = c.pass ? "fails as expected" + (c.note.empty() ? "" : " (" + c.note + ")")
                    : "expected to fail but passed";
  }
}

inline void filter_checks(const RunConfig& cfg, std::vector<Check>& checks) {
  if (cfg.checks.empty()) return;
  std::vector<Check> kept;
  for (const auto& c : checks)
    for (const auto& pre : cfg.checks)
      if (c.name.rfind(pre, 0) == 0) {
        kept.push_back(c);
        break;
      }
  checks = std::move(kept);
}

inline Report start_report(const RunConfig& cfg, const SpacetimeSpec& s, std::vector<Point>& pts) {
  Report r;
  r.config = cfg;
  r.entry = s.id;
  r.params = s.params;
  r.coords = s.chart.coords;
  if (cfg.samples < 1) throw ConfigError("--samples must be positive");
  pts = halton_samples(s.chart, s.box, cfg.samples);
  if (pts.empty()) throw ConfigError("no sample points inside the chart domain (empty box?)");
  r.samples = static_cast<int>(pts.size());
  return r;
}

// Hypotheses shared by the geodesic transfer and the vertical variation:
// k, t geodesic of constant length, g(k,t) constant, ell = 1.
inline std::string geo_geo_failure(const KahlerLocal& K, double tol) {
  const SplitLocal& S = K.S;
  if (max_abs(covariant_derivative(S.Gamma, S.k, S.k)) >= tol) return "k geodesic";
  if (max_abs(covariant_derivative(S.Gamma, S.t, S.t)) >= tol) return "t geodesic";
  if (max_abs(differential(inner(S.g, S.k, S.k), S.g.n)) >= tol) return "g(k,k) constant";
  if (max_abs(differential(inner(S.g, S.t, S.t), S.g.n)) >= tol) return "g(t,t) constant";
  if (max_abs(differential(inner(S.g, S.k, S.t), S.g.n)) >= tol) return "g(k,t) constant";
  if (std::fabs(K.ell.value() - 1.0) >= tol) return "ell = 1";
  return {};
}

inline std::string killing_transfer_failure(const KahlerLocal& K, double tol) {
  const SplitLocal& S = K.S;
  if (lie_derivative_metric(S.g, S.k).max_abs() >= tol) return "k Killing";
  if (h_gradient_residual(S, K.ell) >= tol) return "ell function of tau";
  if (h_gradient_residual(S, K.opt.iota) >= tol) return "iota function of tau";
  if (std::fabs(inner(S.g, S.k, S.t).value()) >= tol) return "g(k,t) = 0";
  if (max_abs(lie_bracket(S.k, S.t)) >= tol) return "[k,t] = 0";
  return {};
}

inline std::string repeat_failure(const KahlerLocal& K, double tol) {
  const SplitLocal& S = K.S;
  if (std::fabs(inner(S.g, S.k, S.t).value()) >= tol) return "g(k,t) = 0";
  if (h_gradient_residual(S, K.ell) >= tol) return "ell function of tau";
  if (h_gradient_residual(S, inner(S.g, S.t, S.t)) >= tol) return "g(t,t) function of tau";
  const int o = std::max(S.k.order() - 1, 0);
  if (h_gradient_residual(S, inner(truncated(S.g, o), lie_bracket(S.k, S.t), truncated(S.k, o))) >= tol)
    return "g([k,t],k) function of tau";
  return {};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// verify

inline Report run_verify(const RunConfig& cfg, const SpacetimeSpec& s) {
  using detail::Acc;
  std::vector<Point> pts;
  Report rep = detail::start_report(cfg, s, pts);
  const Candidate cand = s.candidate();
  const double tol = cfg.tol;
  std::vector<Check>& out = rep.checks;

  {
    Check c = detail::info_check("samples", 0.0);
    c.samples = rep.samples;
    c.note = std::to_string(rep.samples) + " of " + std::to_string(cfg.samples) + " requested points in domain";
    out.push_back(c);
  }

  // Jet derivatives against central differences on a few samples.
  {
    Acc a("oracle:finite_difference", cfg.fd_tol);
    const auto comps = component_functions(s);
    for (int i = 0; i < std::min<int>(3, rep.samples); ++i) {
      double worst = 0.0;
      for (const Expr* e : comps) worst = std::max(worst, fd_component_error(*e, pts[i]));
      a.add(worst);
    }
    out.push_back(a.done());
  }

  for (const auto& e : s.expected) {
    if (std::find(known_quantities().begin(), known_quantities().end(), e.quantity) == known_quantities().end())
      throw ConfigError("unknown expected quantity '" + e.quantity + "'");
    Acc a("expected:" + e.quantity, e.tol);
    a.note(e.source);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      try {
        a.add(std::fabs(quantity(e.quantity, s, pts[i]) - e.value.eval(pts[i])));
      } catch (const std::exception& ex) {
        a.error(static_cast<int>(i), ex.what());
      }
    }
    out.push_back(a.done());
  }
  for (const auto& r : s.relations) {
    Acc a("relation:" + r.name, 1e-9);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      try {
        a.add(geokahler::detail::relation_residual(s, r, pts[i]));
      } catch (const std::exception& ex) {
        a.error(static_cast<int>(i), ex.what());
      }
    }
    out.push_back(a.done());
  }
  for (const auto& v : s.validations) {
    Acc a("validation:" + v.name, v.tol, v.expect_nonzero);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      try {
        a.add(v.residual(pts[i]));
      } catch (const std::exception& ex) {
        a.error(static_cast<int>(i), ex.what());
      }
    }
    out.push_back(a.done());
  }

  const bool standard = s.kind == Construction::Standard;
  Acc adm("admissible", tol);
  Acc integ("integrable", tol);
  Acc p_null("petrov:null_pair", 1e-10), p_shear("petrov:shear_free", 1e-8), p_geo("petrov:k+_geodesic", 1e-9),
      p_pre("petrov:k-_pregeodesic", tol), p_neg("petrov:g(k+,k-)<0", 0.0), p_vert("petrov:f(u)/p_vertical", tol),
      p_kn("petrov:kerr_nut_condition", tol);
  Acc k_closed("kahler:closed", 1e-8), k_jc("kahler:j_compatible", 1e-9), k_sym("kahler:symmetric", 1e-9),
      k_pos("kahler:positive", 0.0, true), k_nij("kahler:nijenhuis", 1e-7), k_nab("kahler:nabla_J", 1e-5);
  Acc t_shear("transfer:shear", 1e-8), t_geo("transfer:geodesic", 1e-7), t_kill("transfer:killing", 1e-7),
      t_pre("transfer:t_pregeodesic", tol), t_rep("transfer:repeated_admissibility", tol);
  Acc v_vert("variation:vertical", 1e-8), v_bic("variation:biconformal", 1e-8);
  Acc lik("region:killing_specialization", 1e-9);
  std::string geo_skip, kill_skip, rep_skip, vert_skip;
  std::set<std::string> adm_fail;
  int in_region = 0;

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int si = static_cast<int>(i);
    const Point& p = pts[i];
    try {
      const Primitives pr = eval_primitives(cand, p, 2);
      const KahlerLocal K = kahler_local(pr, s.f, s.kind, s.chart.orientation);
      const SplitLocal& S = K.S;
      const AdmissibilityReport ar = check_admissible(S, standard ? &K.tau : nullptr, tol);
      double worst = std::max({ar.nij_i, ar.nij_ii, ar.t_gradient, ar.gkt_h_gradient, ar.gkk_h_gradient});
      if (!ar.nonsingular) adm_fail.insert("G nonsingular");
      if (!ar.h_spacelike) adm_fail.insert("H spacelike");
      if (!ar.nij_i_ok) adm_fail.insert("[V,H] has no V part");
      if (!ar.nij_ii_ok) adm_fail.insert("J S_k = S_t");
      if (!ar.t_gradient_ok) adm_fail.insert("t = ell grad tau");
      if (!ar.gkt_ok) adm_fail.insert("g(k,t) vertical gradient");
      if (!ar.gkk_ok) adm_fail.insert("g(k,k) vertical gradient");
      if (!ar.admissible) worst = std::max(worst, tol);
      adm.add(worst);
      integ.add(nijenhuis_max(S.J) / (1.0 + S.J.max_abs()));

      if (!standard) {
        p_null.add(std::max(std::fabs(inner(S.g, S.k, S.k).value()), std::fabs(inner(S.g, S.t, S.t).value())));
        const OpticsJets om = optics_jets(S.g, S.Gamma, S.t, S.frame);
        p_shear.add(std::max({std::fabs(K.opt.sigma1.value()), std::fabs(K.opt.sigma2.value()),
                              std::fabs(om.sigma1.value()), std::fabs(om.sigma2.value())}));
        p_geo.add(max_abs(covariant_derivative(S.Gamma, S.k, S.k)));
        p_pre.add(pregeodesic_factor(S.Gamma, S.t).residual);
        const double gpm = inner(S.g, S.k, S.t).value();
        p_neg.add(gpm < 0.0 ? 0.0 : 1.0 + gpm);
        const Jet p_ = reciprocal(sqrt(-inner(S.g, S.k, S.t)));
        p_vert.add(h_gradient_residual(S, s.f(*pr.u) / p_));
        p_kn.add(kerr_nut_residual(S));
      }

      if (standard && ar.t_gradient_ok && lie_derivative_metric(S.g, S.k).max_abs() < tol) {
        // Killing k: lhs2 = f'G/ell + f d_t(g(k,k)).
        const double dt_p = derivative_along(S.t, inner(S.g, S.k, S.k)).value();
        lik.add(std::fabs(K.fprime * S.frame.G.value() / K.ell.value() + K.f * dt_p - K.lhs2));
      }

      if (!K.in_region) continue;
      ++in_region;
      const KahlerVerification v = verify_kahler(K, tol);
      k_closed.add(v.closed);
      k_jc.add(v.j_compat);
      k_sym.add(v.symmetric);
      k_pos.add(v.min_eig);
      k_nij.add(v.nijenhuis);
      k_nab.add(v.nabla_J);

      if (!standard) continue;
      t_shear.add(shear_transfer(K).max_diff);

      const std::string gf = detail::geo_geo_failure(K, tol);
      const bool f_affine = s.f.kind == ParamFn::Kind::Affine;
      if (gf.empty() && f_affine) {
        const TransferGeodesic tg = transfer_geodesic(K);
        t_geo.add(std::max({tg.k_geodesic, tg.t_geodesic, tg.k_constant}));
      } else if (geo_skip.empty()) {
        geo_skip = gf.empty() ? "f = tau - c" : gf;
      }
      if (gf.empty()) {
        const double eps = 0.1;
        const JetMat gbar = vertical_metric(pr.g, *pr.tau, eps);
        Primitives q = pr;
        q.g = gbar;
        const KahlerLocal Kb = kahler_local(q, s.f, s.kind, s.chart.orientation);
        v_vert.add(std::max(max_abs_diff(Kb.gK, K.gK), std::fabs(Kb.opt.iota.value() - K.opt.iota.value())));
      } else if (vert_skip.empty()) {
        vert_skip = gf;
      }

      const std::string kf = detail::killing_transfer_failure(K, tol);
      if (kf.empty()) {
        t_kill.add(transfer_killing(K));
        const PregeodesicResult pt = gk_pregeodesic(K, S.t, tol);
        t_pre.add(pt.residual);
      } else if (kill_skip.empty()) {
        kill_skip = kf;
      }

      const std::string rf = detail::repeat_failure(K, tol);
      if (rf.empty()) {
        const Primitives q = iterate_primitives(K, pr);
        const SplitLocal SK = make_split_local(q.g, q.k, q.t, s.chart.orientation);
        const AdmissibilityReport a2 = check_admissible(SK, &*q.tau, tol);
        double w = std::max({a2.nij_i, a2.nij_ii, a2.t_gradient, a2.gkt_h_gradient, a2.gkk_h_gradient});
        if (!a2.admissible) w = std::max(w, tol);
        t_rep.add(w);
      } else if (rep_skip.empty()) {
        rep_skip = rf;
      }

      if (s.beta) {
        const Jet beta = eval_jet(*s.beta, seeds(p, 2));
        Primitives q = pr;
        q.g = biconformal_metric(pr.g, pr.k, pr.t, beta, s.chart.orientation);
        const KahlerLocal Kb = kahler_local(q, s.f, s.kind, s.chart.orientation);
        const double b2 = beta.value() * beta.value();
        v_bic.add(std::max(max_abs_diff(Kb.gK, K.gK), std::fabs(Kb.opt.iota.value() - K.opt.iota.value() / b2)));
      }
    } catch (const std::exception& ex) {
      adm.error(si, ex.what());
    }
  }

  if (!adm_fail.empty()) {
    std::string n = "failing:";
    for (const auto& f : adm_fail) n += " " + f + ";";
    n.pop_back();
    adm.note(n);
  }
  out.push_back(adm.done());
  out.push_back(integ.done());
  if (!standard)
    for (Acc* a : {&p_null, &p_shear, &p_geo, &p_pre, &p_neg, &p_vert, &p_kn}) out.push_back(a->done());

  {
    Check c = detail::info_check("region", static_cast<double>(in_region));
    c.samples = rep.samples;
    c.note = std::to_string(in_region) + " of " + std::to_string(rep.samples) + " samples in the Kahler region";
    out.push_back(c);
  }
  if (in_region == 0) {
    for (const char* n : {"kahler:closed", "kahler:j_compatible", "kahler:symmetric", "kahler:positive",
                          "kahler:nijenhuis", "kahler:nabla_J"})
      out.push_back(detail::skipped(n, "no samples in the Kahler region"));
  } else {
    for (Acc* a : {&k_closed, &k_jc, &k_sym, &k_pos, &k_nij, &k_nab}) out.push_back(a->done());
  }
  auto gated = [&](Acc& a, const std::string& name, const std::string& why) {
    Check c = a.done();
    if (c.samples == 0) out.push_back(detail::skipped(name, why.empty() ? "no samples in the Kahler region" : "hypothesis not met: " + why));
    else out.push_back(c);
  };
  if (standard) {
    gated(lik, "region:killing_specialization", "k Killing and t = ell grad tau");
    gated(t_shear, "transfer:shear", "");
    gated(t_geo, "transfer:geodesic", geo_skip);
    gated(t_kill, "transfer:killing", kill_skip);
    gated(t_pre, "transfer:t_pregeodesic", kill_skip);
    gated(t_rep, "transfer:repeated_admissibility", rep_skip);
    gated(v_vert, "variation:vertical", vert_skip);
    gated(v_bic, "variation:biconformal", s.beta ? "" : "no beta for this entry");
  }

  detail::apply_expected_negative(s, out);
  detail::filter_checks(cfg, out);
  return rep;
}

// ---------------------------------------------------------------------------
// region

inline Report run_region(const RunConfig& cfg, const SpacetimeSpec& s) {
  std::vector<Point> pts;
  Report rep = detail::start_report(cfg, s, pts);
  rep.columns = s.chart.coords;
  for (const char* c : {"lhs1", "lhs2", "in_region"}) rep.columns.push_back(c);
  detail::Acc eval("region:evaluation", 0.5);
  int inside = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    try {
      const RegionVerdict v = region_predicate(s.candidate(), pts[i], s.chart.orientation);
      std::vector<double> row = pts[i];
      row.push_back(v.lhs1);
      row.push_back(v.lhs2);
      row.push_back(v.in_region ? 1.0 : 0.0);
      rep.rows.push_back(row);
      inside += v.in_region;
      eval.add(0.0);
    } catch (const std::exception& ex) {
      eval.error(static_cast<int>(i), ex.what());
    }
  }
  rep.checks.push_back(eval.done());
  Check c = detail::info_check("region", static_cast<double>(inside));
  c.samples = rep.samples;
  c.note = std::to_string(inside) + " of " + std::to_string(rep.samples) + " samples in the Kahler region";
  rep.checks.push_back(c);
  detail::filter_checks(cfg, rep.checks);
  return rep;
}

// ---------------------------------------------------------------------------
// curvature

inline Report run_curvature(const RunConfig& cfg, const SpacetimeSpec& s) {
  std::vector<Point> pts;
  Report rep = detail::start_report(cfg, s, pts);
  if (s.kind != Construction::Standard) {
    rep.refused = true;
    rep.reason = "curvature formulas need the standard construction with a tau function";
    return rep;
  }
  if (cfg.curvature_case != "auto" && cfg.curvature_case != "geodesic" && cfg.curvature_case != "killing")
    throw ConfigError("--case must be auto, geodesic or killing");
  const double tol = cfg.tol;
  const Candidate cand = s.candidate();

  std::vector<std::pair<Point, KahlerLocal>> locals;
  for (const auto& p : pts) {
    try {
      KahlerLocal K = kahler_local(eval_primitives(cand, p, 3), s.f, s.kind, s.chart.orientation);
      if (K.in_region) locals.emplace_back(p, std::move(K));
    } catch (const std::exception&) {
    }
  }
  if (locals.empty()) {
    rep.refused = true;
    rep.reason = "no samples in the Kahler region";
    return rep;
  }

  // Case selection from the hypotheses at every region sample.
  std::optional<CurvatureCase> cc;
  std::string fail_geo, fail_kill;
  for (const auto& [p, K] : locals) {
    const CurvatureHypotheses h = curvature_hypotheses(K, &K.tau, tol);
    if (fail_geo.empty()) fail_geo = h.first_failure(CurvatureCase::Geodesic, tol);
    if (fail_kill.empty()) fail_kill = h.first_failure(CurvatureCase::Killing, tol);
  }
  if (cfg.curvature_case == "geodesic") {
    if (!fail_geo.empty()) {
      rep.refused = true;
      rep.reason = "geodesic-case hypothesis failed: " + fail_geo;
      return rep;
    }
    cc = CurvatureCase::Geodesic;
  } else if (cfg.curvature_case == "killing") {
    if (!fail_kill.empty()) {
      rep.refused = true;
      rep.reason = "Killing-case hypothesis failed: " + fail_kill;
      return rep;
    }
    cc = CurvatureCase::Killing;
  } else if (fail_geo.empty()) {
    cc = CurvatureCase::Geodesic;
  } else if (fail_kill.empty()) {
    cc = CurvatureCase::Killing;
  }

  rep.columns = s.chart.coords;
  for (const char* c : {"scalar_formula", "scalar_oracle", "scalar_trace", "discrepancy", "ricci_discrepancy",
                        "max_riemann"})
    rep.columns.push_back(c);
  detail::Acc disc("curvature:scalar", 1e-4), ric("curvature:ricci_form", 1e-4), half("curvature:half_trace", 1e-6),
      vol("curvature:volume", 1e-9), jinv("curvature:ricci_J_invariant", 1e-6);
  double max_scalar = 0.0;
  for (const auto& [p, K] : locals) {
    const Jet rb = s.r_base ? eval_jet(*s.r_base, seeds(p, 3)) : Jet::constant(1.0);
    CurvatureResult R;
    if (cc) {
      R = kahler_curvature(K, s.f, rb, *cc);
    } else {
      // Oracle only.
      const Curvature C = curvature(K.gK);
      R.scalar_trace = C.scalar;
      R.scalar_oracle = 0.5 * C.scalar;
      R.max_riemann = C.max_riemann_lowered;
      R.scalar_formula = std::numeric_limits<double>::quiet_NaN();
      R.discrepancy = std::numeric_limits<double>::quiet_NaN();
      R.ricci_discrepancy = std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<double> row = p;
    for (double v : {R.scalar_formula, R.scalar_oracle, R.scalar_trace, R.discrepancy, R.ricci_discrepancy,
                     R.max_riemann})
      row.push_back(v);
    rep.rows.push_back(row);
    max_scalar = std::max(max_scalar, std::fabs(R.scalar_trace));
    if (!cc) continue;
    disc.add(R.discrepancy);
    double rmax = 0.0;
    for (const auto& r : R.ricci_form_oracle)
      for (double v : r) rmax = std::max(rmax, std::fabs(v));
    ric.add(R.ricci_discrepancy / (1.0 + rmax));
    half.add(std::fabs(R.scalar_oracle - 0.5 * R.scalar_trace) / (1.0 + std::fabs(R.scalar_trace)));
    vol.add(R.volume_check);
    // rho(J., J.) = rho
    double jr = 0.0;
    const JetMat J0 = truncated(K.S.J, 0);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double v = 0.0;
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) v += J0(c, a).value() * J0(d, b).value() * R.ricci_form[c][d];
        jr = std::max(jr, std::fabs(v - R.ricci_form[a][b]));
      }
    jinv.add(jr);
  }
  if (cc) {
    for (detail::Acc* a : {&disc, &ric, &half, &vol, &jinv}) {
      Check c = a->done();
      c.note = *cc == CurvatureCase::Geodesic ? "geodesic case" : "Killing case";
      rep.checks.push_back(c);
    }
  } else {
    rep.checks.push_back(detail::skipped("curvature:scalar", "no formula applies (geodesic: " + fail_geo +
                                                                 "; Killing: " + fail_kill + "), oracle only"));
    Check c = detail::info_check("curvature:oracle", max_scalar);
    c.samples = static_cast<int>(locals.size());
    c.note = "max |scalar curvature of g_K| over region samples";
    rep.checks.push_back(c);
  }
  detail::filter_checks(cfg, rep.checks);
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

inline nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::ordered_json to_json(const Report& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = kSchema;
  j["engine"] = kEngineVersion;
  j["command"] = r.config.command;
  ordered_json cfg;
  if (!r.config.spec_path.empty()) cfg["spec"] = r.config.spec_path;
  cfg["entry"] = r.entry;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  cfg["params"] = params;
  cfg["samples_requested"] = r.config.samples;
  cfg["tol"] = r.config.tol;
  cfg["fd_tol"] = r.config.fd_tol;
  if (r.config.f) cfg["f"] = *r.config.f;
  if (r.config.orientation) cfg["orientation"] = *r.config.orientation;
  if (!r.config.box.empty()) {
    ordered_json box = ordered_json::object();
    for (const auto& [c, iv] : r.config.box) box[c] = ordered_json::array({iv.lo, iv.hi});
    cfg["box"] = box;
  }
  if (!r.config.checks.empty()) cfg["checks"] = r.config.checks;
  if (r.config.command == "curvature") cfg["case"] = r.config.curvature_case;
  j["config"] = cfg;
  j["samples"] = r.samples;
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks) {
    ordered_json o;
    o["name"] = c.name;
    o["max_residual"] = number(c.residual);
    o["tolerance"] = number(c.tol);
    o["pass"] = c.pass;
    o["skipped"] = c.skipped;
    o["expected_negative"] = c.expected_negative;
    o["samples"] = c.samples;
    o["note"] = c.note;
    checks.push_back(o);
  }
  j["checks"] = checks;
  if (!r.columns.empty()) {
    j["columns"] = r.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) {
      ordered_json a = ordered_json::array();
      for (double v : row) a.push_back(number(v));
      rows.push_back(a);
    }
    j["rows"] = rows;
  }
  if (r.refused) j["reason"] = r.reason;
  j["verdict"] = r.verdict();
  return j;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string fmt17(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const Report& r) {
  std::ostringstream o;
  if (!r.columns.empty()) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) o << (i ? "," : "") << csv_field(r.columns[i]);
    o << "\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) o << (i ? "," : "") << fmt17(row[i]);
      o << "\n";
    }
    return o.str();
  }
  o << "name,max_residual,tolerance,pass,skipped,expected_negative,samples,note\n";
  for (const auto& c : r.checks)
    o << csv_field(c.name) << "," << fmt17(c.residual) << "," << fmt17(c.tol) << "," << (c.pass ? "true" : "false")
      << "," << (c.skipped ? "true" : "false") << "," << (c.expected_negative ? "true" : "false") << "," << c.samples
      << "," << csv_field(c.note) << "\n";
  return o.str();
}

inline std::string to_text(const Report& r) {
  std::ostringstream o;
  o << r.config.command << " " << r.entry << "  (" << r.samples << " samples)\n";
  for (const auto& c : r.checks) {
    const char* tag = c.skipped ? "SKIP" : (c.pass ? "PASS" : "FAIL");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", c.residual);
    o << tag << "  " << c.name << "  max=" << buf;
    std::snprintf(buf, sizeof buf, "%.3g", c.tol);
    o << "  tol=" << buf;
    if (c.expected_negative) o << "  [expected negative]";
    if (!c.note.empty()) o << "  " << c.note;
    o << "\n";
  }
  if (!r.columns.empty()) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) o << (i ? "\t" : "") << r.columns[i];
    o << "\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", row[i]);
        o << (i ? "\t" : "") << buf;
      }
      o << "\n";
    }
  }
  if (r.refused) o << "refused: " << r.reason << "\n";
  o << "verdict: " << r.verdict() << "\n";
  return o.str();
}

inline std::string render(const Report& r, const std::string& format) {
  if (format == "json") return to_json(r).dump(2) + "\n";
  if (format == "csv") return to_csv(r);
  if (format == "text") return to_text(r);
  throw ConfigError("unknown format '" + format + "'");
}

inline std::string render_list(const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& it : catalog()) arr.push_back({{"id", it.id}, {"description", it.description}});
    j["entries"] = arr;
    return j.dump(2) + "\n";
  }
  std::ostringstream o;
  if (format == "csv") {
    o << "id,description\n";
    for (const auto& it : catalog()) o << csv_field(it.id) << "," << csv_field(it.description) << "\n";
  } else if (format == "text") {
    for (const auto& it : catalog()) o << it.id << "  " << it.description << "\n";
  } else {
    throw ConfigError("unknown format '" + format + "'");
  }
  return o.str();
}

// Runs one configured command and returns the rendered report plus exit code.
struct Outcome {
  std::string output;
  int exit_code = kPass;
  std::string error;
};

inline Outcome run(const RunConfig& cfg) {
  Outcome out;
  try {
    if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "text")
      throw ConfigError("unknown format '" + cfg.format + "'");
    if (cfg.command == "list") {
      out.output = render_list(cfg.format);
      return out;
    }
    const SpacetimeSpec s = load_spec(cfg);
    Report r;
    if (cfg.command == "verify" || cfg.command == "custom") r = run_verify(cfg, s);
    else if (cfg.command == "region") r = run_region(cfg, s);
    else if (cfg.command == "curvature") r = run_curvature(cfg, s);
    else throw ConfigError("unknown command '" + cfg.command + "'");
    out.output = render(r, cfg.format);
    out.exit_code = r.exit_code();
    if (r.refused) out.error = "refused: " + r.reason;
  } catch (const ConfigError& e) {
    out.exit_code = kConfig;
    out.error = e.what();
  } catch (const ExprError& e) {
    out.exit_code = kConfig;
    out.error = e.what();
  }
  return out;
}

}  // namespace geokahler::cli
