#include <gtest/gtest.h>

#include <cmath>

#include "fd.hpp"
#include "geokahler/kahler.hpp"
#include "helpers.hpp"

using namespace geokahler;

namespace {

KahlerLocal local(const SpacetimeSpec& s, const Point& p, int order = 3) {
  return kahler_local(eval_primitives(s.candidate(), p, order), s.f, s.kind, s.chart.orientation);
}

// phi * g(k, .) evaluated in plain doubles.
double alpha_component(const SpacetimeSpec& s, const Point& q, int j) {
  const int n = s.chart.dim();
  double phi = 0.0;
  if (s.kind == Construction::Standard) {
    phi = s.f(s.tau->e.eval(q));
  } else {
    double gkt = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) gkt += s.g.g[a][b].eval(q) * s.k.c[a].eval(q) * s.t.c[b].eval(q);
    phi = s.f(s.potential->e.eval(q)) / std::sqrt(-gkt);
  }
  double kj = 0.0;
  for (int a = 0; a < n; ++a) kj += s.g.g[j][a].eval(q) * s.k.c[a].eval(q);
  return phi * kj;
}

double omega_fd(const SpacetimeSpec& s, const Point& p, int i, int j) {
  auto aj = [&](const Point& q) { return alpha_component(s, q, j); };
  auto ai = [&](const Point& q) { return alpha_component(s, q, i); };
  return fd::d1(aj, p, i) - fd::d1(ai, p, j);
}

std::vector<Point> region_samples(const SpacetimeSpec& s, int n) {
  std::vector<Point> out;
  for (const auto& p : testutil::samples(s, n))
    if (region_predicate(s.candidate(), p, s.chart.orientation).in_region) out.push_back(p);
  return out;
}

}  // namespace

TEST(ParamFn, ParseAndDerivatives) {
  const ParamFn a = ParamFn::parse("affine:2");
  EXPECT_EQ(a.kind, ParamFn::Kind::Affine);
  EXPECT_EQ(a.derivs(3.5), (std::array<double, 4>{1.5, 1.0, 0.0, 0.0}));
  const ParamFn e = ParamFn::parse("exp");
  EXPECT_DOUBLE_EQ(e.derivs(0.5)[3], std::exp(0.5));
  const ParamFn c = ParamFn::parse("expr:tau^3 + k*tau", {{"k", 2.0}});
  EXPECT_EQ(c.derivs(2.0), (std::array<double, 4>{12.0, 14.0, 12.0, 6.0}));
  EXPECT_EQ(ParamFn::parse("affine:2*m", {{"m", 1.5}}).c, 3.0);
  EXPECT_THROW(ParamFn::parse("cubic"), std::invalid_argument);
  EXPECT_THROW(ParamFn::parse("expr:tau + z"), ExprError);
  EXPECT_EQ(ParamFn::parse(a.source).c, 2.0);
}

TEST(ParamFn, JetCompositionMatchesChainRule) {
  const ParamFn f = ParamFn::parse("expr:sinh(tau)");
  const auto s = seeds({0.3, 0.8}, 3);
  const Jet tau = s[0] * s[1];
  const Jet viaF = f(tau), direct = sinh(tau);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(viaF.d(i, j, k), direct.d(i, j, k), 1e-13);
  const Jet fp = f.derivative(tau), ref = cosh(tau);
  EXPECT_NEAR(fp.d(0, 1), ref.d(0, 1), 1e-13);
}

TEST(Kahler, SymplecticFormMatchesFiniteDifferenceOracle) {
  for (const std::string id : {"skr", "lie_group", "plane_wave", "nut", "kerr", "conformal_kerr"}) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 5)) {
      const KahlerLocal K = local(s, p, 2);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_LT(fd::rel(K.omega(i, j).value(), omega_fd(s, p, i, j)), 1e-7) << id;
    }
  }
}

TEST(Kahler, SkrMetricIsReproduced) {
  const SpacetimeSpec s = make_entry("skr");
  ASSERT_TRUE(s.reference.has_value());
  for (const auto& p : testutil::samples(s, 100)) {
    const KahlerLocal K = local(s, p, 2);
    const JetMat ref = eval_jet(*s.reference, p, 0);
    EXPECT_LT(max_abs_diff(K.gK, ref), 1e-7);
    const double Q = p[0] * p[0] + 1.0;
    EXPECT_NEAR(K.ell.value(), 1.0 / Q, 1e-8);  // -q/Q with q = -1
  }
}

TEST(Kahler, VerificationOnRegionSamples) {
  for (const auto& id : testutil::catalog_ids()) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : region_samples(s, 30)) {
      const KahlerVerification v = verify_kahler(local(s, p));
      EXPECT_LT(v.closed, 1e-8) << id;
      EXPECT_LT(v.j_compat, 1e-9) << id;
      EXPECT_LT(v.symmetric, 1e-9) << id;
      EXPECT_GT(v.min_eig, 0.0) << id;
      EXPECT_LT(v.nijenhuis, 1e-7) << id;
      EXPECT_LT(v.nabla_J, 1e-5) << id;
    }
  }
}

TEST(Kahler, BlockStructureOnAdmissibleEntries) {
  for (const std::string id : {"skr", "de_sitter", "lie_group", "pp_truncated", "plane_wave"}) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : region_samples(s, 20)) {
      const KahlerLocal K = local(s, p, 2);
      const JetMat om = truncated(K.omega, 0);
      for (const JetVec* v : {&K.S.k, &K.S.t})
        for (const JetVec* h : {&K.S.frame.x, &K.S.frame.y}) {
          double w = 0.0;
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) w += om(i, j).value() * (*v)[i].value() * (*h)[j].value();
          EXPECT_LT(std::fabs(w), 1e-9) << id;
        }
    }
  }
}

TEST(Region, KnownShapes) {
  const SpacetimeSpec mk = make_entry("minkowski");
  EXPECT_TRUE(region_samples(mk, 50).empty());
  const SpacetimeSpec nut = make_entry("nut");
  EXPECT_EQ(region_samples(nut, 100).size(), testutil::samples(nut, 100).size());
  const SpacetimeSpec pw = make_entry("plane_wave");
  EXPECT_EQ(region_samples(pw, 50).size(), testutil::samples(pw, 50).size());

  // Kerr: twist 2a cos(theta)/rho^2 has the sign of cos(theta).
  SpacetimeSpec kerr = make_entry("kerr");
  kerr.box[2] = {0.1, std::numbers::pi / 2 - 0.1};
  EXPECT_TRUE(region_samples(kerr, 30).empty());
}

TEST(Region, WarpedLhsMatchesClosedForm) {
  // de Sitter with f = e^t: lhs1 = f iota = -2 e^t / w.
  const SpacetimeSpec s = make_entry("de_sitter");
  for (const auto& p : testutil::samples(s, 20)) {
    const RegionVerdict v = region_predicate(s.candidate(), p, 1);
    const double w = 4.0 * std::pow(std::cosh(p[0] / 2.0), 2);
    EXPECT_NEAR(v.lhs1, -2.0 * std::exp(p[0]) / w, 1e-9);
    EXPECT_LT(v.lhs2, 0.0);
  }
}

TEST(Transfer, GeodesicKillingAndShear) {
  SpacetimeSpec hopf = make_entry("direct_product_hopf");
  hopf.f = ParamFn::affine(0.0);
  for (const auto& p : region_samples(hopf, 20)) {
    const TransferGeodesic r = transfer_geodesic(local(hopf, p));
    EXPECT_LT(r.k_geodesic, 1e-7);
    EXPECT_LT(r.k_constant, 1e-7);
  }
  const SpacetimeSpec skr = make_entry("skr");
  for (const auto& p : region_samples(skr, 20)) EXPECT_LT(transfer_killing(local(skr, p)), 1e-7);
  const SpacetimeSpec lie = make_entry("lie_group");
  for (const auto& p : region_samples(lie, 20)) {
    const ShearTransfer st = shear_transfer(local(lie, p));
    EXPECT_LT(st.max_diff, 1e-8);
    EXPECT_GT(std::fabs(st.g[1]), 0.1);
  }
}

TEST(Transfer, RepeatedConstructionStaysAdmissible) {
  const SpacetimeSpec s = make_entry("skr");
  for (const auto& p : region_samples(s, 10)) {
    const Primitives pr = eval_primitives(s.candidate(), p, 3);
    const KahlerLocal K = kahler_local(pr, s.f, s.kind, s.chart.orientation);
    const Primitives q = iterate_primitives(K, pr);
    const SplitLocal SK = make_split_local(q.g, q.k, q.t, s.chart.orientation);
    EXPECT_TRUE(check_admissible(SK, &*q.tau).admissible);
  }
}

TEST(Variation, VerticalAndBiconformalLeaveMetricFixed) {
  for (const std::string id : {"direct_product_hopf", "lie_group", "skr"}) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : region_samples(s, 10)) {
      const Primitives pr = eval_primitives(s.candidate(), p, 3);
      const KahlerLocal K = kahler_local(pr, s.f, s.kind, s.chart.orientation);
      Primitives q = pr;
      q.g = vertical_metric(pr.g, *pr.tau, 0.1);
      EXPECT_LT(max_abs_diff(K.gK, kahler_local(q, s.f, s.kind, s.chart.orientation).gK), 1e-8) << id;
      // twist unchanged
      EXPECT_NEAR(kahler_local(q, s.f, s.kind, s.chart.orientation).opt.iota.value(), K.opt.iota.value(), 1e-10);
    }
  }
  for (const std::string id : {"pp_truncated", "conformal_kerr"}) {
    const SpacetimeSpec s = make_entry(id);
    ASSERT_TRUE(s.beta.has_value());
    for (const auto& p : region_samples(s, 10)) {
      const Primitives pr = eval_primitives(s.candidate(), p, 3);
      const KahlerLocal K = kahler_local(pr, s.f, s.kind, s.chart.orientation);
      const Jet beta = eval_jet(*s.beta, seeds(p, 3));
      Primitives q = pr;
      q.g = biconformal_metric(pr.g, pr.k, pr.t, beta, s.chart.orientation);
      const KahlerLocal K2 = kahler_local(q, s.f, s.kind, s.chart.orientation);
      EXPECT_LT(max_abs_diff(K.gK, K2.gK), 1e-8) << id;
      EXPECT_NEAR(K2.opt.iota.value(), K.opt.iota.value() / (beta.value() * beta.value()), 1e-9) << id;
    }
  }
}

TEST(Kahler, DirectProductWithExponentialIsFlat) {
  const SpacetimeSpec s = make_entry("direct_product_hopf");
  for (const auto& p : region_samples(s, 50)) EXPECT_LT(curvature(local(s, p).gK).max_riemann_lowered, 1e-5);
}
