#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "geokahler/optics.hpp"
#include "helpers.hpp"

using namespace geokahler;

namespace {

struct Local {
  JetMat g;
  Christoffel G;
  JetVec k, t;
  Frame fr;
};

Local local(const SpacetimeSpec& s, const Point& p, int orientation) {
  const auto sd = seeds(p, 2);
  Local L;
  L.g = eval_jet(s.g, sd);
  L.G = christoffel(L.g);
  L.k = eval_jet(s.k, sd);
  L.t = eval_jet(s.t, sd);
  L.fr = build_frame(L.g, {L.k, L.t}, orientation);
  return L;
}

Frame rotated(Frame fr, double a) {
  const JetVec x = fr.x, y = fr.y;
  fr.x = std::cos(a) * x + std::sin(a) * y;
  fr.y = -std::sin(a) * x + std::cos(a) * y;
  return fr;
}

}  // namespace

TEST(Frame, OrthonormalOrientedAndOrthogonalToV) {
  for (const auto& id : testutil::catalog_ids()) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 20)) {
      const Local L = local(s, p, s.chart.orientation);
      const auto ip = [&](const JetVec& a, const JetVec& b) { return inner(L.g, a, b).value(); };
      EXPECT_NEAR(ip(L.fr.x, L.fr.x), 1.0, 1e-12) << id;
      EXPECT_NEAR(ip(L.fr.y, L.fr.y), 1.0, 1e-12) << id;
      EXPECT_NEAR(ip(L.fr.x, L.fr.y), 0.0, 1e-12) << id;
      for (const JetVec* v : {&L.k, &L.t})
        for (const JetVec* h : {&L.fr.x, &L.fr.y}) EXPECT_NEAR(ip(*v, *h), 0.0, 1e-11) << id;
      const double det = determinant(columns({L.k, L.t, L.fr.x, L.fr.y})).value();
      EXPECT_EQ(det > 0 ? 1 : -1, s.chart.orientation) << id;
    }
  }
}

TEST(Frame, OppositeOrientationFlipsY) {
  const SpacetimeSpec s = make_entry("nut");
  const Point p = testutil::samples(s, 1)[0];
  const Local a = local(s, p, 1), b = local(s, p, -1);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.fr.x[i].value(), b.fr.x[i].value());
    EXPECT_EQ(a.fr.y[i].value(), -b.fr.y[i].value());
  }
}

TEST(Frame, MinkowskiNullPairGivesTransverseFrame) {
  const Symbols sym{{"t", "x", "y", "z"}, {}};
  const MetricField g = testutil::metric(sym, {{"-1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "0", "0", "1"}});
  const Frame fr = oriented_frame(g, testutil::vec(sym, {"1", "0", "0", "1"}), testutil::vec(sym, {"1", "0", "0", "-1"}),
                                  1, {0.1, 0.2, 0.3, 0.4});
  EXPECT_NEAR(fr.x[0].value(), 0.0, 1e-15);
  EXPECT_NEAR(fr.x[3].value(), 0.0, 1e-15);
  EXPECT_NEAR(fr.y[0].value(), 0.0, 1e-15);
  EXPECT_NEAR(fr.y[3].value(), 0.0, 1e-15);
  EXPECT_NEAR(fr.x[1].value(), 1.0, 1e-15);
  EXPECT_NEAR(std::fabs(fr.y[2].value()), 1.0, 1e-15);
  EXPECT_EQ(fr.pivots[0], 1);
  EXPECT_EQ(fr.pivots[1], 2);
}

TEST(Frame, DegenerateVIsRejected) {
  const SpacetimeSpec s = make_entry("skr");
  const Point p = testutil::samples(s, 1)[0];
  EXPECT_THROW(oriented_frame(s.g, s.k, s.k, 1, p), FrameError);
}

TEST(Frame, KerrFrameSpansE2E3) {
  const SpacetimeSpec s = make_entry("kerr");
  for (const auto& p : testutil::samples(s, 20)) {
    const Local L = local(s, p, 1);
    const JetVec e2 = eval_jet(s.field("E2"), p, 1), e3 = eval_jet(s.field("E3"), p, 1);
    for (const JetVec* h : {&L.fr.x, &L.fr.y}) {
      const double a = inner(L.g, *h, e2).value(), b = inner(L.g, *h, e3).value();
      const JetVec res = *h - (a * e2 + b * e3);
      EXPECT_LT(max_abs(res), 1e-9);
    }
  }
}

TEST(Optics, CovariantAndBracketFormsAgree) {
  for (const auto& id : testutil::catalog_ids()) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 20)) {
      const Local L = local(s, p, s.chart.orientation);
      for (const JetVec* X : {&L.k, &L.t}) {
        const OpticsJets a = optics_jets(L.g, L.G, *X, L.fr);
        const OpticsJets b = optics_jets_bracket(L.g, *X, L.fr);
        EXPECT_NEAR(a.sigma1.value(), b.sigma1.value(), 1e-9) << id;
        EXPECT_NEAR(a.sigma2.value(), b.sigma2.value(), 1e-9) << id;
        EXPECT_NEAR(a.iota.value(), b.iota.value(), 1e-9) << id;
      }
    }
  }
}

TEST(Optics, FrameRotationInvariants) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  for (const std::string id : {"lie_group", "kerr", "pp_truncated", "conformal_kerr"}) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 5)) {
      const Local L = local(s, p, s.chart.orientation);
      const OpticalScalars base = optical_scalars(optics_jets(L.g, L.G, L.k, L.fr));
      for (int i = 0; i < 10; ++i) {
        const double a = ang(rng);
        const OpticalScalars r = optical_scalars(optics_jets(L.g, L.G, L.k, rotated(L.fr, a)));
        EXPECT_NEAR(r.twist_function, base.twist_function, 1e-10);
        EXPECT_NEAR(r.iota, base.iota, 1e-10);
        EXPECT_NEAR(r.shear_invariant, base.shear_invariant, 1e-10);
        // shear rotates by twice the angle
        EXPECT_NEAR(r.sigma1, std::cos(2 * a) * base.sigma1 - std::sin(2 * a) * base.sigma2, 1e-10);
      }
      Frame flipped = L.fr;
      flipped.y = -1.0 * flipped.y;
      const OpticalScalars f = optical_scalars(optics_jets(L.g, L.G, L.k, flipped));
      EXPECT_NEAR(f.iota, -base.iota, 1e-12);
      EXPECT_NEAR(f.twist_function, base.twist_function, 1e-12);
    }
  }
}

TEST(Optics, ReportInvariants) {
  const SpacetimeSpec s = make_entry("lie_group");
  for (const auto& p : testutil::samples(s, 10)) {
    const OpticalScalars o = shear_twist(s.g, s.k, s.t, s.k, 1, p);
    const auto& S = o.shear_matrix;
    EXPECT_EQ(S[0][0] + S[1][1], 0.0);
    EXPECT_EQ(S[0][1], S[1][0]);
    EXPECT_EQ(o.twist_matrix[0][1], -o.twist_matrix[1][0]);
    EXPECT_NEAR(std::fabs(o.twist_matrix[0][1]), std::fabs(o.iota) / 2, 1e-15);
    EXPECT_NEAR(o.twist_function, std::fabs(o.iota), 1e-12);
    EXPECT_NEAR(o.shear_invariant, -(S[0][0] * S[1][1] - S[0][1] * S[1][0]), 1e-12);
  }
}

TEST(Optics, GradientFieldIsTwistFree) {
  for (const std::string id : {"skr", "skr_const_p", "de_sitter", "conformal_kerr", "plane_wave", "lie_group"}) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 10))
      EXPECT_LT(std::fabs(shear_twist(s.g, s.k, s.t, s.t, s.chart.orientation, p).iota), 1e-9) << id;
  }
}

TEST(Optics, KerrAndNutTwist) {
  const SpacetimeSpec kerr = make_entry("kerr");
  const double a = 2.0;
  for (const auto& p : testutil::samples(kerr, 20)) {
    const double r = p[1], th = p[2], rho2 = r * r + a * a * std::cos(th) * std::cos(th);
    EXPECT_NEAR(shear_twist(kerr.g, kerr.k, kerr.t, kerr.k, 1, p).iota, 2 * a * std::cos(th) / rho2, 1e-9);
  }
  const SpacetimeSpec nut = make_entry("nut");
  const int ri = nut.chart.index_of("r");
  for (const auto& p : testutil::samples(nut, 20)) {
    const double r = p[ri];
    EXPECT_NEAR(shear_twist(nut.g, nut.k, nut.t, nut.k, 1, p).iota, -2.0 / (r * r + 1.0), 1e-9);
  }
}

TEST(Optics, LieGroupTwistFunctionIsAbsR) {
  for (double r : {-1.0, -0.5, 2.0}) {
    const SpacetimeSpec s = make_entry("lie_group", {{"r", r}});
    for (const auto& p : testutil::samples(s, 5))
      EXPECT_NEAR(shear_twist(s.g, s.k, s.t, s.k, 1, p).twist_function, std::fabs(r), 1e-9);
  }
}

TEST(Optics, PlaneWaveTwistAndShear) {
  const SpacetimeSpec s = make_entry("plane_wave");
  for (const auto& p : testutil::samples(s, 10)) {
    const OpticalScalars o = shear_twist(s.g, s.k, s.t, s.k, s.chart.orientation, p);
    EXPECT_NEAR(o.iota, -2.0, 1e-12);
    EXPECT_LT(o.shear_invariant, 1e-18);
  }
}

TEST(Optics, PregeodesicFactors) {
  const SpacetimeSpec ds = make_entry("de_sitter");
  for (const auto& p : testutil::samples(ds, 10)) {
    const auto o = shear_twist(ds.g, ds.k, ds.t, ds.k, 1, p);
    ASSERT_TRUE(o.alpha.has_value());
    EXPECT_NEAR(*o.alpha, std::tanh(p[0] / 2.0), 1e-9);  // w'/w for w = r^2 cosh^2(t/r), r = 2
  }
  const SpacetimeSpec ck = make_entry("conformal_kerr");
  for (const auto& p : testutil::samples(ck, 10)) {
    const double r = p[1], th = p[2], D = r * r - 2 * r + 4, rho2 = r * r + 4 * std::cos(th) * std::cos(th);
    const auto o = shear_twist(ck.g, ck.k, ck.t, ck.k, ck.chart.orientation, p);
    ASSERT_TRUE(o.alpha.has_value());
    EXPECT_NEAR(*o.alpha, 2 * ((r - 1) / D - r / rho2), 1e-8);
  }
  const SpacetimeSpec kerr = make_entry("kerr");
  for (const auto& p : testutil::samples(kerr, 10)) {
    const auto o = shear_twist(kerr.g, kerr.k, kerr.t, kerr.k, 1, p);
    ASSERT_TRUE(o.alpha.has_value());
    EXPECT_NEAR(*o.alpha, 0.0, 1e-9);
  }
  const SpacetimeSpec lie = make_entry("lie_group");
  const auto o = shear_twist(lie.g, lie.k, lie.t, lie.k, 1, testutil::samples(lie, 1)[0]);
  EXPECT_FALSE(o.alpha.has_value());
}

TEST(Optics, HopfFieldOnRoundSphere) {
  const MetricField g = detail::round_s3_metric("1/4");
  VectorField kbar;
  kbar.c = {Expr::constant(0.0), Expr::constant(2.0), Expr::constant(0.0)};
  for (double th : {0.4, 1.2, 2.5}) {
    const Riemannian3Optics o = riemannian3_optics(g, kbar, 1, {th, 0.3, 1.9});
    EXPECT_LT(o.unit_residual, 1e-12);
    EXPECT_LT(o.killing_residual, 1e-9);
    EXPECT_LT(o.geodesic_residual, 1e-9);
    EXPECT_LT(std::sqrt(o.scalars.shear_invariant), 1e-9);
    EXPECT_NEAR(o.scalars.iota * o.scalars.iota, 2.0 * o.ric_kk, 1e-8);
    EXPECT_NEAR(o.ric_kk, 2.0, 1e-10);  // unit S^3: Ric = 2 gbar
  }
}

TEST(Optics, ConformalChangePreservesTwistAndShear) {
  const SpacetimeSpec s = make_entry("lie_group");
  const Symbols sym = s.symbols();
  for (const std::string beta : {"3", "1", "1 + 0.2*sin(s1*v2) + 0.1*s2^2"}) {
    const ScalarField b{Expr::parse(beta, sym)};
    for (const auto& p : testutil::samples(s, 5)) {
      const ConformalComparison c = conformal_invariance(s.g, s.k, s.t, s.k, b, 1, p);
      EXPECT_LT(c.twist_residual, 1e-10) << beta;
      EXPECT_LT(c.shear_residual, 1e-10) << beta;
      EXPECT_GT(c.original.shear_invariant, 0.1);  // nonzero-shear case
    }
  }
  const SpacetimeSpec kerr = make_entry("kerr");
  const ScalarField b{kerr.parse("sqrt((r^2 - 2*m*r + a^2)/(r^2 + a^2*cos(theta)^2))")};
  for (const auto& p : testutil::samples(kerr, 5))
    EXPECT_LT(conformal_invariance(kerr.g, kerr.k, kerr.t, kerr.k, b, 1, p).twist_residual, 1e-10);
}
