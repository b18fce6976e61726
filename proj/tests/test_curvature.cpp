#include <gtest/gtest.h>

#include <cmath>

#include "geokahler/curvature_kahler.hpp"
#include "helpers.hpp"

using namespace geokahler;

namespace {

struct Prepared {
  KahlerLocal K;
  Jet r_base;
};

Prepared setup(const SpacetimeSpec& s, const Point& p) {
  const Primitives pr = eval_primitives(s.candidate(), p, 3);
  Prepared st{kahler_local(pr, s.f, s.kind, s.chart.orientation), Jet(1.0, 4, 3)};
  if (s.r_base) st.r_base = eval_jet(*s.r_base, seeds(p, 3));
  return st;
}

}  // namespace

TEST(Curvature, JOnFormConvention) {
  const SpacetimeSpec s = make_entry("skr");
  const Prepared st = setup(s, testutil::samples(s, 1)[0]);
  const JetMat& J = st.K.S.J;
  const JetVec alpha = differential(eval_jet(*s.tau, seeds(testutil::samples(s, 1)[0], 2)), 4);
  const JetVec Ja = J_on_form(J, alpha);
  for (int i = 0; i < 4; ++i) {
    const JetVec e = coordinate_field(i, 4);
    EXPECT_NEAR(pair(Ja, e).value(), -pair(alpha, apply(J, e)).value(), 1e-14);
  }
  // J applied twice to a 1-form is -1.
  const JetVec JJa = J_on_form(J, Ja);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(JJa[i].value(), -alpha[i].value(), 1e-12);
}

TEST(Curvature, FrozenSkrScalarCurvature) {
  // g_S at (1.3, 0.7, 0.2, -0.4) with Q = tau^2 + 1, c = 0: scalar curvature -6,
  // computed symbolically from the closed-form metric.
  const SpacetimeSpec s = make_entry("skr");
  const Prepared st = setup(s, {1.3, 0.7, 0.2, -0.4});
  const CurvatureResult R = kahler_curvature(st.K, s.f, st.r_base, CurvatureCase::Killing);
  EXPECT_NEAR(R.scalar_trace, -6.0, 1e-6);
  EXPECT_NEAR(curvature(*s.reference, {1.3, 0.7, 0.2, -0.4}).scalar, -6.0, 1e-10);
}

TEST(Curvature, OracleIsHalfTraceAndVolumeConsistent) {
  for (const auto& [id, cc] : {std::pair{"skr", CurvatureCase::Killing}, {"skr_const_p", CurvatureCase::Geodesic}}) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 10)) {
      const Prepared st = setup(s, p);
      if (!st.K.in_region) continue;
      const CurvatureResult R = kahler_curvature(st.K, s.f, st.r_base, cc);
      EXPECT_NEAR(R.scalar_oracle, R.scalar_trace / 2.0, 1e-5 * (1 + std::fabs(R.scalar_trace))) << id;
      EXPECT_LT(R.volume_check, 1e-8) << id;
    }
  }
}

TEST(Curvature, HypothesesSelectCases) {
  const SpacetimeSpec killing = make_entry("skr");
  const SpacetimeSpec geodesic = make_entry("skr_const_p");
  for (const auto& p : testutil::samples(killing, 10)) {
    const Prepared st = setup(killing, p);
    const CurvatureHypotheses h = curvature_hypotheses(st.K, &st.K.tau);
    EXPECT_TRUE(h.killing_case(1e-7)) << h.first_failure(CurvatureCase::Killing, 1e-7);
    EXPECT_FALSE(h.geodesic_case(1e-7));
    EXPECT_FALSE(h.first_failure(CurvatureCase::Geodesic, 1e-7).empty());
  }
  for (const auto& p : testutil::samples(geodesic, 10)) {
    const Prepared st = setup(geodesic, p);
    const CurvatureHypotheses h = curvature_hypotheses(st.K, &st.K.tau);
    EXPECT_TRUE(h.geodesic_case(1e-7)) << h.first_failure(CurvatureCase::Geodesic, 1e-7);
  }
  const SpacetimeSpec lie = make_entry("lie_group");
  const Prepared st = setup(lie, testutil::samples(lie, 1)[0]);
  const CurvatureHypotheses h = curvature_hypotheses(st.K, &st.K.tau);
  EXPECT_EQ(h.first_failure(CurvatureCase::Killing, 1e-7), "[k,t]=0");
}

TEST(Curvature, KillingCaseFormulaMatchesOracle) {
  const SpacetimeSpec s = make_entry("skr");
  int used = 0;
  for (const auto& p : testutil::samples(s, 50)) {
    const Prepared st = setup(s, p);
    const CurvatureResult R = kahler_curvature(st.K, s.f, st.r_base, CurvatureCase::Killing);
    EXPECT_LT(R.discrepancy, 1e-4);
    EXPECT_LT(R.ricci_discrepancy, 1e-4);
    ++used;
  }
  EXPECT_EQ(used, 50);
}

TEST(Curvature, GeodesicCaseFormulaMatchesOracle) {
  for (const std::map<std::string, double>& o : std::vector<std::map<std::string, double>>{{}, {{"p0", 2.5}}}) {
    const SpacetimeSpec s = make_entry("skr_const_p", o);
    for (const auto& p : testutil::samples(s, 50)) {
      const Prepared st = setup(s, p);
      const CurvatureResult R = kahler_curvature(st.K, s.f, st.r_base, CurvatureCase::Geodesic);
      EXPECT_LT(R.discrepancy, 1e-4);
      EXPECT_LT(R.ricci_discrepancy, 1e-4);
    }
  }
}

TEST(Curvature, RicciFormIsJInvariant) {
  const SpacetimeSpec s = make_entry("skr");
  for (const auto& p : testutil::samples(s, 10)) {
    const Prepared st = setup(s, p);
    const CurvatureResult R = kahler_curvature(st.K, s.f, st.r_base, CurvatureCase::Killing);
    const JetMat& J = st.K.S.J;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double v = 0.0;
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) v += J(c, a).value() * J(d, b).value() * R.ricci_form[c][d];
        EXPECT_NEAR(v, R.ricci_form[a][b], 1e-6);
        EXPECT_NEAR(R.ricci_form[a][b], -R.ricci_form[b][a], 1e-9);
      }
  }
}

TEST(Curvature, TauPrimeOfFunctionOfTau) {
  const auto sd = seeds({0.7, 0.2, -0.1, 0.4}, 3);
  const Jet tau = sd[0] + 0.5 * sd[1];
  const Jet F = sin(tau) * tau;
  const Jet Fp = tau_prime(F, tau);
  EXPECT_NEAR(Fp.value(), std::cos(tau.value()) * tau.value() + std::sin(tau.value()), 1e-13);
  const Jet Fpp = tau_prime(Fp, tau);
  EXPECT_NEAR(Fpp.value(), -std::sin(tau.value()) * tau.value() + 2 * std::cos(tau.value()), 1e-12);
}
