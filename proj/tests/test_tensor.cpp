#include <gtest/gtest.h>

#include <cmath>

#include "fd.hpp"
#include "geokahler/tensor.hpp"
#include "helpers.hpp"

using namespace geokahler;
using testutil::metric;
using testutil::vec;

namespace {

// Christoffel symbols from finite differences of the metric expressions.
double christoffel_fd(const MetricField& g, const Point& p, int k, int i, int j) {
  const int n = static_cast<int>(p.size());
  auto comp = [&](int a, int b) { return fd::Fn([&g, a, b](const Point& q) { return g.g[a][b].eval(q); }); };
  const JetMat gp = eval_jet(g, p, 0);
  const JetMat gi = inverse(gp);
  double s = 0.0;
  for (int l = 0; l < n; ++l)
    s += 0.5 * gi(k, l).value() * (fd::d1(comp(j, l), p, i) + fd::d1(comp(i, l), p, j) - fd::d1(comp(i, j), p, l));
  return s;
}

}  // namespace

TEST(Tensor, SharpFlatIdentityOnCatalogMetrics) {
  for (const auto& id : testutil::catalog_ids()) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 20)) {
      const JetMat g = eval_jet(s.g, p, 1);
      const JetMat gi = inverse(g);
      const JetVec k = eval_jet(s.k, p, 1);
      const JetVec back = sharp(gi, flat(g, k));
      for (int i = 0; i < k.n; ++i) EXPECT_LT(std::fabs(back[i].value() - k[i].value()), 1e-12) << id;
    }
  }
}

TEST(Tensor, ExteriorDerivativeSquaresToZero) {
  const Symbols sym{{"a", "b", "c", "d"}, {}};
  const VectorField alpha = vec(sym, {"sin(a*b) + d", "exp(c)*a^2", "b*c*d", "cos(a - d)*b"});
  const ScalarField f{Expr::parse("a*exp(b)*sin(c*d) + b^3", sym)};
  fd::Sampler S;
  for (int i = 0; i < 20; ++i) {
    const Point p = S.point({{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}});
    const auto s = seeds(p, 3);
    EXPECT_LT(exterior_derivative(differential(eval_jet(f, s), 4)).max_abs(), 1e-10);
    EXPECT_LT(exterior_derivative(exterior_derivative(eval_jet(alpha, s))).max_abs(), 1e-10);
  }
}

TEST(Tensor, ChristoffelMatchesFiniteDifferences) {
  for (const std::string id : {"kerr", "de_sitter", "skr", "lie_group"}) {
    const SpacetimeSpec s = make_entry(id);
    for (const auto& p : testutil::samples(s, 5)) {
      const Christoffel G = christoffel(s.g, p);
      for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            EXPECT_LT(fd::rel(G(k, i, j).value(), christoffel_fd(s.g, p, k, i, j)), 1e-6) << id;
    }
  }
}

TEST(Tensor, RoundSpheresHaveKnownScalarCurvature) {
  const Symbols s2{{"th", "ph"}, {{"R", 1.7}}};
  const MetricField g2 = metric(s2, {{"R^2", "0"}, {"0", "R^2*sin(th)^2"}});
  EXPECT_NEAR(curvature(g2, {0.9, 0.3}).scalar, 2.0 / (1.7 * 1.7), 1e-12);

  const Symbols s3{{"ch", "th", "ph"}, {{"R", 2.0}}};
  const MetricField g3 = metric(s3, {{"R^2", "0", "0"},
                                     {"0", "R^2*sin(ch)^2", "0"},
                                     {"0", "0", "R^2*sin(ch)^2*sin(th)^2"}});
  const Curvature c3 = curvature(g3, {1.1, 0.7, 0.2});
  EXPECT_NEAR(c3.scalar, 6.0 / 4.0, 1e-12);
  // Einstein: Ric = (2/R^2) g
  EXPECT_NEAR(c3.ricci[0][0], 2.0, 1e-12);
}

TEST(Tensor, UnitTwoSphereTimesTwoSphereHasScalarFour) {
  const Symbols s{{"a", "b", "c", "d"}, {}};
  const MetricField g = metric(s, {{"1", "0", "0", "0"},
                                   {"0", "sin(a)^2", "0", "0"},
                                   {"0", "0", "1", "0"},
                                   {"0", "0", "0", "sin(c)^2"}});
  EXPECT_NEAR(curvature(g, {0.8, 0.1, 2.0, -0.4}).scalar, 4.0, 1e-12);
}

TEST(Tensor, RiemannSymmetriesAndFirstBianchi) {
  const SpacetimeSpec s = make_entry("kerr");
  for (const auto& p : testutil::samples(s, 5)) {
    const JetMat g = eval_jet(s.g, p, 2);
    const Curvature c = curvature(g);
    double bianchi = 0.0, anti = 0.0, pair_sym = 0.0;
    auto low = [&](int a, int b, int cc, int d) {
      double v = 0.0;
      for (int e = 0; e < 4; ++e) v += g(a, e).value() * c.riemann[e][b][cc][d];
      return v;
    };
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int cc = 0; cc < 4; ++cc)
          for (int d = 0; d < 4; ++d) {
            bianchi = std::max(bianchi, std::fabs(c.riemann[a][b][cc][d] + c.riemann[a][cc][d][b] + c.riemann[a][d][b][cc]));
            anti = std::max(anti, std::fabs(c.riemann[a][b][cc][d] + c.riemann[a][b][d][cc]));
            pair_sym = std::max(pair_sym, std::fabs(low(a, b, cc, d) - low(cc, d, a, b)));
          }
    EXPECT_LT(bianchi, 1e-10);
    EXPECT_LT(anti, 1e-12);
    EXPECT_LT(pair_sym, 1e-9);
  }
}

TEST(Tensor, MinkowskiIsFlat) {
  const SpacetimeSpec s = make_entry("minkowski");
  for (const auto& p : testutil::samples(s, 5)) EXPECT_EQ(curvature(s.g, p).max_riemann_lowered, 0.0);
}

TEST(Tensor, LieBracketMatchesFiniteDifferencesAndJacobi) {
  const Symbols sym{{"a", "b", "c"}, {}};
  const VectorField X = vec(sym, {"b", "-a", "c^2"});
  const VectorField Y = vec(sym, {"exp(a)", "a*c", "sin(b)"});
  const VectorField Z = vec(sym, {"c", "a*b", "1"});
  fd::Sampler S;
  for (int t = 0; t < 10; ++t) {
    const Point p = S.point({{-1, 1}, {-1, 1}, {-1, 1}});
    const JetVec br = lie_bracket(X, Y, p);
    for (int k = 0; k < 3; ++k) {
      double ref = 0.0;
      for (int i = 0; i < 3; ++i) {
        ref += X.c[i].eval(p) * fd::d1([&](const Point& q) { return Y.c[k].eval(q); }, p, i);
        ref -= Y.c[i].eval(p) * fd::d1([&](const Point& q) { return X.c[k].eval(q); }, p, i);
      }
      EXPECT_LT(fd::rel(br[k].value(), ref), 1e-8);
    }
    const auto s = seeds(p, 2);
    const JetVec x = eval_jet(X, s), y = eval_jet(Y, s), z = eval_jet(Z, s);
    const JetVec jac = lie_bracket(x, lie_bracket(y, z)) + lie_bracket(y, lie_bracket(z, x)) +
                       lie_bracket(z, lie_bracket(x, y));
    for (int k = 0; k < 3; ++k) EXPECT_LT(std::fabs(jac[k].value()), 1e-12);
    const JetVec sum = lie_bracket(x, y) + lie_bracket(y, x);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(sum[k].value(), 0.0);
  }
}

TEST(Tensor, LeviCivitaIsMetricCompatibleAndTorsionFree) {
  const SpacetimeSpec s = make_entry("nut");
  for (const auto& p : testutil::samples(s, 5)) {
    const auto sd = seeds(p, 2);
    const JetMat g = eval_jet(s.g, sd);
    const Christoffel G = christoffel(g);
    const JetVec X = eval_jet(s.k, sd), Y = eval_jet(s.t, sd), Z = eval_jet(s.field("E2"), sd);
    const JetMat g1 = truncated(g, 1);
    const double lhs = derivative_along(X, inner(g, Y, Z)).value();
    const double rhs = inner(g1, covariant_derivative(G, X, Y), truncated(Z, 1)).value() +
                       inner(g1, truncated(Y, 1), covariant_derivative(G, X, Z)).value();
    EXPECT_LT(fd::rel(lhs, rhs), 1e-10);
    const JetVec tors = covariant_derivative(G, X, Y) - covariant_derivative(G, Y, X) - lie_bracket(X, Y);
    for (int i = 0; i < 4; ++i) EXPECT_LT(std::fabs(tors[i].value()), 1e-10);
  }
}

TEST(Tensor, RotationIsKillingForFlatMetric) {
  const Symbols sym{{"x", "y", "z"}, {}};
  const MetricField g = metric(sym, {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}});
  const VectorField rot = vec(sym, {"-y", "x", "0"});
  const VectorField dil = vec(sym, {"x", "y", "z"});
  const auto s = seeds({0.3, -0.2, 1.1}, 1);
  EXPECT_EQ(lie_derivative_metric(eval_jet(g, s), eval_jet(rot, s)).max_abs(), 0.0);
  EXPECT_NEAR(lie_derivative_metric(eval_jet(g, s), eval_jet(dil, s)).max_abs(), 2.0, 1e-15);
}

TEST(Tensor, InverseAndDeterminant) {
  const SpacetimeSpec s = make_entry("conformal_kerr");
  for (const auto& p : testutil::samples(s, 5)) {
    const JetMat g = eval_jet(s.g, p, 2);
    const JetMat id = g * inverse(g);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(id(i, j).value(), i == j ? 1.0 : 0.0, 1e-12);
        for (int a = 0; a < 4; ++a) EXPECT_NEAR(id(i, j).d(a), 0.0, 1e-10);
      }
    EXPECT_LT(determinant(g).value(), 0.0);  // Lorentzian
  }
}
