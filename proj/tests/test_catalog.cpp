#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"

using namespace geokahler;

namespace {

void expect_same_exprs(const std::vector<Expr>& a, const std::vector<Expr>& b, const std::string& what) {
  ASSERT_EQ(a.size(), b.size()) << what;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i] == b[i]) << what << "[" << i << "]: " << a[i].str() << " vs " << b[i].str();
}

int parse_error_line(const std::string& text) {
  try {
    parse_spec_text(text);
  } catch (const SpecParseError& e) {
    return e.line();
  }
  return -1;
}

const char* kMinimal = R"([chart]
name = tiny
coords = t, x, y, z
orientation = +1

[metric]
t,t = -1
x,x = 1
y,y = 1
z,z = 1

[fields]
kind = standard
k = 1; 0; 0; 1
t = 1; 0; 0; -1
tau = t - z

[box]
t = -1:1
x = -1:1
y = -1:1
z = -1:1
)";

}  // namespace

TEST(Catalog, ListIsSortedAndComplete) {
  const auto ids = testutil::catalog_ids();
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  for (const std::string id : {"direct_product_hopf", "de_sitter", "pp_truncated", "plane_wave", "kerr", "nut",
                               "conformal_kerr", "lie_group", "skr", "skr_const_p", "minkowski"})
    EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
  for (const auto& it : catalog()) EXPECT_FALSE(it.description.empty());
}

TEST(Catalog, EntriesAreWellFormed) {
  for (const auto& id : testutil::catalog_ids()) {
    const SpacetimeSpec s = make_entry(id);
    EXPECT_EQ(s.id, id);
    EXPECT_EQ(s.chart.dim(), 4);
    EXPECT_EQ(static_cast<int>(s.box.size()), 4);
    EXPECT_EQ(s.k.c.size(), 4u);
    EXPECT_EQ(s.t.c.size(), 4u);
    if (s.kind == Construction::Standard) EXPECT_TRUE(s.tau.has_value()) << id;
    else EXPECT_TRUE(s.potential.has_value()) << id;
    const auto pts = testutil::samples(s, 100);
    EXPECT_GE(pts.size(), 50u) << id;
    for (const auto& p : pts)
      for (const auto& row : s.g.g)
        for (const auto& e : row) ASSERT_TRUE(std::isfinite(e.eval(p))) << id;
    for (const auto& r : s.relations) {
      EXPECT_NO_THROW(s.field(r.a)) << id;
      EXPECT_NO_THROW(s.field(r.b)) << id;
    }
  }
}

TEST(Catalog, RelationsHoldOnSamples) {
  for (const std::string id : {"kerr", "lie_group", "skr", "skr_const_p"}) {
    const SpacetimeSpec s = make_entry(id);
    ASSERT_FALSE(s.relations.empty()) << id;
    for (const auto& p : testutil::samples(s, 30))
      for (const auto& r : s.relations) EXPECT_LT(detail::relation_residual(s, r, p), 1e-9) << id << " " << r.name;
  }
}

TEST(Catalog, ParameterValidation) {
  EXPECT_THROW(make_entry("nope"), ConfigError);
  try {
    make_entry("kerr", {{"a", 0.5}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("requires a > m"), std::string::npos);
  }
  EXPECT_THROW(make_entry("kerr", {{"q", 1.0}}), ConfigError);
  EXPECT_THROW(make_entry("nut", {{"l", 0.0}}), ConfigError);
  EXPECT_THROW(make_entry("skr", {{"q", 1.0}}), ConfigError);
  EXPECT_THROW(make_entry("de_sitter", {{"r", -1.0}}), ConfigError);
  EXPECT_NO_THROW(make_entry("lie_group", {{"r", 0.5}}));
  EXPECT_EQ(make_entry("kerr", {{"a", 3.0}}).params.at("a"), 3.0);
}

TEST(Catalog, SpecTextRoundTrip) {
  for (const auto& id : testutil::catalog_ids()) {
    const SpacetimeSpec s = make_entry(id);
    const std::string text = to_spec_text(s);
    const SpacetimeSpec b = parse_spec_text(text);
    EXPECT_EQ(b.id, s.id);
    EXPECT_EQ(b.chart.coords, s.chart.coords);
    EXPECT_EQ(b.chart.orientation, s.chart.orientation);
    EXPECT_EQ(b.params, s.params);
    EXPECT_EQ(b.kind, s.kind);
    for (int i = 0; i < 4; ++i) expect_same_exprs(b.g.g[i], s.g.g[i], id + " metric");
    expect_same_exprs(b.k.c, s.k.c, id + " k");
    expect_same_exprs(b.t.c, s.t.c, id + " t");
    expect_same_exprs(b.chart.domain, s.chart.domain, id + " domain");
    EXPECT_EQ(b.f.source, s.f.source);
    EXPECT_EQ(b.expected.size(), s.expected.size());
    EXPECT_EQ(b.expected_negative, s.expected_negative);
    EXPECT_EQ(b.reference.has_value(), s.reference.has_value());
    EXPECT_EQ(b.beta.has_value(), s.beta.has_value());
    for (int i = 0; i < 4; ++i) {
      EXPECT_EQ(b.box[i].lo, s.box[i].lo);
      EXPECT_EQ(b.box[i].hi, s.box[i].hi);
    }
    EXPECT_EQ(to_spec_text(b), text) << id;
  }
}

TEST(Catalog, ParamOverridesOnSpecText) {
  const SpacetimeSpec s = parse_spec_text(to_spec_text(make_entry("lie_group")), {{"r", -2.0}});
  EXPECT_EQ(s.params.at("r"), -2.0);
  EXPECT_THROW(parse_spec_text(kMinimal, {{"r", 1.0}}), ConfigError);
}

TEST(Catalog, MinimalSpecParses) {
  const SpacetimeSpec s = parse_spec_text(kMinimal);
  EXPECT_EQ(s.id, "tiny");
  EXPECT_EQ(s.f.kind, ParamFn::Kind::Exp);
  EXPECT_EQ(s.g.g[0][0].eval({0, 0, 0, 0}), -1.0);
  EXPECT_TRUE(s.g.g[0][1].is_zero_literal());
}

TEST(Catalog, TrailingCommentsAreIgnored) {
  std::string t = kMinimal;
  t.replace(t.find("[metric]"), 8, "[metric]   # diagonal");
  t.replace(t.find("kind = standard"), 15, "kind = standard  # or petrov");
  const SpacetimeSpec s = parse_spec_text(t);
  EXPECT_EQ(to_spec_text(s), to_spec_text(parse_spec_text(kMinimal)));
}

TEST(Catalog, ParseErrorsReportLines) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string t = kMinimal;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  EXPECT_EQ(parse_error_line(with("[chart]", "[chart")), 1);
  EXPECT_EQ(parse_error_line(with("[metric]", "[metrics]")), 6);
  EXPECT_EQ(parse_error_line(with("x,x = 1", "x,x = 1 +")), 8);
  EXPECT_EQ(parse_error_line(with("y,y = 1", "y,w = 1")), 9);
  EXPECT_EQ(parse_error_line(with("orientation = +1", "orientation = 2")), 4);
  EXPECT_EQ(parse_error_line(with("k = 1; 0; 0; 1", "k = 1; 0; 1")), 14);
  EXPECT_EQ(parse_error_line(with("kind = standard", "kind = weird")), 13);
  EXPECT_EQ(parse_error_line(with("z = -1:1", "z = 1:-1")), 22);
  EXPECT_EQ(parse_error_line(with("z = -1:1", "z = -1:x")), 22);
  EXPECT_EQ(parse_error_line(with("t = -1:1", "t -1:1")), 19);
  EXPECT_EQ(parse_error_line(std::string("x = 1\n") + kMinimal), 1);
  EXPECT_EQ(parse_error_line(with("coords = t, x, y, z", "coords = t, x, y")), 3);
  const int last = static_cast<int>(std::count(kMinimal, kMinimal + std::char_traits<char>::length(kMinimal), '\n'));
  EXPECT_EQ(parse_error_line(with("z = -1:1\n", "")), last - 1);  // missing box coordinate: reported at end
  try {
    parse_spec_text(with("x,x = 1", "x,x = 1 +"));
  } catch (const SpecParseError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 8: ", 0), 0u) << e.what();
  }
}
