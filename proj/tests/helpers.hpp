#pragma once

#include <string>
#include <vector>

#include "geokahler/catalog.hpp"
#include "geokahler/chart.hpp"

namespace testutil {

using namespace geokahler;

inline MetricField metric(const Symbols& s, const std::vector<std::vector<std::string>>& rows) {
  MetricField g;
  for (const auto& r : rows) {
    g.g.emplace_back();
    for (const auto& c : r) g.g.back().push_back(Expr::parse(c, s));
  }
  return g;
}

inline VectorField vec(const Symbols& s, const std::vector<std::string>& comps) {
  VectorField v;
  for (const auto& c : comps) v.c.push_back(Expr::parse(c, s));
  return v;
}

// Halton samples of a catalog entry inside its box and domain.
inline std::vector<Point> samples(const SpacetimeSpec& s, int n) { return halton_samples(s.chart, s.box, n); }

inline std::vector<std::string> catalog_ids() {
  std::vector<std::string> ids;
  for (const auto& it : catalog()) ids.push_back(it.id);
  return ids;
}

}  // namespace testutil
