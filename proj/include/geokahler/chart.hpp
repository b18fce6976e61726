#pragma once

// Coordinate charts, expression-backed fields and low-discrepancy sampling.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "geokahler/expr.hpp"
#include "geokahler/jet.hpp"

namespace geokahler {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
using Box = std::vector<Interval>;

struct Chart {
  std::string name;
  std::vector<std::string> coords;
  std::vector<Expr> domain;  // each expression must be strictly positive
  int orientation = 1;

  int dim() const { return static_cast<int>(coords.size()); }
  int index_of(const std::string& c) const {
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (coords[i] == c) return static_cast<int>(i);
    return -1;
  }
  bool contains(const Point& p) const {
    if (static_cast<int>(p.size()) != dim()) return false;
    for (double x : p)
      if (!std::isfinite(x)) return false;
    for (const auto& e : domain) {
      const double v = e.eval(p);
      if (!(v > 0.0)) return false;
    }
    return true;
  }
};

struct ScalarField {
  Expr e;
};
struct VectorField {
  std::vector<Expr> c;
};
struct CovectorField {
  std::vector<Expr> c;
};
struct MetricField {
  std::vector<std::vector<Expr>> g;  // symmetric, dim x dim
};

inline std::vector<Jet> seeds(const Point& p, int order) {
  const int n = static_cast<int>(p.size());
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("chart dimension must be in [1, 4]");
  if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet order must be in [0, 3]");
  std::vector<Jet> s;
  s.reserve(p.size());
  for (int i = 0; i < n; ++i) s.push_back(Jet::variable(p[i], i, n, order));
  return s;
}

inline double radical_inverse(unsigned base, unsigned long long i) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// First `count` Halton points in `box` that satisfy the chart domain.  Gives
// up after 50*count candidates, returning what was found.
inline std::vector<Point> halton_samples(const Chart& chart, const Box& box, int count) {
  static constexpr unsigned kBases[4] = {2, 3, 5, 7};
  if (static_cast<int>(box.size()) != chart.dim()) throw std::invalid_argument("box dimension mismatch");
  std::vector<Point> out;
  const unsigned long long limit = 50ull * static_cast<unsigned long long>(std::max(count, 1));
  for (unsigned long long i = 1; i <= limit && static_cast<int>(out.size()) < count; ++i) {
    Point p(box.size());
    for (std::size_t d = 0; d < box.size(); ++d)
      p[d] = box[d].lo + (box[d].hi - box[d].lo) * radical_inverse(kBases[d], i);
    if (chart.contains(p)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace geokahler
