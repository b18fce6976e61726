#pragma once

// Truncated multivariate Taylor jets: value plus all partial derivatives up
// to order 3 in at most 4 variables, stored densely.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace geokahler {

inline constexpr int kMaxDim = 4;
inline constexpr int kMaxOrder = 3;

class Jet {
 public:
  Jet() = default;
  explicit Jet(double value, int dim = 0, int order = kMaxOrder) : v_(value), dim_(dim), order_(order) {
    check_shape(dim, order);
  }

  static Jet constant(double value, int dim = 0, int order = kMaxOrder) { return Jet(value, dim, order); }

  // Coordinate function x_index seeded at `value`.
  static Jet variable(double value, int index, int dim, int order) {
    if (index < 0 || index >= dim) throw std::out_of_range("jet variable index out of range");
    Jet j(value, dim, order);
    if (order >= 1) j.d1_[index] = 1.0;
    return j;
  }

  double value() const { return v_; }
  int dim() const { return dim_; }
  int order() const { return order_; }

  double d(int i) const { return d1_[i]; }
  double d(int i, int j) const { return d2_[i * 4 + j]; }
  double d(int i, int j, int k) const { return d3_[(i * 4 + j) * 4 + k]; }
  double& d(int i) { return d1_[i]; }
  double& d(int i, int j) { return d2_[i * 4 + j]; }
  double& d(int i, int j, int k) { return d3_[(i * 4 + j) * 4 + k]; }

  // Derivative along coordinate i; the result has order one less.
  Jet partial(int i) const {
    if (order_ < 1) throw std::logic_error("partial of an order-0 jet");
    if (i < 0 || i >= kMaxDim) throw std::out_of_range("partial index out of range");
    if (i >= dim_) return Jet(0.0, dim_, order_ - 1);  // constant along x_i
    Jet r(d1_[i], dim_, order_ - 1);
    for (int a = 0; a < dim_; ++a) {
      if (order_ >= 2) r.d1_[a] = d(i, a);
      for (int b = 0; b < dim_ && order_ >= 3; ++b) r.d(a, b) = d(i, a, b);
    }
    return r;
  }

  Jet truncated(int order) const {
    if (order >= order_) return *this;
    Jet r = *this;
    r.order_ = std::max(order, 0);
    if (r.order_ < 3) r.d3_.fill(0.0);
    if (r.order_ < 2) r.d2_.fill(0.0);
    if (r.order_ < 1) r.d1_.fill(0.0);
    return r;
  }

  // h = phi(f) given phi and its first three derivatives at f.value().
  Jet compose(double p0, double p1, double p2, double p3) const {
    Jet r(p0, dim_, order_);
    const int n = dim_;
    if (order_ >= 1)
      for (int i = 0; i < n; ++i) r.d1_[i] = p1 * d1_[i];
    if (order_ >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double val = p2 * d1_[i] * d1_[j] + p1 * d(i, j);
          r.d(i, j) = val;
          r.d(j, i) = val;
        }
    if (order_ >= 3)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          for (int k = j; k < n; ++k) {
            const double val = p3 * d1_[i] * d1_[j] * d1_[k] +
                               p2 * (d(i, j) * d1_[k] + d(i, k) * d1_[j] + d(j, k) * d1_[i]) +
                               p1 * d(i, j, k);
            r.set3(i, j, k, val);
          }
    return r;
  }

  Jet& operator+=(const Jet& o) {
    merge_shape(o);
    v_ += o.v_;
    for (int i = 0; i < 4; ++i) d1_[i] += o.d1_[i];
    for (int i = 0; i < 16; ++i) d2_[i] += o.d2_[i];
    for (int i = 0; i < 64; ++i) d3_[i] += o.d3_[i];
    clear_above_order();
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    merge_shape(o);
    v_ -= o.v_;
    for (int i = 0; i < 4; ++i) d1_[i] -= o.d1_[i];
    for (int i = 0; i < 16; ++i) d2_[i] -= o.d2_[i];
    for (int i = 0; i < 64; ++i) d3_[i] -= o.d3_[i];
    clear_above_order();
    return *this;
  }
  Jet& operator*=(double s) {
    v_ *= s;
    for (auto& x : d1_) x *= s;
    for (auto& x : d2_) x *= s;
    for (auto& x : d3_) x *= s;
    return *this;
  }
  Jet& operator+=(double s) {
    v_ += s;
    return *this;
  }
  Jet& operator-=(double s) {
    v_ -= s;
    return *this;
  }
  Jet operator-() const {
    Jet r = *this;
    r *= -1.0;
    return r;
  }

  friend Jet operator*(const Jet& f, const Jet& g) {
    Jet r;
    r.dim_ = std::max(f.dim_, g.dim_);
    r.order_ = std::min(f.order_, g.order_);
    r.v_ = f.v_ * g.v_;
    const int n = r.dim_;
    if (r.order_ >= 1)
      for (int i = 0; i < n; ++i) r.d1_[i] = f.d1_[i] * g.v_ + f.v_ * g.d1_[i];
    if (r.order_ >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double val = f.d(i, j) * g.v_ + f.d1_[i] * g.d1_[j] + f.d1_[j] * g.d1_[i] + f.v_ * g.d(i, j);
          r.d(i, j) = val;
          r.d(j, i) = val;
        }
    if (r.order_ >= 3)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          for (int k = j; k < n; ++k) {
            const double val = f.d(i, j, k) * g.v_ + f.d(i, j) * g.d1_[k] + f.d(i, k) * g.d1_[j] +
                               f.d(j, k) * g.d1_[i] + f.d1_[i] * g.d(j, k) + f.d1_[j] * g.d(i, k) +
                               f.d1_[k] * g.d(i, j) + f.v_ * g.d(i, j, k);
            r.set3(i, j, k, val);
          }
    return r;
  }

 private:
  static void check_shape(int dim, int order) {
    if (dim < 0 || dim > kMaxDim) throw std::invalid_argument("jet dimension must be in [0, 4]");
    if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet order must be in [0, 3]");
  }
  void merge_shape(const Jet& o) {
    dim_ = std::max(dim_, o.dim_);
    order_ = std::min(order_, o.order_);
  }
  void clear_above_order() {
    if (order_ < 3) d3_.fill(0.0);
    if (order_ < 2) d2_.fill(0.0);
    if (order_ < 1) d1_.fill(0.0);
  }
  void set3(int i, int j, int k, double val) {
    d(i, j, k) = val;
    d(i, k, j) = val;
    d(j, i, k) = val;
    d(j, k, i) = val;
    d(k, i, j) = val;
    d(k, j, i) = val;
  }

  double v_ = 0.0;
  std::array<double, 4> d1_{};
  std::array<double, 16> d2_{};
  std::array<double, 64> d3_{};
  int dim_ = 0;
  int order_ = kMaxOrder;
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator+(Jet a, double s) { return a += s; }
inline Jet operator+(double s, Jet a) { return a += s; }
inline Jet operator-(Jet a, double s) { return a += -s; }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }

inline Jet reciprocal(const Jet& f) {
  const double x = f.value();
  if (x == 0.0) throw std::domain_error("division by a jet with zero value");
  const double r = 1.0 / x;
  return f.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
inline Jet operator/(double s, const Jet& b) { return s * reciprocal(b); }

inline Jet sin(const Jet& f) {
  const double s = std::sin(f.value()), c = std::cos(f.value());
  return f.compose(s, c, -s, -c);
}
inline Jet cos(const Jet& f) {
  const double s = std::sin(f.value()), c = std::cos(f.value());
  return f.compose(c, -s, -c, s);
}
inline Jet tan(const Jet& f) {
  const double t = std::tan(f.value());
  const double s2 = 1.0 + t * t;
  return f.compose(t, s2, 2.0 * t * s2, 2.0 * s2 * (1.0 + 3.0 * t * t));
}
inline Jet sinh(const Jet& f) {
  const double s = std::sinh(f.value()), c = std::cosh(f.value());
  return f.compose(s, c, s, c);
}
inline Jet cosh(const Jet& f) {
  const double s = std::sinh(f.value()), c = std::cosh(f.value());
  return f.compose(c, s, c, s);
}
inline Jet tanh(const Jet& f) {
  const double t = std::tanh(f.value());
  const double s2 = 1.0 - t * t;
  return f.compose(t, s2, -2.0 * t * s2, s2 * (6.0 * t * t - 2.0));
}
inline Jet exp(const Jet& f) {
  const double e = std::exp(f.value());
  return f.compose(e, e, e, e);
}
inline Jet log(const Jet& f) {
  const double x = f.value();
  if (!(x > 0.0)) throw std::domain_error("log of a non-positive value");
  const double r = 1.0 / x;
  return f.compose(std::log(x), r, -r * r, 2.0 * r * r * r);
}
inline Jet sqrt(const Jet& f) {
  const double x = f.value();
  if (!(x > 0.0)) throw std::domain_error("sqrt of a non-positive value");
  const double s = std::sqrt(x);
  return f.compose(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x));
}
// Smooth away from zero; derivatives are those of sign(x)*x.
inline Jet abs(const Jet& f) {
  const double sg = f.value() < 0.0 ? -1.0 : 1.0;
  return f.compose(std::fabs(f.value()), sg, 0.0, 0.0);
}

// Integer exponents work for negative bases.
inline Jet pow(const Jet& f, int n) {
  const double x = f.value();
  auto ip = [](double b, int e) {
    if (e < 0) return 1.0 / std::pow(b, -e);
    return std::pow(b, e);
  };
  const double dn = n;
  return f.compose(ip(x, n), dn * ip(x, n - 1), dn * (dn - 1) * ip(x, n - 2), dn * (dn - 1) * (dn - 2) * ip(x, n - 3));
}

inline Jet pow(const Jet& f, double e) {
  if (e == std::round(e) && std::fabs(e) < 1e9) return pow(f, static_cast<int>(e));
  const double x = f.value();
  if (!(x > 0.0)) throw std::domain_error("non-integer power of a non-positive value");
  return f.compose(std::pow(x, e), e * std::pow(x, e - 1), e * (e - 1) * std::pow(x, e - 2),
                   e * (e - 1) * (e - 2) * std::pow(x, e - 3));
}

// General power through exp/log; constant exponents should use the overloads above.
inline Jet pow(const Jet& f, const Jet& g) { return exp(g * log(f)); }

// Largest derivative magnitude difference, used by tests and diagnostics.
inline double max_abs_diff(const Jet& a, const Jet& b) {
  const int n = std::max(a.dim(), b.dim());
  const int o = std::min(a.order(), b.order());
  double m = std::fabs(a.value() - b.value());
  for (int i = 0; i < n && o >= 1; ++i) {
    m = std::max(m, std::fabs(a.d(i) - b.d(i)));
    for (int j = 0; j < n && o >= 2; ++j) {
      m = std::max(m, std::fabs(a.d(i, j) - b.d(i, j)));
      for (int k = 0; k < n && o >= 3; ++k) m = std::max(m, std::fabs(a.d(i, j, k) - b.d(i, j, k)));
    }
  }
  return m;
}

}  // namespace geokahler
