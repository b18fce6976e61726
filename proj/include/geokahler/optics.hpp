#pragma once

// Relative shear and twist of a vector field with respect to a splitting
// TM = V + H, where V is spanned by one or two given fields and H = V^perp.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geokahler/tensor.hpp"

namespace geokahler {

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPivotThreshold = 1e-6;

// Oriented g-orthonormal frame (x, y) of H at a point.
struct Frame {
  JetVec x, y;
  JetMat A, Ainv;  // Gram matrix of the V fields and its inverse (top-left block)
  Jet G;           // det A
  std::array<int, 2> pivots{-1, -1};
  bool flipped = false;
};

// Orthogonal projection onto H = span(V)^perp.
inline JetVec project_H(const JetMat& g, const std::vector<JetVec>& V, const JetMat& Ainv, const JetVec& v) {
  const int m = static_cast<int>(V.size());
  std::array<Jet, 2> gv;
  for (int b = 0; b < m; ++b) gv[b] = inner(g, v, V[b]);
  JetVec r = v;
  for (int a = 0; a < m; ++a) {
    Jet coeff = Ainv(a, 0) * gv[0];
    for (int b = 1; b < m; ++b) coeff += Ainv(a, b) * gv[b];
    r = r - coeff * V[a];
  }
  return r;
}

inline Frame build_frame(const JetMat& g, const std::vector<JetVec>& V, int orientation) {
  const int n = g.n;
  const int m = static_cast<int>(V.size());
  if (m < 1 || m > 2 || n - m != 2) throw FrameError("H must be 2-dimensional");
  Frame fr;
  fr.A = JetMat(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) fr.A(a, b) = inner(g, V[a], V[b]);
  fr.G = m == 1 ? fr.A(0, 0) : fr.A(0, 0) * fr.A(1, 1) - fr.A(0, 1) * fr.A(1, 0);
  if (std::fabs(fr.G.value()) < 1e-14) throw FrameError("V is degenerate (G = 0)");
  fr.Ainv = inverse(fr.A);

  std::vector<JetVec> picked;
  for (int i = 0; i < n && picked.size() < 2; ++i) {
    JetVec w = project_H(g, V, fr.Ainv, coordinate_field(i, n));
    for (const auto& u : picked) w = w - inner(g, w, u) * u;
    const double nn = inner(g, w, w).value();
    double eucl = 0.0;
    for (int k = 0; k < n; ++k) eucl += w[k].value() * w[k].value();
    if (std::sqrt(eucl) <= kPivotThreshold) continue;
    if (nn <= kPivotThreshold * kPivotThreshold) {
      if (nn < 0.0) throw FrameError("H is not spacelike");
      continue;
    }
    const Jet inv = reciprocal(sqrt(inner(g, w, w)));
    picked.push_back(inv * w);
    fr.pivots[picked.size() - 1] = i;
  }
  if (picked.size() < 2) throw FrameError("could not find two independent directions in H");
  fr.x = picked[0];
  fr.y = picked[1];

  std::vector<JetVec> cols = V;
  cols.push_back(fr.x);
  cols.push_back(fr.y);
  const double det = determinant(columns(cols)).value();
  if ((det > 0.0 ? 1 : -1) != orientation) {
    fr.y = -1.0 * fr.y;
    fr.flipped = true;
  }
  return fr;
}

struct OpticsJets {
  Jet sigma1, sigma2, iota;
};

// Covariant-derivative form: with M_ab = g(nabla_{e_b} X, e_a) in the frame
// (x, y), shear = tracefree symmetric part and twist = antisymmetric part.
inline OpticsJets optics_jets(const JetMat& g, const Christoffel& Gam, const JetVec& X, const Frame& fr) {
  const int o = Gam.gamma[0].order();
  const JetMat gt = truncated(g, o);
  const JetVec x = truncated(fr.x, o), y = truncated(fr.y, o);
  const JetVec dxX = covariant_derivative(Gam, fr.x, X);
  const JetVec dyX = covariant_derivative(Gam, fr.y, X);
  const Jet xx = inner(gt, dxX, x), xy = inner(gt, dxX, y);
  const Jet yx = inner(gt, dyX, x), yy = inner(gt, dyX, y);
  return {0.5 * (yy - xx), 0.5 * (yx + xy), yx - xy};
}

// Bracket form, independent of the connection.
inline OpticsJets optics_jets_bracket(const JetMat& g, const JetVec& X, const Frame& fr) {
  const int o = std::max(std::min({g.order(), X.order(), fr.x.order()}) - 1, 0);
  const JetMat gt = truncated(g, o);
  const JetVec x = truncated(fr.x, o), y = truncated(fr.y, o);
  const JetVec Xx = lie_bracket(X, fr.x), Xy = lie_bracket(X, fr.y);
  const JetVec xy = lie_bracket(fr.x, fr.y);
  return {0.5 * (inner(gt, Xx, x) - inner(gt, Xy, y)), -0.5 * (inner(gt, Xx, y) + inner(gt, Xy, x)),
          inner(gt, truncated(X, o), xy)};
}

struct OpticalScalars {
  double sigma1 = 0.0, sigma2 = 0.0, iota = 0.0;
  std::array<std::array<double, 2>, 2> shear_matrix{}, twist_matrix{};
  double twist_function = 0.0;
  double shear_invariant = 0.0;
  std::optional<double> alpha;
};

inline OpticalScalars optical_scalars(const OpticsJets& j) {
  OpticalScalars s;
  s.sigma1 = j.sigma1.value();
  s.sigma2 = j.sigma2.value();
  s.iota = j.iota.value();
  s.shear_matrix = {{{-s.sigma1, s.sigma2}, {s.sigma2, s.sigma1}}};
  s.twist_matrix = {{{0.0, s.iota / 2}, {-s.iota / 2, 0.0}}};
  s.twist_function = 2.0 * std::sqrt(s.twist_matrix[0][1] * s.twist_matrix[0][1]);
  s.shear_invariant = s.sigma1 * s.sigma1 + s.sigma2 * s.sigma2;
  return s;
}

struct PregeodesicResult {
  double alpha = 0.0;
  double residual = 0.0;  // |nabla_X X - alpha X| / (1 + |nabla_X X|)
  bool pregeodesic = false;
  double geodesic_residual = 0.0;  // |nabla_X X|
};

inline PregeodesicResult pregeodesic_factor(const Christoffel& Gam, const JetVec& X, double tol = 1e-7) {
  const JetVec a = covariant_derivative(Gam, X, X);
  double ax = 0.0, xx = 0.0, aa = 0.0;
  for (int i = 0; i < X.n; ++i) {
    ax += a[i].value() * X[i].value();
    xx += X[i].value() * X[i].value();
    aa += a[i].value() * a[i].value();
  }
  PregeodesicResult r;
  r.alpha = xx > 0.0 ? ax / xx : 0.0;
  double res = 0.0;
  for (int i = 0; i < X.n; ++i) res += std::pow(a[i].value() - r.alpha * X[i].value(), 2);
  r.residual = std::sqrt(res) / (1.0 + std::sqrt(aa));
  r.geodesic_residual = std::sqrt(aa);
  r.pregeodesic = r.residual < tol;
  return r;
}

// Point-level entry points over expression fields.
inline Frame oriented_frame(const MetricField& g, const VectorField& k, const VectorField& t, int orientation,
                            const Point& p, int order = 1) {
  const auto s = seeds(p, order);
  return build_frame(eval_jet(g, s), {eval_jet(k, s), eval_jet(t, s)}, orientation);
}

inline OpticalScalars shear_twist(const MetricField& g, const VectorField& k, const VectorField& t,
                                  const VectorField& X, int orientation, const Point& p) {
  const auto s = seeds(p, 1);
  const JetMat gj = eval_jet(g, s);
  const Frame fr = build_frame(gj, {eval_jet(k, s), eval_jet(t, s)}, orientation);
  const JetVec Xj = eval_jet(X, s);
  const Christoffel Gam = christoffel(gj);
  OpticalScalars out = optical_scalars(optics_jets(gj, Gam, Xj, fr));
  const PregeodesicResult pg = pregeodesic_factor(Gam, Xj);
  if (pg.pregeodesic) out.alpha = pg.alpha;
  return out;
}

// Twist and shear of X for g and ghat = beta^2 g, each with its own oriented
// orthonormal frame of H.  Both are invariant: the returned residuals are
// |iota_hat - iota| and the largest shear coefficient difference.
struct ConformalComparison {
  OpticalScalars original, rescaled;
  double twist_residual = 0.0;
  double shear_residual = 0.0;
};

inline ConformalComparison conformal_invariance(const MetricField& g, const VectorField& k, const VectorField& t,
                                                const VectorField& X, const ScalarField& beta, int orientation,
                                                const Point& p) {
  const auto s = seeds(p, 1);
  const JetMat gj = eval_jet(g, s);
  const Jet b2 = eval_jet(beta, s) * eval_jet(beta, s);
  JetMat gh(gj.n);
  for (int i = 0; i < gj.n; ++i)
    for (int j = 0; j < gj.n; ++j) gh(i, j) = b2 * gj(i, j);
  const JetVec kj = eval_jet(k, s), tj = eval_jet(t, s), Xj = eval_jet(X, s);
  ConformalComparison c;
  c.original = optical_scalars(optics_jets(gj, christoffel(gj), Xj, build_frame(gj, {kj, tj}, orientation)));
  c.rescaled = optical_scalars(optics_jets(gh, christoffel(gh), Xj, build_frame(gh, {kj, tj}, orientation)));
  c.twist_residual = std::fabs(c.rescaled.iota - c.original.iota);
  c.shear_residual = std::max(std::fabs(c.rescaled.sigma1 - c.original.sigma1),
                              std::fabs(c.rescaled.sigma2 - c.original.sigma2));
  return c;
}

// Riemannian 3-manifold with a unit field kbar: splitting span(kbar) + kbar^perp.
struct Riemannian3Optics {
  OpticalScalars scalars;
  double ric_kk = 0.0;      // Ric(kbar, kbar)
  double unit_residual = 0.0;
  double killing_residual = 0.0;
  double geodesic_residual = 0.0;
};

inline Riemannian3Optics riemannian3_optics(const MetricField& g, const VectorField& kbar, int orientation,
                                            const Point& p) {
  const auto s = seeds(p, 2);
  const JetMat gj = eval_jet(g, s);
  const JetVec kj = eval_jet(kbar, s);
  const Frame fr = build_frame(gj, {kj}, orientation);
  const Christoffel Gam = christoffel(gj);
  Riemannian3Optics r;
  r.scalars = optical_scalars(optics_jets(gj, Gam, kj, fr));
  const Curvature c = curvature(gj);
  for (int i = 0; i < gj.n; ++i)
    for (int j = 0; j < gj.n; ++j) r.ric_kk += c.ricci[i][j] * kj[i].value() * kj[j].value();
  r.unit_residual = std::fabs(inner(gj, kj, kj).value() - 1.0);
  r.killing_residual = lie_derivative_metric(gj, kj).max_abs();
  r.geodesic_residual = pregeodesic_factor(Gam, kj).geodesic_residual;
  return r;
}

}  // namespace geokahler
