#pragma once

// Dense univariate polynomials over C with exact degree bookkeeping, and a
// simultaneous (Aberth-Ehrlich) root finder. The finder also comes in a
// callback flavour for equations that can only be evaluated stably by
// iteration rather than through monomial coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "biflab/parallel.hpp"
#include "biflab/rng.hpp"

namespace biflab {

using cplx = std::complex<double>;

/// Shared root-merging radius: roots closer than this are reported as one
/// root with multiplicity. All modules use the same value so multiplicity
/// semantics stay uniform.
inline constexpr double kClusterRadius = 1e-7;

inline bool is_finite(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

class DensePolynomial {
 public:
  DensePolynomial() : coef_{0.0} {}
  explicit DensePolynomial(std::vector<cplx> ascending)
      : coef_(std::move(ascending)) {
    trim();
  }
  static DensePolynomial constant(cplx c) { return DensePolynomial({c}); }
  static DensePolynomial identity() { return DensePolynomial({0.0, 1.0}); }

  /// Exact degree; -1 for the zero polynomial.
  int degree() const { return is_zero() ? -1 : int(coef_.size()) - 1; }
  bool is_zero() const { return coef_.size() == 1 && coef_[0] == 0.0; }
  const std::vector<cplx>& coefficients() const { return coef_; }
  cplx leading() const { return coef_.back(); }

  cplx operator[](std::size_t k) const {
    return k < coef_.size() ? coef_[k] : cplx(0.0);
  }

  double l1_norm() const {
    double s = 0;
    for (cplx c : coef_) s += std::abs(c);
    return s;
  }

  cplx eval(cplx z) const {
    cplx acc = coef_.back();
    for (std::size_t k = coef_.size() - 1; k-- > 0;) acc = acc * z + coef_[k];
    return acc;
  }

  /// Horner evaluation of p and p' in one pass.
  std::pair<cplx, cplx> eval_with_derivative(cplx z) const {
    cplx p = coef_.back(), dp = 0.0;
    for (std::size_t k = coef_.size() - 1; k-- > 0;) {
      dp = dp * z + p;
      p = p * z + coef_[k];
    }
    return {p, dp};
  }

  DensePolynomial derivative() const {
    if (coef_.size() <= 1) return DensePolynomial();
    std::vector<cplx> d(coef_.size() - 1);
    for (std::size_t k = 1; k < coef_.size(); ++k)
      d[k - 1] = double(k) * coef_[k];
    return DensePolynomial(std::move(d));
  }

  friend DensePolynomial operator+(const DensePolynomial& a,
                                   const DensePolynomial& b) {
    std::vector<cplx> c(std::max(a.coef_.size(), b.coef_.size()), 0.0);
    for (std::size_t k = 0; k < a.coef_.size(); ++k) c[k] += a.coef_[k];
    for (std::size_t k = 0; k < b.coef_.size(); ++k) c[k] += b.coef_[k];
    return DensePolynomial(std::move(c));
  }
  friend DensePolynomial operator-(const DensePolynomial& a,
                                   const DensePolynomial& b) {
    std::vector<cplx> c(std::max(a.coef_.size(), b.coef_.size()), 0.0);
    for (std::size_t k = 0; k < a.coef_.size(); ++k) c[k] += a.coef_[k];
    for (std::size_t k = 0; k < b.coef_.size(); ++k) c[k] -= b.coef_[k];
    return DensePolynomial(std::move(c));
  }
  friend DensePolynomial operator*(const DensePolynomial& a,
                                   const DensePolynomial& b) {
    if (a.is_zero() || b.is_zero()) return DensePolynomial();
    std::vector<cplx> c(a.coef_.size() + b.coef_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coef_.size(); ++i)
      for (std::size_t j = 0; j < b.coef_.size(); ++j)
        c[i + j] += a.coef_[i] * b.coef_[j];
    return DensePolynomial(std::move(c));
  }
  friend DensePolynomial operator*(cplx s, const DensePolynomial& p) {
    std::vector<cplx> c = p.coef_;
    for (auto& x : c) x *= s;
    return DensePolynomial(std::move(c));
  }

  /// p(q(z)). Degree is deg(p)*deg(q) whenever both are nonconstant.
  DensePolynomial compose(const DensePolynomial& q,
                          std::size_t degree_cap = std::size_t(1) << 20) const {
    if (degree() >= 1 && q.degree() >= 1) {
      const std::size_t result_deg =
          std::size_t(degree()) * std::size_t(q.degree());
      if (result_deg > degree_cap)
        throw std::length_error("compose: degree cap exceeded");
    }
    DensePolynomial acc = DensePolynomial::constant(coef_.back());
    for (std::size_t k = coef_.size() - 1; k-- > 0;)
      acc = acc * q + DensePolynomial::constant(coef_[k]);
    return acc;
  }

  /// Fujiwara bound: all roots lie in |z| <= bound.
  double root_bound() const {
    const int d = degree();
    if (d < 1) return 0.0;
    const double lead = std::abs(coef_.back());
    double b = 0.0;
    for (int k = 1; k <= d; ++k) {
      const double m = std::abs(coef_[std::size_t(d - k)]) / lead;
      if (m > 0) b = std::max(b, 2.0 * std::pow(m, 1.0 / double(k)));
    }
    return std::max(b, 1e-30);
  }

 private:
  void trim() {
    while (coef_.size() > 1 && coef_.back() == 0.0) coef_.pop_back();
    if (coef_.empty()) coef_.push_back(0.0);
  }
  std::vector<cplx> coef_;  // ascending powers
};

// ---------------------------------------------------------------------------
// Simultaneous root finding

struct AberthOptions {
  int max_sweeps = 220;
  double tol = 1e-13;          // per-root step tolerance (relative)
  std::uint64_t seed = 0x5eedf00d;
  cplx center = 0.0;           // initial circle center
};

struct AberthResult {
  std::vector<cplx> roots;
  bool converged = false;
  int sweeps = 0;
};

/// Aberth-Ehrlich iteration. `newton_ratio(z)` must return p(z)/p'(z); the
/// evaluator owns numerical stability. Jacobi-style sweeps (all corrections
/// computed from the same snapshot) keep the result deterministic under
/// parallel execution.
inline AberthResult aberth_solve(int degree,
                                 const std::function<cplx(cplx)>& newton_ratio,
                                 double radius, AberthOptions opt = {}) {
  AberthResult out;
  if (degree < 1) {
    out.converged = true;
    return out;
  }
  std::vector<cplx>& z = out.roots;
  z.resize(std::size_t(degree));
  Rng rng(opt.seed);
  const double twopi = 2.0 * 3.14159265358979323846;
  const double phase0 = 0.31830988618;  // breaks axis symmetries
  for (int k = 0; k < degree; ++k) {
    const double r = radius * (0.85 + 0.3 * rng.uniform01());
    const double t = twopi * double(k) / double(degree) + phase0;
    z[std::size_t(k)] = opt.center + cplx(r * std::cos(t), r * std::sin(t));
  }

  std::vector<cplx> step(static_cast<std::size_t>(degree));
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    parallel_for(std::size_t(degree), [&](std::size_t i) {
      const cplx zi = z[i];
      cplx ratio = newton_ratio(zi);
      if (!is_finite(ratio)) ratio = 0.0;
      cplx s = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j) {
        if (j == i) continue;
        const cplx dz = zi - z[j];
        const double a2 = std::norm(dz);
        if (a2 > 1e-300) s += conj(dz) / a2;  // 1/dz without overflow
      }
      const cplx den = 1.0 - ratio * s;
      step[i] = (std::abs(den) > 1e-12) ? ratio / den : ratio;
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] -= step[i];
      worst = std::max(worst,
                       std::abs(step[i]) / (1.0 + std::abs(z[i])));
    }
    out.sweeps = sweep + 1;
    if (worst < opt.tol) {
      out.converged = true;
      break;
    }
  }
  // Two plain Newton passes to polish simple roots.
  for (int pass = 0; pass < 2; ++pass) {
    parallel_for(z.size(), [&](std::size_t i) {
      const cplx r = newton_ratio(z[i]);
      if (is_finite(r) && std::abs(r) < 0.1 * (1.0 + std::abs(z[i])))
        z[i] -= r;
    });
  }
  return out;
}

struct WindingResult {
  int turns = 0;
  double drift = 0;  // distance of the argument sum from an integer
  bool ok = false;
};

/// Argument-principle turn count of f along the circle |z - center| = radius
/// by trapezoidal phase accumulation. Fails on zero/non-finite values or
/// when the accumulated argument strays from an integer by >= 0.1.
inline WindingResult winding_number(const std::function<cplx(cplx)>& f,
                                    cplx center, double radius,
                                    int samples = 512) {
  constexpr double kTau = 6.283185307179586476925;
  WindingResult out;
  samples = std::max(samples, 64);
  double total = 0;
  cplx prev;
  for (int s = 0; s <= samples; ++s) {
    const double th = kTau * double(s % samples) / double(samples);
    const cplx v = f(center + std::polar(radius, th));
    if (!is_finite(v) || std::abs(v) == 0.0) return out;
    if (s > 0) total += std::arg(v / prev);
    prev = v;
  }
  const double turns = total / kTau;
  out.drift = std::abs(turns - std::round(turns));
  out.turns = int(std::lround(turns));
  out.ok = out.drift < 0.1;
  return out;
}

struct RootCluster {
  cplx root;
  int multiplicity = 1;
};

/// Merge points within kClusterRadius (transitively) into single roots with
/// multiplicity. Output is sorted by (re, im) for reproducibility.
inline std::vector<RootCluster> cluster_roots(std::vector<cplx> pts,
                                              double radius = kClusterRadius) {
  std::vector<RootCluster> out;
  if (pts.empty()) return out;
  std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<int> parent(pts.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[std::size_t(i)] != i) {
      parent[std::size_t(i)] = parent[std::size_t(parent[std::size_t(i)])];
      i = parent[std::size_t(i)];
    }
    return i;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[j].real() - pts[i].real() > radius) break;
      if (std::abs(pts[i] - pts[j]) <= radius) {
        const int a = find(int(i)), b = find(int(j));
        if (a != b) parent[std::size_t(b)] = a;
      }
    }
  }
  std::vector<std::pair<cplx, int>> acc(pts.size(), {cplx(0.0), 0});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int r = find(int(i));
    acc[std::size_t(r)].first += pts[i];
    acc[std::size_t(r)].second += 1;
  }
  for (auto& [sum, count] : acc)
    if (count > 0) out.push_back({sum / double(count), count});
  std::sort(out.begin(), out.end(), [](const RootCluster& a,
                                       const RootCluster& b) {
    return a.root.real() != b.root.real() ? a.root.real() < b.root.real()
                                          : a.root.imag() < b.root.imag();
  });
  return out;
}

struct RootSet {
  std::vector<RootCluster> roots;
  bool converged = false;
  int sweeps = 0;
  int total_multiplicity() const {
    int s = 0;
    for (const auto& r : roots) s += r.multiplicity;
    return s;
  }
};

/// All roots of p with multiplicity (count with multiplicity = degree).
/// Non-convergence within the sweep cap yields the partial result with
/// `converged == false`.
inline RootSet all_roots(const DensePolynomial& p, double tol = 1e-12) {
  RootSet out;
  const int d = p.degree();
  if (d < 1) throw std::invalid_argument("all_roots: degree must be >= 1");
  if (d == 1) {
    out.roots = {{-p[0] / p[1], 1}};
    out.converged = true;
    return out;
  }
  AberthOptions opt;
  opt.tol = tol;
  // Recentering at the root centroid improves the initial circle.
  const cplx centroid = -p[std::size_t(d - 1)] / (double(d) * p.leading());
  opt.center = is_finite(centroid) ? centroid : cplx(0.0);
  auto ratio = [&p](cplx z) {
    auto [v, dv] = p.eval_with_derivative(z);
    if (std::abs(dv) < 1e-300) return cplx(0.0);
    return v / dv;
  };
  AberthResult ar = aberth_solve(d, ratio, p.root_bound(), opt);
  out.roots = cluster_roots(std::move(ar.roots));
  out.converged = ar.converged;
  out.sweeps = ar.sweeps;
  return out;
}

}  // namespace biflab
