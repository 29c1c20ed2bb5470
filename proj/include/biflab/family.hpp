#pragma once

// Critically marked polynomial families f_lambda(z) and their iterates.
// Coefficients and marked critical points are polynomial maps of the
// parameter; their lambda-derivatives are differentiated symbolically once
// at construction and evaluated numerically afterwards. Iteration runs in
// raw complex doubles with an escape bail-out.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biflab/multipoly.hpp"
#include "biflab/poly.hpp"
#include "biflab/rng.hpp"

namespace biflab {

inline constexpr int kMaxZDegree = 11;
inline constexpr double kOverflowGuard = 1e150;

class NotACycleError : public std::runtime_error {
 public:
  NotACycleError(double residual, double tol)
      : std::runtime_error("not a cycle: residual " + std::to_string(residual) +
                           " above tolerance " + std::to_string(tol)),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class IterateOverflowError : public std::runtime_error {
 public:
  IterateOverflowError(int iterate)
      : std::runtime_error("orbit overflow at iterate " +
                           std::to_string(iterate)),
        iterate_(iterate) {}
  int iterate() const { return iterate_; }

 private:
  int iterate_;
};

/// Value plus first derivatives with respect to every parameter coordinate.
struct Jet {
  cplx v{};
  std::array<cplx, kMaxParams> d{};
  int dim = 1;

  static Jet constant(cplx value, int dim) {
    Jet j;
    j.v = value;
    j.dim = dim;
    return j;
  }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  r.v += b.v;
  for (int t = 0; t < r.dim; ++t) r.d[std::size_t(t)] += b.d[std::size_t(t)];
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  r.v -= b.v;
  for (int t = 0; t < r.dim; ++t) r.d[std::size_t(t)] -= b.d[std::size_t(t)];
  return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {  // Leibniz rule
  Jet r;
  r.dim = a.dim;
  r.v = a.v * b.v;
  for (int t = 0; t < r.dim; ++t)
    r.d[std::size_t(t)] =
        a.v * b.d[std::size_t(t)] + b.v * a.d[std::size_t(t)];
  return r;
}
inline Jet operator*(cplx s, const Jet& a) {
  Jet r = a;
  r.v *= s;
  for (int t = 0; t < r.dim; ++t) r.d[std::size_t(t)] *= s;
  return r;
}

/// f_lambda with coefficients (and their parameter-partials) instantiated at
/// one parameter point. Cheap to build per grid sample.
struct MapAtLambda {
  int deg = 2;
  int dim = 1;
  std::array<cplx, kMaxZDegree + 1> a{};
  std::array<std::array<cplx, kMaxParams>, kMaxZDegree + 1> da{};
  double escape_radius = 2.0;

  cplx eval(cplx z) const {
    cplx acc = a[std::size_t(deg)];
    for (int k = deg - 1; k >= 0; --k) acc = acc * z + a[std::size_t(k)];
    return acc;
  }

  cplx dz(cplx z) const {
    cplx acc = double(deg) * a[std::size_t(deg)];
    for (int k = deg - 1; k >= 1; --k)
      acc = acc * z + double(k) * a[std::size_t(k)];
    return acc;
  }

  std::pair<cplx, cplx> eval_with_dz(cplx z) const {
    cplx p = a[std::size_t(deg)], dp = 0.0;
    for (int k = deg - 1; k >= 0; --k) {
      dp = dp * z + p;
      p = p * z + a[std::size_t(k)];
    }
    return {p, dp};
  }

  /// Pushes a jet through f: chain rule in z plus the explicit
  /// lambda-dependence of the coefficients.
  Jet eval_jet(const Jet& z) const {
    Jet acc;
    acc.dim = z.dim;
    acc.v = a[std::size_t(deg)];
    for (int t = 0; t < z.dim; ++t)
      acc.d[std::size_t(t)] = da[std::size_t(deg)][std::size_t(t)];
    for (int k = deg - 1; k >= 0; --k) {
      acc = acc * z;
      acc.v += a[std::size_t(k)];
      for (int t = 0; t < z.dim; ++t)
        acc.d[std::size_t(t)] += da[std::size_t(k)][std::size_t(t)];
    }
    return acc;
  }
};

class FamilySpec {
 public:
  FamilySpec(std::string name, int degree, int param_dim,
             std::vector<MultiPoly> z_coefficients,
             std::vector<MultiPoly> critical_points,
             double domain_radius = 8.0)
      : name_(std::move(name)),
        degree_(degree),
        dim_(param_dim),
        coeff_(std::move(z_coefficients)),
        crit_(std::move(critical_points)),
        domain_radius_(domain_radius) {
    if (degree_ < 2 || degree_ > kMaxZDegree)
      throw std::invalid_argument("family degree out of supported range");
    if (dim_ < 1 || dim_ > kMaxParams)
      throw std::invalid_argument("parameter dimension out of range");
    if (int(coeff_.size()) != degree_ + 1)
      throw std::invalid_argument("expected degree+1 coefficient maps");
    if (crit_.empty())
      throw std::invalid_argument("at least one marked critical point");
    for (const MultiPoly& c : coeff_) {
      dcoeff_.emplace_back();
      for (int t = 0; t < dim_; ++t)
        dcoeff_.back().push_back(c.partial(t));
    }
    for (const MultiPoly& c : crit_) {
      dcrit_.emplace_back();
      for (int t = 0; t < dim_; ++t) dcrit_.back().push_back(c.partial(t));
    }
    validate();
  }

  /// f_lambda(z) = z^d + lambda with the single marked critical point 0.
  static FamilySpec unicritical(int degree) {
    std::vector<MultiPoly> coeffs(std::size_t(degree) + 1);
    coeffs[0] = MultiPoly::variable(0);
    coeffs[std::size_t(degree)] = MultiPoly::constant(1.0);
    std::vector<MultiPoly> crits{MultiPoly()};  // c == 0
    return FamilySpec(degree == 2 ? "quadratic"
                                  : "unicritical" + std::to_string(degree),
                      degree, 1, std::move(coeffs), std::move(crits));
  }

  /// f_(a,b)(z) = z^3 - 3 a^2 z + b with marked critical points +a and -a.
  static FamilySpec cubic_pm() {
    std::vector<MultiPoly> coeffs(4);
    coeffs[0] = MultiPoly::variable(1);
    coeffs[1] = cplx(-3.0) * (MultiPoly::variable(0) * MultiPoly::variable(0));
    coeffs[3] = MultiPoly::constant(1.0);
    std::vector<MultiPoly> crits{MultiPoly::variable(0),
                                 MultiPoly::variable(0, -1.0)};
    return FamilySpec("cubic_pm", 3, 2, std::move(coeffs), std::move(crits));
  }

  static FamilySpec by_name(const std::string& name) {
    if (name == "quadratic") return unicritical(2);
    if (name == "cubic_pm") return cubic_pm();
    if (name.rfind("unicritical", 0) == 0) {
      const int d = std::stoi(name.substr(11));
      return unicritical(d);
    }
    throw std::invalid_argument("unknown family: " + name);
  }

  const std::string& name() const { return name_; }
  int degree() const { return degree_; }
  int param_dim() const { return dim_; }
  int num_critical() const { return int(crit_.size()); }
  double domain_radius() const { return domain_radius_; }
  const MultiPoly& coefficient_map(int i) const {
    return coeff_[std::size_t(i)];
  }
  const MultiPoly& critical_map(int j) const { return crit_[std::size_t(j)]; }

  MapAtLambda at(std::span<const cplx> lambda) const {
    MapAtLambda m;
    m.deg = degree_;
    m.dim = dim_;
    double coeff_sum = 0.0;
    for (int i = 0; i <= degree_; ++i) {
      m.a[std::size_t(i)] = coeff_[std::size_t(i)].eval(lambda);
      coeff_sum += std::abs(m.a[std::size_t(i)]);
      for (int t = 0; t < dim_; ++t)
        m.da[std::size_t(i)][std::size_t(t)] =
            dcoeff_[std::size_t(i)][std::size_t(t)].eval(lambda);
    }
    const double lead = std::abs(m.a[std::size_t(degree_)]);
    m.escape_radius = 2.0 * std::max(1.0, coeff_sum / lead);
    return m;
  }

  cplx critical_value(int j, std::span<const cplx> lambda) const {
    return crit_[std::size_t(j)].eval(lambda);
  }

  Jet critical_jet(int j, std::span<const cplx> lambda) const {
    Jet r;
    r.dim = dim_;
    r.v = crit_[std::size_t(j)].eval(lambda);
    for (int t = 0; t < dim_; ++t)
      r.d[std::size_t(t)] = dcrit_[std::size_t(j)][std::size_t(t)].eval(lambda);
    return r;
  }

 private:
  void validate() const {
    Rng rng(0x6a11e7);
    std::vector<cplx> lam(static_cast<std::size_t>(dim_));
    for (int s = 0; s < 24; ++s) {
      for (auto& l : lam) l = rng.in_disk(0.0, domain_radius_);
      const MapAtLambda m = at(lam);
      if (std::abs(m.a[std::size_t(degree_)]) <= 0.0)
        throw std::invalid_argument("leading coefficient vanishes in domain");
      double scale = 0.0;
      for (int i = 0; i <= degree_; ++i) scale += std::abs(m.a[std::size_t(i)]);
      for (int j = 0; j < num_critical(); ++j) {
        const cplx c = critical_value(j, lam);
        const double grow = std::pow(std::max(1.0, std::abs(c)), degree_ - 1);
        if (std::abs(m.dz(c)) > 1e-12 * degree_ * scale * grow)
          throw std::invalid_argument(
              "marked point is not critical on sampled domain");
      }
    }
  }

  std::string name_;
  int degree_;
  int dim_;
  std::vector<MultiPoly> coeff_;
  std::vector<MultiPoly> crit_;
  std::vector<std::vector<MultiPoly>> dcoeff_;
  std::vector<std::vector<MultiPoly>> dcrit_;
  double domain_radius_;
};

// ---------------------------------------------------------------------------
// Operations

/// One application of f_lambda. Throws on non-finite input; overflow to
/// non-finite raises IterateOverflowError naming the (single) iterate.
inline cplx eval_map(const FamilySpec& fam, std::span<const cplx> lambda,
                     cplx z) {
  if (!is_finite(z)) throw std::invalid_argument("eval_map: non-finite input");
  const cplx w = fam.at(lambda).eval(z);
  if (!is_finite(w)) throw IterateOverflowError(1);
  return w;
}

struct OrbitJetResult {
  Jet jet;
  bool overflow = false;
  int escape_iter = -1;  // iterate at which |z| crossed the overflow guard
};

/// f_lambda^n(c_j(lambda)) together with its exact parameter-derivatives,
/// by forward-mode propagation through the iteration.
inline OrbitJetResult orbit_jet(const FamilySpec& fam,
                                std::span<const cplx> lambda, int j, int n) {
  if (n < 0) throw std::invalid_argument("orbit_jet: n must be >= 0");
  if (j < 0 || j >= fam.num_critical())
    throw std::invalid_argument("orbit_jet: critical index out of range");
  const MapAtLambda m = fam.at(lambda);
  OrbitJetResult out;
  out.jet = fam.critical_jet(j, lambda);
  for (int k = 0; k < n; ++k) {
    out.jet = m.eval_jet(out.jet);
    if (std::abs(out.jet.v) > kOverflowGuard || !is_finite(out.jet.v)) {
      out.overflow = true;
      out.escape_iter = k + 1;
      return out;
    }
  }
  return out;
}

/// Jets of f^n(c_j) and f^{n+extra}(c_j) from a single orbit pass.
inline std::pair<OrbitJetResult, OrbitJetResult> orbit_jet_pair(
    const FamilySpec& fam, std::span<const cplx> lambda, int j, int n,
    int extra) {
  const MapAtLambda m = fam.at(lambda);
  OrbitJetResult first, second;
  Jet z = fam.critical_jet(j, lambda);
  if (n == 0) first.jet = z;
  for (int k = 0; k < n + extra; ++k) {
    z = m.eval_jet(z);
    if (std::abs(z.v) > kOverflowGuard || !is_finite(z.v)) {
      first.overflow = second.overflow = true;
      first.escape_iter = second.escape_iter = k + 1;
      return {first, second};
    }
    if (k + 1 == n) first.jet = z;
  }
  second.jet = z;
  return {first, second};
}

/// f^m(z) and the z-derivative (f^m)'(z) by the chain rule.
inline std::pair<cplx, cplx> iterate_with_dz(const MapAtLambda& m, cplx z,
                                             int steps) {
  cplx v = z, dv = 1.0;
  for (int k = 0; k < steps; ++k) {
    dv *= m.dz(v);
    v = m.eval(v);
    if (!is_finite(v) || std::abs(v) > kOverflowGuard)
      throw IterateOverflowError(k + 1);
  }
  return {v, dv};
}

/// Product of f' along the m-orbit of p. Requires |f^m(p) - p| below the
/// residual tolerance; otherwise throws NotACycleError with the residual.
inline cplx cycle_multiplier(const FamilySpec& fam,
                             std::span<const cplx> lambda, cplx p, int m,
                             double tol_residual = 1e-8) {
  const MapAtLambda f = fam.at(lambda);
  auto [v, dv] = iterate_with_dz(f, p, m);
  const double residual = std::abs(v - p);
  if (residual > tol_residual) throw NotACycleError(residual, tol_residual);
  return dv;
}

struct PeriodicPoint {
  cplx point;
  cplx multiplier;
  int multiplicity = 1;
};

/// All solutions of f_lambda^m(z) = z with multiplicity (count = d^m),
/// each annotated with its cycle multiplier.
inline std::vector<PeriodicPoint> periodic_points(
    const FamilySpec& fam, std::span<const cplx> lambda, int m,
    std::size_t degree_cap = std::size_t(1) << 14) {
  if (m < 1) throw std::invalid_argument("periodic_points: m must be >= 1");
  double dm = std::pow(double(fam.degree()), m);
  if (dm > double(degree_cap))
    throw CapacityError("periodic_points: degree cap exceeded");

  const MapAtLambda f = fam.at(lambda);
  // Coefficients of f^m(z) by repeated Horner composition in poly space.
  DensePolynomial w = DensePolynomial::identity();
  for (int k = 0; k < m; ++k) {
    DensePolynomial acc = DensePolynomial::constant(f.a[std::size_t(f.deg)]);
    for (int i = f.deg - 1; i >= 0; --i)
      acc = acc * w + DensePolynomial::constant(f.a[std::size_t(i)]);
    w = acc;
  }
  DensePolynomial F = w - DensePolynomial::identity();
  RootSet rs = all_roots(F, 1e-13);

  // Polish through the iteration itself; monomial coefficients lose accuracy
  // as m grows while the orbit evaluation does not.
  std::vector<cplx> polished;
  polished.reserve(rs.roots.size() * 2);
  for (const RootCluster& rc : rs.roots) {
    for (int copy = 0; copy < rc.multiplicity; ++copy) {
      cplx z = rc.root;
      for (int it = 0; it < 5; ++it) {
        try {
          auto [v, dv] = iterate_with_dz(f, z, m);
          const cplx den = dv - 1.0;
          if (std::abs(den) < 1e-14) break;
          const cplx step = (v - z) / den;
          if (std::abs(step) > 0.1 * (1.0 + std::abs(z))) break;
          z -= step;
        } catch (const IterateOverflowError&) {
          break;
        }
      }
      polished.push_back(z);
    }
  }
  std::vector<RootCluster> merged = cluster_roots(std::move(polished));

  std::vector<PeriodicPoint> out;
  out.reserve(merged.size());
  for (const RootCluster& rc : merged) {
    auto [v, dv] = iterate_with_dz(f, rc.root, m);
    (void)v;
    out.push_back({rc.root, dv, rc.multiplicity});
  }
  return out;
}

}  // namespace biflab
