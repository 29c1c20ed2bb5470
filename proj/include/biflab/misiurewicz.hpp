#pragma once

// Finding and certifying parameters where marked critical points fall
// strictly and transversely onto repelling cycles. The defining system is
//   F_j(l) = f_l^{n_j + m_j}(c_j(l)) - f_l^{n_j}(c_j(l)),   j = 1..k,
// solved by Newton with exact parameter-jets, then certified: residual,
// repelling multiplier, strict preperiod, transversality determinant, and
// an integer local intersection index cross-checking the determinant.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "biflab/family.hpp"
#include "biflab/grid.hpp"
#include "biflab/poly.hpp"
#include "biflab/rng.hpp"

namespace biflab {

struct PreperiodicPair {
  int preperiod = 1;  // n_j >= 1
  int period = 1;     // m_j >= 1
  bool operator==(const PreperiodicPair&) const = default;
};
using PreperiodicSpec = std::vector<PreperiodicPair>;

struct CertifyConfig {
  double tol_residual = 1e-10;
  double delta_repelling = 1e-6;    // accept only |mu| > 1 + delta
  double delta_strict = 1e-6;       // "falls onto", never "lies on"
  double delta_transversal = 1e-8;  // on |det D(C-P)|
  double index_radius = 1e-4;
  int index_samples = 512;
};

struct MisiurewiczCertificate {
  std::vector<cplx> lambda;
  PreperiodicSpec spec;
  std::vector<double> residuals;
  std::vector<cplx> cycle_points;  // p_j = f^{n_j}(c_j)
  std::vector<cplx> multipliers;   // of the m_j-cycles
  std::vector<double> strictness;  // dist(f^{n_j-1}(c_j), cycle)
  cplx det_jacobian;               // det DF = prod(mu_j - 1) * det D(C-P)
  cplx det_graph;                  // det D(C-P)
  int intersection_index = 0;
  int newton_iterations = 0;
  std::uint64_t seed = 0;
};

enum class RejectReason {
  residual,
  not_repelling,
  not_strict,
  preperiod_not_minimal,
  not_transversal,
  index_inconclusive,
  orbit_overflow,
};

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::residual:
      return "residual above tolerance";
    case RejectReason::not_repelling:
      return "cycle not repelling";
    case RejectReason::not_strict:
      return "critical orbit lies on the cycle";
    case RejectReason::preperiod_not_minimal:
      return "preperiod not minimal";
    case RejectReason::not_transversal:
      return "graphs not transverse";
    case RejectReason::index_inconclusive:
      return "intersection index inconclusive";
    case RejectReason::orbit_overflow:
      return "orbit overflow";
  }
  return "?";
}

struct Rejection {
  RejectReason reason;
  double measured = 0;
};

struct CertifyResult {
  std::optional<MisiurewiczCertificate> certificate;
  std::optional<Rejection> rejection;
  bool accepted() const { return certificate.has_value(); }
};

namespace detail {

/// Gaussian elimination with full pivoting for the k x k complex systems
/// of this module (k <= kMaxParams). Returns false when the pivot decay
/// indicates effective singularity (condition proxy above cond_cap).
inline bool solve_dense(std::vector<cplx> A, std::vector<cplx> b, int k,
                        std::vector<cplx>& x, double cond_cap = 1e12) {
  std::vector<int> col(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) col[std::size_t(i)] = i;
  double first_pivot = 0;
  for (int step = 0; step < k; ++step) {
    int pr = step, pc = step;
    double best = -1;
    for (int r = step; r < k; ++r)
      for (int c = step; c < k; ++c) {
        const double a = std::abs(A[std::size_t(r * k + c)]);
        if (a > best) {
          best = a;
          pr = r;
          pc = c;
        }
      }
    if (step == 0) first_pivot = best;
    if (best <= 0 || first_pivot / best > cond_cap) return false;
    if (pr != step) {
      for (int c = 0; c < k; ++c)
        std::swap(A[std::size_t(step * k + c)], A[std::size_t(pr * k + c)]);
      std::swap(b[std::size_t(step)], b[std::size_t(pr)]);
    }
    if (pc != step) {
      for (int r = 0; r < k; ++r)
        std::swap(A[std::size_t(r * k + step)], A[std::size_t(r * k + pc)]);
      std::swap(col[std::size_t(step)], col[std::size_t(pc)]);
    }
    const cplx piv = A[std::size_t(step * k + step)];
    for (int r = step + 1; r < k; ++r) {
      const cplx f = A[std::size_t(r * k + step)] / piv;
      if (f == cplx(0.0)) continue;
      for (int c = step; c < k; ++c)
        A[std::size_t(r * k + c)] -= f * A[std::size_t(step * k + c)];
      b[std::size_t(r)] -= f * b[std::size_t(step)];
    }
  }
  std::vector<cplx> y(static_cast<std::size_t>(k));
  for (int r = k - 1; r >= 0; --r) {
    cplx s = b[std::size_t(r)];
    for (int c = r + 1; c < k; ++c)
      s -= A[std::size_t(r * k + c)] * y[std::size_t(c)];
    y[std::size_t(r)] = s / A[std::size_t(r * k + r)];
  }
  x.assign(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i)
    x[std::size_t(col[std::size_t(i)])] = y[std::size_t(i)];
  return true;
}

inline cplx det_k(const std::vector<cplx>& M, int k) {
  if (k == 1) return M[0];
  if (k == 2) return M[0] * M[3] - M[1] * M[2];
  cplx det = 0.0;
  std::vector<cplx> minor(static_cast<std::size_t>((k - 1) * (k - 1)));
  double sign = 1.0;
  for (int c = 0; c < k; ++c) {
    int mi = 0;
    for (int r = 1; r < k; ++r)
      for (int cc = 0; cc < k; ++cc)
        if (cc != c) minor[std::size_t(mi++)] = M[std::size_t(r * k + cc)];
    det += sign * M[std::size_t(c)] * det_k(minor, k - 1);
    sign = -sign;
  }
  return det;
}

/// F(l) and its Jacobian, rows indexed by critical point. Returns false on
/// orbit overflow (the caller treats the parameter as escaped).
inline bool eval_preperiodic_system(const FamilySpec& fam,
                                    const PreperiodicSpec& spec,
                                    std::span<const cplx> lambda,
                                    std::vector<cplx>& F,
                                    std::vector<cplx>& J) {
  const int k = int(spec.size());
  F.assign(static_cast<std::size_t>(k), 0.0);
  J.assign(static_cast<std::size_t>(k * k), 0.0);
  for (int j = 0; j < k; ++j) {
    const auto [at_n, at_nm] =
        orbit_jet_pair(fam, lambda, j, spec[std::size_t(j)].preperiod,
                       spec[std::size_t(j)].period);
    if (at_nm.overflow) return false;
    const Jet diff = at_nm.jet - at_n.jet;
    F[std::size_t(j)] = diff.v;
    for (int t = 0; t < k; ++t)
      J[std::size_t(j * k + t)] = diff.d[std::size_t(t)];
  }
  return true;
}

}  // namespace detail

/// Smallest (preperiod, period) consistent with the orbit at a solved
/// parameter: the period drops to its smallest divisor realizing the cycle,
/// the preperiod to the first iterate landing on it. Solutions found while
/// sweeping a deep spec get certified under their own minimal spec.
inline PreperiodicSpec reduce_spec(const FamilySpec& fam,
                                   std::span<const cplx> lambda,
                                   const PreperiodicSpec& spec,
                                   double tol = 1e-9) {
  const MapAtLambda f = fam.at(lambda);
  PreperiodicSpec out = spec;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const int n = spec[j].preperiod, m = spec[j].period;
    std::vector<cplx> v(static_cast<std::size_t>(n + m + 1));
    v[0] = fam.critical_value(int(j), lambda);
    bool overflow = false;
    for (int s = 1; s <= n + m; ++s) {
      v[std::size_t(s)] = f.eval(v[std::size_t(s - 1)]);
      if (!is_finite(v[std::size_t(s)]) ||
          std::abs(v[std::size_t(s)]) > kOverflowGuard) {
        overflow = true;
        break;
      }
    }
    if (overflow) continue;
    int m_min = m;
    for (int d = 1; d < m; ++d) {
      if (m % d != 0) continue;
      if (std::abs(v[std::size_t(n + d)] - v[std::size_t(n)]) <=
          tol * (1.0 + std::abs(v[std::size_t(n)]))) {
        m_min = d;
        break;
      }
    }
    int n_min = n;
    for (int s = 1; s < n; ++s) {
      if (s + m_min > n + m) break;
      if (std::abs(v[std::size_t(s + m_min)] - v[std::size_t(s)]) <=
          tol * (1.0 + std::abs(v[std::size_t(s)]))) {
        n_min = s;
        break;
      }
    }
    out[j] = {n_min, m_min};
  }
  return out;
}

struct NewtonOutcome {
  enum class Fail { none, diverged, singular, overflow };
  bool ok = false;
  Fail fail = Fail::none;
  std::vector<cplx> lambda;
  int iterations = 0;
  double residual = 0;
};

/// Newton on the preperiodicity system from one seed. Success requires both
/// the residual and the last step below tol.
inline NewtonOutcome newton_solve(const FamilySpec& fam,
                                  const PreperiodicSpec& spec,
                                  std::span<const cplx> lambda0,
                                  double tol = 1e-12, int max_iter = 64) {
  const int k = int(spec.size());
  if (k != fam.param_dim())
    throw std::invalid_argument(
        "newton_solve: spec length must equal the parameter dimension");
  for (const auto& p : spec)
    if (p.preperiod < 1 || p.period < 1)
      throw std::invalid_argument(
          "newton_solve: preperiod and period must be >= 1");
  for (cplx l : lambda0)
    if (!is_finite(l))
      throw std::invalid_argument("newton_solve: non-finite seed");

  NewtonOutcome out;
  out.lambda.assign(lambda0.begin(), lambda0.end());
  std::vector<cplx> F, J, step;
  double last_step = 1e300;
  for (int it = 0; it <= max_iter; ++it) {
    if (!detail::eval_preperiodic_system(fam, spec, out.lambda, F, J)) {
      out.fail = NewtonOutcome::Fail::overflow;
      out.iterations = it;
      return out;
    }
    double fn = 0;
    for (cplx v : F) fn = std::max(fn, std::abs(v));
    out.residual = fn;
    out.iterations = it;
    if (fn <= tol && last_step <= tol) {
      out.ok = true;
      return out;
    }
    if (it == max_iter) break;
    if (!detail::solve_dense(J, F, k, step)) {
      out.fail = NewtonOutcome::Fail::singular;
      return out;
    }
    double sn = 0;
    for (int t = 0; t < k; ++t) {
      out.lambda[std::size_t(t)] -= step[std::size_t(t)];
      sn = std::max(sn, std::abs(step[std::size_t(t)]));
      if (!is_finite(out.lambda[std::size_t(t)]) ||
          std::abs(out.lambda[std::size_t(t)]) > 1e8) {
        out.fail = NewtonOutcome::Fail::diverged;
        return out;
      }
    }
    last_step = sn;
  }
  out.fail = NewtonOutcome::Fail::diverged;
  return out;
}

struct IndexResult {
  int index = 0;
  double drift = 0;
  bool ok = false;
};

/// Local intersection index at an isolated solution of the system.
/// k = 1: winding number of F around the circle (trapezoidal argument sums;
/// the drift from an integer and agreement at twice the radius validate the
/// count). k = 2: solutions of F = eps counted for 3 generic probes with
/// |eps| scaled by radius^2.
inline IndexResult local_intersection_index(const FamilySpec& fam,
                                            const PreperiodicSpec& spec,
                                            std::span<const cplx> lambda,
                                            double radius, int samples = 512,
                                            std::uint64_t seed = 0x1d7) {
  constexpr double kTau = 6.283185307179586476925;
  IndexResult out;
  const int k = int(spec.size());
  std::vector<cplx> F, J;
  if (k == 1) {
    samples = std::max(samples, 256);
    auto eval = [&](cplx l) -> cplx {
      const std::vector<cplx> lam1{l};
      if (!detail::eval_preperiodic_system(fam, spec, lam1, F, J))
        return cplx(std::nan(""), 0.0);
      return F[0];
    };
    const WindingResult w1 = winding_number(eval, lambda[0], radius, samples);
    const WindingResult w2 =
        winding_number(eval, lambda[0], 2.0 * radius, samples);
    out.drift = std::max(w1.drift, w2.drift);
    if (!w1.ok || !w2.ok || w1.turns != w2.turns) return out;
    out.index = w1.turns;
    out.ok = out.index >= 1;
    return out;
  }

  // k = 2 probe counting
  Rng rng(seed);
  int counts = 0;
  for (int probe = 0; probe < 3; ++probe) {
    std::vector<cplx> eps(static_cast<std::size_t>(k));
    for (auto& e : eps)
      e = std::polar(radius * radius, rng.uniform(0.0, kTau));
    std::vector<std::vector<cplx>> sols;
    const int seeds = 40;
    for (int s = 1; s <= seeds; ++s) {
      std::vector<cplx> x(lambda.begin(), lambda.end());
      for (int t = 0; t < k; ++t)
        x[std::size_t(t)] += halton_disk(std::uint64_t(s), 0.0, radius, t);
      bool converged = false;
      for (int it = 0; it < 48; ++it) {
        if (!detail::eval_preperiodic_system(fam, spec, x, F, J)) break;
        std::vector<cplx> rhs(static_cast<std::size_t>(k));
        double fn = 0;
        for (int t = 0; t < k; ++t) {
          rhs[std::size_t(t)] = F[std::size_t(t)] - eps[std::size_t(t)];
          fn = std::max(fn, std::abs(rhs[std::size_t(t)]));
        }
        if (fn < 1e-11) {
          converged = true;
          break;
        }
        std::vector<cplx> step;
        if (!detail::solve_dense(J, rhs, k, step)) break;
        for (int t = 0; t < k; ++t) x[std::size_t(t)] -= step[std::size_t(t)];
      }
      if (!converged) continue;
      double dist = 0;
      for (int t = 0; t < k; ++t)
        dist = std::max(dist, std::abs(x[std::size_t(t)] - lambda[std::size_t(t)]));
      if (dist > radius) continue;
      bool dup = false;
      for (const auto& y : sols) {
        double d = 0;
        for (int t = 0; t < k; ++t)
          d = std::max(d, std::abs(x[std::size_t(t)] - y[std::size_t(t)]));
        if (d < 1e-9) dup = true;
      }
      if (!dup) sols.push_back(std::move(x));
    }
    counts += int(sols.size());
  }
  out.index = int(std::lround(double(counts) / 3.0));
  out.ok = out.index >= 1;
  return out;
}

/// Full certification of a solved parameter. Every failed check produces a
/// typed rejection with the measured value.
inline CertifyResult certify(const FamilySpec& fam,
                             std::span<const cplx> lambda,
                             const PreperiodicSpec& spec,
                             const CertifyConfig& cfg = {}) {
  const int k = int(spec.size());
  if (k != fam.param_dim())
    throw std::invalid_argument(
        "certify: spec length must equal the parameter dimension");

  CertifyResult out;
  auto reject = [&](RejectReason r, double measured) {
    out.rejection = Rejection{r, measured};
    return out;
  };

  const MapAtLambda f = fam.at(lambda);
  MisiurewiczCertificate cert;
  cert.lambda.assign(lambda.begin(), lambda.end());
  cert.spec = spec;

  for (int j = 0; j < k; ++j) {
    const int n = spec[std::size_t(j)].preperiod;
    const int m = spec[std::size_t(j)].period;
    cplx w_pre = fam.critical_value(j, lambda);
    try {
      for (int s = 0; s < n - 1; ++s) w_pre = f.eval(w_pre);
      const cplx p = f.eval(w_pre);  // f^{n}(c_j)

      // cycle orbit, multiplier, residual
      std::vector<cplx> cyc(static_cast<std::size_t>(m));
      cplx z = p, mult = 1.0;
      for (int s = 0; s < m; ++s) {
        cyc[std::size_t(s)] = z;
        mult *= f.dz(z);
        z = f.eval(z);
        if (!is_finite(z) || std::abs(z) > kOverflowGuard)
          throw IterateOverflowError(s + 1);
      }
      const double residual = std::abs(z - p);
      if (residual > cfg.tol_residual)
        return reject(RejectReason::residual, residual);
      if (std::abs(mult) <= 1.0 + cfg.delta_repelling)
        return reject(RejectReason::not_repelling, std::abs(mult));

      // strictly preperiodic: f^{n-1}(c_j) stays off the cycle...
      double dist = 1e300;
      for (cplx q : cyc) dist = std::min(dist, std::abs(w_pre - q));
      if (dist <= cfg.delta_strict)
        return reject(RejectReason::not_strict, dist);
      // ...and n-1 does not already satisfy the equation
      cplx w2 = w_pre;
      for (int s = 0; s < m; ++s) w2 = f.eval(w2);
      const double minimality = std::abs(w2 - w_pre);
      if (minimality <= cfg.delta_strict)
        return reject(RejectReason::preperiod_not_minimal, minimality);

      cert.residuals.push_back(residual);
      cert.cycle_points.push_back(p);
      cert.multipliers.push_back(mult);
      cert.strictness.push_back(dist);
    } catch (const IterateOverflowError& e) {
      return reject(RejectReason::orbit_overflow, double(e.iterate()));
    }
  }

  // Jacobian of the defining system
  std::vector<cplx> F, J;
  if (!detail::eval_preperiodic_system(fam, spec, lambda, F, J))
    return reject(RejectReason::orbit_overflow, 0);
  cert.det_jacobian = detail::det_k(J, k);

  // D(C - P): continue each cycle point by the implicit-function derivative
  // Dp = (1 - mu)^{-1} d_lambda f^m (p), then subtract from DC = D f^n(c_j).
  std::vector<cplx> G(static_cast<std::size_t>(k * k));
  for (int j = 0; j < k; ++j) {
    const int n = spec[std::size_t(j)].preperiod;
    const int m = spec[std::size_t(j)].period;
    const auto [at_n, at_nm] = orbit_jet_pair(fam, lambda, j, n, m);
    if (at_nm.overflow) return reject(RejectReason::orbit_overflow, 0);
    Jet p_jet = Jet::constant(cert.cycle_points[std::size_t(j)], k);
    for (int s = 0; s < m; ++s) p_jet = f.eval_jet(p_jet);
    const cplx mu = cert.multipliers[std::size_t(j)];
    for (int t = 0; t < k; ++t) {
      const cplx dp = p_jet.d[std::size_t(t)] / (1.0 - mu);
      G[std::size_t(j * k + t)] = at_n.jet.d[std::size_t(t)] - dp;
    }
  }
  cert.det_graph = detail::det_k(G, k);

  if (std::abs(cert.det_graph) <= cfg.delta_transversal)
    return reject(RejectReason::not_transversal, std::abs(cert.det_graph));

  // integer cross-check of the determinant test
  IndexResult idx;
  double r = cfg.index_radius;
  for (int attempt = 0; attempt < 4 && !idx.ok; ++attempt, r *= 0.5)
    idx = local_intersection_index(fam, spec, lambda, r, cfg.index_samples);
  if (!idx.ok)
    return reject(RejectReason::index_inconclusive, idx.drift);
  cert.intersection_index = idx.index;
  if (idx.index != 1)
    return reject(RejectReason::index_inconclusive, double(idx.index));

  out.certificate = std::move(cert);
  return out;
}

// ---------------------------------------------------------------------------
// Complete enumeration in one-dimensional slices

struct RejectedRoot {
  cplx root;
  int multiplicity = 1;
  int intersection_index = 0;  // 0 when inconclusive
  Rejection rejection{RejectReason::residual, 0};
};

struct EnumerationResult {
  DensePolynomial F;  // the defining polynomial in the parameter
  std::vector<MisiurewiczCertificate> certificates;
  std::vector<RejectedRoot> rejected;
};

/// Exact lambda-degree of f^steps(c_j) for one-parameter families, from the
/// degree recursion e_{k+1} = max_i(deg a_i + i e_k); -1 denotes degree of
/// the zero polynomial.
inline long preperiodic_poly_degree(const FamilySpec& fam, int j, int steps) {
  long e = fam.critical_map(j).degree_in(0);  // -1 for the zero polynomial
  for (int s = 0; s < steps; ++s) {
    long best = fam.coefficient_map(0).degree_in(0);
    if (e >= 0) {
      // terms a_i w^i vanish identically while w == 0
      for (int i = 1; i <= fam.degree(); ++i) {
        const long da = fam.coefficient_map(i).degree_in(0);
        if (da >= 0) best = std::max(best, da + long(i) * e);
      }
    }
    e = best;
  }
  return e;
}

/// Builds F(l) = f^{n+m}(c) - f^n(c) as an explicit polynomial in the
/// parameter, finds all roots with multiplicity, certifies each, and
/// returns certificates plus the rejected-root ledger.
inline EnumerationResult enumerate_1d(const FamilySpec& fam, int n, int m,
                                      const Rect& box,
                                      std::size_t degree_cap = std::size_t(1)
                                                               << 14,
                                      const CertifyConfig& cfg = {}) {
  if (fam.param_dim() != 1)
    throw std::invalid_argument("enumerate_1d: one-parameter families only");
  if (n < 1 || m < 1)
    throw std::invalid_argument("enumerate_1d: n, m must be >= 1");
  const long deg_predict = preperiodic_poly_degree(fam, 0, n + m);
  if (deg_predict > long(degree_cap))
    throw CapacityError("enumerate_1d: degree cap exceeded");

  // polynomial orbit of the marked point
  auto to_dense = [](const MultiPoly& p) {
    std::vector<cplx> c;
    for (const auto& t : p.terms()) {
      const std::size_t e = t.exp[0];
      if (c.size() <= e) c.resize(e + 1, 0.0);
      c[e] += t.coef;
    }
    if (c.empty()) c.push_back(0.0);
    return DensePolynomial(std::move(c));
  };
  std::vector<DensePolynomial> coeff;
  for (int i = 0; i <= fam.degree(); ++i)
    coeff.push_back(to_dense(fam.coefficient_map(i)));
  DensePolynomial w = to_dense(fam.critical_map(0));
  DensePolynomial at_n;
  for (int s = 0; s < n + m; ++s) {
    if (s == n) at_n = w;
    DensePolynomial acc = coeff[std::size_t(fam.degree())];
    for (int i = fam.degree() - 1; i >= 0; --i)
      acc = acc * w + coeff[std::size_t(i)];
    w = acc;
  }

  EnumerationResult out;
  out.F = w - at_n;
  RootSet rs = all_roots(out.F, 1e-13);

  // polish through the orbit evaluation, which stays accurate where the
  // monomial basis loses digits
  const PreperiodicSpec spec{{n, m}};
  std::vector<cplx> flat;
  for (const RootCluster& rc : rs.roots) {
    cplx z = rc.root;
    std::vector<cplx> F, J;
    for (int it = 0; it < 6; ++it) {
      std::vector<cplx> l{z};
      if (!detail::eval_preperiodic_system(fam, spec, l, F, J)) break;
      if (std::abs(J[0]) < 1e-14) break;
      const cplx step = F[0] / J[0];
      if (std::abs(step) > 0.1 * (1.0 + std::abs(z))) break;
      z -= step;
    }
    for (int copy = 0; copy < rc.multiplicity; ++copy) flat.push_back(z);
  }
  std::vector<RootCluster> merged = cluster_roots(std::move(flat));

  for (const RootCluster& rc : merged) {
    if (!box.contains(rc.root)) continue;
    // index radius respecting the nearest sibling root
    double nearest = 1e300;
    for (const RootCluster& other : merged)
      if (std::abs(other.root - rc.root) > kClusterRadius)
        nearest = std::min(nearest, std::abs(other.root - rc.root));
    CertifyConfig local = cfg;
    local.index_radius = std::min(1e-2, nearest / 4.0);
    const std::vector<cplx> lam{rc.root};
    CertifyResult cr = certify(fam, lam, spec, local);
    if (cr.accepted()) {
      cr.certificate->newton_iterations = rs.sweeps;
      out.certificates.push_back(std::move(*cr.certificate));
    } else {
      RejectedRoot rr;
      rr.root = rc.root;
      rr.multiplicity = rc.multiplicity;
      rr.rejection = *cr.rejection;
      const IndexResult idx = local_intersection_index(
          fam, spec, lam, local.index_radius, cfg.index_samples);
      rr.intersection_index = idx.ok ? idx.index : 0;
      out.rejected.push_back(rr);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Budgeted search around a parameter

struct SearchConfig {
  int n_cap = 12;          // max preperiod
  int m_cap = 4;           // max period
  int sum_cap = 0;         // optional cap on n + m (0 = none)
  long budget = 10000;     // total Newton runs
  int seeds_per_spec = 0;  // 0 = split the budget evenly
  std::uint64_t seed = 1;
  double newton_tol = 1e-12;
  double dedupe_radius = 1e-9;
  CertifyConfig certify_cfg{};
};

struct SearchDiagnostics {
  long newton_runs = 0;
  long converged = 0;
  long in_ball = 0;
  long certified = 0;
  long rejected = 0;
};

struct SearchResult {
  std::vector<MisiurewiczCertificate> certificates;
  SearchDiagnostics diagnostics;
};

/// Sweeps preperiodic specs in increasing n+m (periods up to m_cap), seeding
/// Newton on a low-discrepancy grid in the ball around lambda0, keeping
/// certified solutions inside the ball. Runs out of budget quietly: an empty
/// result with diagnostics is a legitimate outcome.
inline SearchResult search_near(const FamilySpec& fam,
                                std::span<const cplx> lambda0, double radius,
                                const SearchConfig& cfg = {}) {
  if (!(radius > 0))
    throw std::invalid_argument("search_near: radius must be > 0");
  const int k = fam.param_dim();
  if (k > 2)
    throw std::invalid_argument("search_near: parameter dimension above 2");

  // spec sweep ordered by total complexity
  std::vector<PreperiodicSpec> sweep;
  if (k == 1) {
    for (int total = 2; total <= cfg.n_cap + cfg.m_cap; ++total)
      for (int m = 1; m <= std::min(cfg.m_cap, total - 1); ++m) {
        const int n = total - m;
        if (n < 1 || n > cfg.n_cap) continue;
        if (cfg.sum_cap > 0 && n + m > cfg.sum_cap) continue;
        sweep.push_back({{n, m}});
      }
  } else {
    for (int total = 4; total <= 2 * (cfg.n_cap + cfg.m_cap); ++total)
      for (int m1 = 1; m1 <= cfg.m_cap; ++m1)
        for (int m2 = 1; m2 <= cfg.m_cap; ++m2)
          for (int n1 = 1; n1 <= cfg.n_cap; ++n1) {
            const int n2 = total - m1 - m2 - n1;
            if (n2 < 1 || n2 > cfg.n_cap) continue;
            if (cfg.sum_cap > 0 &&
                (n1 + m1 > cfg.sum_cap || n2 + m2 > cfg.sum_cap))
              continue;
            sweep.push_back({{n1, m1}, {n2, m2}});
          }
  }
  if (sweep.empty()) return {};

  // Deeper specs hold exponentially more solutions in a fixed ball, so the
  // seed allocation grows with the total complexity. A flat override is
  // available through seeds_per_spec.
  std::vector<long> alloc(sweep.size(), 0);
  if (cfg.seeds_per_spec > 0) {
    for (auto& a : alloc) a = cfg.seeds_per_spec;
  } else {
    double wsum = 0;
    std::vector<double> w(sweep.size());
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      int total = 0;
      for (const auto& p : sweep[i]) total += p.preperiod + p.period;
      w[i] = std::pow(2.0, 0.5 * double(total));
      wsum += w[i];
    }
    for (std::size_t i = 0; i < sweep.size(); ++i)
      alloc[i] = std::max<long>(
          4, long(std::floor(double(cfg.budget) * w[i] / wsum)));
  }

  SearchResult out;
  std::vector<std::vector<cplx>> seen;  // certified and rejected solutions
  long budget = cfg.budget;
  std::uint64_t halton_base = cfg.seed % 4096;  // deterministic offset
  for (std::size_t spec_idx = 0; spec_idx < sweep.size(); ++spec_idx) {
    const PreperiodicSpec& spec = sweep[spec_idx];
    if (budget <= 0) break;
    const long runs = std::min<long>(alloc[spec_idx], budget);
    for (long s = 1; s <= runs; ++s) {
      std::vector<cplx> seed_pt(lambda0.begin(), lambda0.end());
      for (int t = 0; t < k; ++t)
        seed_pt[std::size_t(t)] +=
            halton_disk(halton_base + std::uint64_t(s), 0.0, radius, t);
      --budget;
      ++out.diagnostics.newton_runs;
      NewtonOutcome nr = newton_solve(fam, spec, seed_pt, cfg.newton_tol);
      if (!nr.ok) continue;
      ++out.diagnostics.converged;
      double dist = 0;
      for (int t = 0; t < k; ++t)
        dist = std::max(dist,
                        std::abs(nr.lambda[std::size_t(t)] - lambda0[std::size_t(t)]));
      if (dist > radius) continue;
      ++out.diagnostics.in_ball;
      bool dup = false;
      for (const auto& y : seen) {
        double d = 0;
        for (int t = 0; t < k; ++t)
          d = std::max(d, std::abs(y[std::size_t(t)] -
                                   nr.lambda[std::size_t(t)]));
        if (d < cfg.dedupe_radius) dup = true;
      }
      if (dup) continue;
      seen.push_back(nr.lambda);
      // near-parabolic orbits can shadow the cycle early, so a failed
      // reduction falls back to the sweep spec
      const PreperiodicSpec minimal = reduce_spec(fam, nr.lambda, spec);
      CertifyResult cr = certify(fam, nr.lambda, minimal, cfg.certify_cfg);
      if (!cr.accepted() && minimal != spec) {
        CertifyResult retry = certify(fam, nr.lambda, spec, cfg.certify_cfg);
        if (retry.accepted()) cr = std::move(retry);
      }
      if (cr.accepted()) {
        cr.certificate->newton_iterations = nr.iterations;
        cr.certificate->seed = cfg.seed;
        out.certificates.push_back(std::move(*cr.certificate));
        ++out.diagnostics.certified;
      } else {
        ++out.diagnostics.rejected;
      }
    }
    halton_base += std::uint64_t(runs);
  }
  return out;
}

}  // namespace biflab
