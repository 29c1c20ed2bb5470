#pragma once

// Post-critical value distribution: solving f_l^n(c_j(l)) = z_j over the
// parameter, normalized solution clouds with weight d^{-nk}, and dyadic
// discrepancy reports against a reference density and between targets.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "biflab/family.hpp"
#include "biflab/measure.hpp"
#include "biflab/misiurewicz.hpp"
#include "biflab/parallel.hpp"
#include "biflab/poly.hpp"
#include "biflab/potential.hpp"
#include "biflab/rng.hpp"

namespace biflab {

struct TargetTuple {
  enum class Provenance { user, pseudorandom };
  std::vector<cplx> z;
  Provenance provenance = Provenance::user;
  std::uint64_t seed = 0;
  bool near_exceptional = false;
};

/// Critical values of low iterates over a fixed probe set of parameters;
/// targets this close to the post-critical set get flagged.
inline std::vector<cplx> exceptional_candidates(const FamilySpec& fam,
                                                int iterate_cap = 6) {
  std::vector<cplx> out;
  Rng rng(0xec);
  for (int probe = 0; probe < 6; ++probe) {
    std::vector<cplx> lam(static_cast<std::size_t>(fam.param_dim()));
    if (probe > 0)
      for (auto& l : lam) l = rng.in_disk(0.0, 1.0);
    const MapAtLambda f = fam.at(lam);
    for (int j = 0; j < fam.num_critical(); ++j) {
      cplx z = fam.critical_value(j, lam);
      for (int it = 1; it <= iterate_cap; ++it) {
        z = f.eval(z);
        if (!is_finite(z) || std::abs(z) > 1e6) break;
        out.push_back(z);
      }
    }
  }
  return out;
}

inline void flag_exceptional(const FamilySpec& fam, TargetTuple& t,
                             double radius = 1e-6) {
  t.near_exceptional = false;
  for (cplx v : exceptional_candidates(fam))
    for (cplx z : t.z)
      if (std::abs(z - v) < radius) t.near_exceptional = true;
}

/// k pseudorandom targets in the disk of the given radius, flagged against
/// the exceptional candidates.
inline TargetTuple make_pseudorandom_targets(const FamilySpec& fam,
                                             std::uint64_t seed,
                                             double radius = 2.0) {
  TargetTuple t;
  t.provenance = TargetTuple::Provenance::pseudorandom;
  t.seed = seed;
  Rng rng(seed);
  for (int j = 0; j < fam.num_critical(); ++j)
    t.z.push_back(rng.in_disk(0.0, radius));
  flag_exceptional(fam, t);
  return t;
}

struct SolveConfig {
  std::size_t degree_cap = 4096;  // one-parameter path
  int n_cap_2d = 6;               // two-parameter path
  Rect box{-2.0, 2.0, -2.0, 2.0}; // seed box per coordinate (two-parameter)
  int seeds_per_axis = 10;
  double newton_tol = 1e-12;
};

struct SolveResult {
  PointMeasure cloud;
  long count_with_multiplicity = 0;
  long expected_degree = -1;     // exact, one-parameter path only
  double resolved_fraction = 1;  // two-parameter path
  bool degraded = false;
};

namespace detail {

/// Newton ratio (f^n(c_j) - a) / (d/dl f^n(c_j)) for one-parameter
/// families, stable under escape: once |w| passes 1e20 the remaining steps
/// follow the leading-term quotient recurrence q -> d q + a_d'/a_d, and the
/// ratio is 1/q.
inline cplx preimage_newton_ratio(const FamilySpec& fam, cplx l, int j, int n,
                                  cplx a) {
  const std::array<cplx, 1> lam{l};
  const MapAtLambda f = fam.at(lam);
  Jet w = fam.critical_jet(j, lam);
  int k = 0;
  for (; k < n; ++k) {
    if (std::abs(w.v) > 1e20) break;
    w = f.eval_jet(w);
    if (!is_finite(w.v)) return cplx(0.0);
  }
  if (k == n) {
    if (std::abs(w.d[0]) < 1e-290) return cplx(0.0);
    return (w.v - a) / w.d[0];
  }
  cplx q = w.d[0] / w.v;
  const cplx corr =
      f.da[std::size_t(f.deg)][0] / f.a[std::size_t(f.deg)];
  for (; k < n; ++k) q = double(f.deg) * q + corr;
  if (std::abs(q) < 1e-290) return cplx(0.0);
  return 1.0 / q;
}

}  // namespace detail

/// Solutions of f^n(c_j(l)) = z_j with weights d^{-n k}. One-parameter
/// families get the complete root set of the defining equation (evaluated
/// through the iteration, never through monomial coefficients); the
/// two-parameter path runs Newton from a subdivision grid and reports the
/// resolved-cell fraction instead of completeness.
inline SolveResult solve_targets(const FamilySpec& fam, const TargetTuple& a,
                                 int n, const SolveConfig& cfg = {}) {
  if (int(a.z.size()) != fam.param_dim())
    throw std::invalid_argument(
        "solve_targets: target count must equal the parameter dimension");
  if (n < 1) throw std::invalid_argument("solve_targets: n must be >= 1");

  SolveResult out;
  const int k = fam.param_dim();
  const double weight_unit = std::pow(double(fam.degree()), -double(n * k));

  if (k == 1) {
    const long degree = preperiodic_poly_degree(fam, 0, n);
    if (degree > long(cfg.degree_cap))
      throw CapacityError("solve_targets: degree cap exceeded");
    out.expected_degree = degree;
    const cplx target = a.z[0];
    auto ratio = [&fam, n, target](cplx l) {
      return detail::preimage_newton_ratio(fam, l, 0, n, target);
    };
    AberthOptions opt;
    opt.tol = 1e-13;
    const double radius = 2.5 + std::abs(target);
    AberthResult ar = aberth_solve(int(degree), ratio, radius, opt);
    // polish and merge
    parallel_for(ar.roots.size(), [&](std::size_t i) {
      cplx z = ar.roots[i];
      for (int it = 0; it < 3; ++it) {
        const cplx r = ratio(z);
        if (!is_finite(r) || std::abs(r) > 0.1 * (1.0 + std::abs(z))) break;
        z -= r;
      }
      ar.roots[i] = z;
    });
    std::vector<RootCluster> merged = cluster_roots(std::move(ar.roots));
    out.cloud.point_dim = 1;
    for (const RootCluster& rc : merged) {
      out.cloud.push(rc.root, weight_unit * rc.multiplicity);
      out.count_with_multiplicity += rc.multiplicity;
    }
    return out;
  }

  // two-parameter subdivision + Newton
  if (n > cfg.n_cap_2d)
    throw CapacityError("solve_targets: n above the two-parameter cap");
  const int sa = cfg.seeds_per_axis;
  const std::size_t cells = std::size_t(sa) * std::size_t(sa) *
                            std::size_t(sa) * std::size_t(sa);
  std::vector<std::vector<cplx>> found;
  std::vector<std::uint8_t> resolved(cells, 0);
  std::vector<std::vector<cplx>> cell_solution(cells);
  parallel_for(cells, [&](std::size_t idx) {
    std::size_t rest = idx;
    const int i3 = int(rest % std::size_t(sa)); rest /= std::size_t(sa);
    const int i2 = int(rest % std::size_t(sa)); rest /= std::size_t(sa);
    const int i1 = int(rest % std::size_t(sa)); rest /= std::size_t(sa);
    const int i0 = int(rest);
    auto coord = [&](int i, bool im) {
      const double lo = im ? cfg.box.im_lo : cfg.box.re_lo;
      const double hi = im ? cfg.box.im_hi : cfg.box.re_hi;
      return lo + (double(i) + 0.5) * (hi - lo) / double(sa);
    };
    std::vector<cplx> x{cplx(coord(i0, false), coord(i1, true)),
                        cplx(coord(i2, false), coord(i3, true))};
    std::vector<cplx> F(2), J(4), step;
    for (int it = 0; it < 60; ++it) {
      bool overflow = false;
      for (int j = 0; j < 2 && !overflow; ++j) {
        OrbitJetResult r = orbit_jet(fam, x, j, n);
        if (r.overflow) {
          overflow = true;
          break;
        }
        F[std::size_t(j)] = r.jet.v - a.z[std::size_t(j)];
        J[std::size_t(2 * j)] = r.jet.d[0];
        J[std::size_t(2 * j + 1)] = r.jet.d[1];
      }
      if (overflow) return;
      double fn = 0;
      for (const cplx& v : F) fn = std::max(fn, std::abs(v));
      if (fn <= cfg.newton_tol) {
        cell_solution[idx] = x;
        resolved[idx] = 1;
        return;
      }
      if (!detail::solve_dense(J, F, 2, step)) return;
      for (int t = 0; t < 2; ++t) {
        x[std::size_t(t)] -= step[std::size_t(t)];
        if (!is_finite(x[std::size_t(t)]) || std::abs(x[std::size_t(t)]) > 1e8)
          return;
      }
    }
  });
  long resolved_count = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (!resolved[i]) continue;
    ++resolved_count;
    bool dup = false;
    for (const auto& y : found) {
      double d = 0;
      for (int t = 0; t < 2; ++t)
        d = std::max(d, std::abs(cell_solution[i][std::size_t(t)] -
                                 y[std::size_t(t)]));
      if (d < 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) found.push_back(cell_solution[i]);
  }
  out.cloud.point_dim = 2;
  for (const auto& x : found) {
    out.cloud.push(std::span<const cplx>(x.data(), 2), weight_unit);
    out.count_with_multiplicity += 1;
  }
  out.resolved_fraction = double(resolved_count) / double(cells);
  out.degraded = (1.0 - out.resolved_fraction) > 0.2;
  return out;
}

struct ReportRow {
  int n = 0;
  int target_id = 0;
  long count = 0;
  double mass = 0;
  double vs_reference = 0;
  std::vector<double> mutual;  // one entry per other target id, same n
};

struct ConvergenceReport {
  std::vector<TargetTuple> targets;
  std::vector<int> n_values;
  int levels = 4;
  std::vector<ReportRow> rows;
  double fraction_decreasing = 0;  // of consecutive vs_reference decreases
};

/// Discrepancy table of solution clouds against a reference density and
/// against each other, for n in [n_lo, n_hi].
inline ConvergenceReport convergence_report(const FamilySpec& fam,
                                            std::vector<TargetTuple> targets,
                                            int n_lo, int n_hi,
                                            const DensityField& reference,
                                            int levels = 4,
                                            const SolveConfig& cfg = {}) {
  if (targets.size() < 2)
    throw std::invalid_argument("convergence_report: need >= 2 targets");
  if (n_hi < n_lo)
    throw std::invalid_argument("convergence_report: empty n range");

  std::vector<Rect> box;
  for (const AxisSpec& ax : reference.grid.axes()) box.push_back(ax.bounds);

  ConvergenceReport rep;
  rep.targets = targets;
  rep.levels = levels;
  for (int n = n_lo; n <= n_hi; ++n) rep.n_values.push_back(n);

  std::vector<std::vector<PointMeasure>> clouds(
      targets.size(), std::vector<PointMeasure>());
  for (std::size_t t = 0; t < targets.size(); ++t)
    for (int n = n_lo; n <= n_hi; ++n)
      clouds[t].push_back(solve_targets(fam, targets[t], n, cfg).cloud);

  int decreases = 0, pairs = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double prev = -1;
    for (int n = n_lo; n <= n_hi; ++n) {
      const PointMeasure& mu = clouds[t][std::size_t(n - n_lo)];
      ReportRow row;
      row.n = n;
      row.target_id = int(t);
      row.count = long(mu.size());
      row.mass = mu.weight_sum();
      row.vs_reference = discrepancy(mu, reference, box, levels);
      for (std::size_t o = 0; o < targets.size(); ++o) {
        if (o == t) continue;
        row.mutual.push_back(
            discrepancy(mu, clouds[o][std::size_t(n - n_lo)], box, levels));
      }
      if (prev >= 0) {
        ++pairs;
        if (row.vs_reference < prev) ++decreases;
      }
      prev = row.vs_reference;
      rep.rows.push_back(std::move(row));
    }
  }
  rep.fraction_decreasing = pairs > 0 ? double(decreases) / pairs : 0.0;
  return rep;
}

}  // namespace biflab
