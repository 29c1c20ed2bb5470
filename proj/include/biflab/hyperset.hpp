#pragma once

// Hyperbolic Cantor sets carried by two univalent inverse branches of f^m
// on a ball B: construction by candidate search, binary-coded points,
// sampling of the balanced measure, and holomorphic motion of the whole
// system by stepwise re-anchoring.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biflab/family.hpp"
#include "biflab/measure.hpp"
#include "biflab/parallel.hpp"
#include "biflab/poly.hpp"
#include "biflab/rng.hpp"

namespace biflab {

struct BranchSystem {
  std::vector<cplx> lambda;
  int m = 1;
  cplx center;
  double radius = 0;
  std::array<cplx, 2> anchors{};  // f^m(anchor_i) = center
  std::array<std::vector<cplx>, 2> boundary_images;
  double margin = 0;      // distance of branch images to the sphere, / safety
  double separation = 0;  // distance between the two image closures, / safety
  double kappa = 1;       // contraction bound of the branches, * safety
  int boundary_samples = 64;

  /// Which branch cell a point belongs to (nearest verified image cloud).
  int classify_cell(cplx z) const {
    double best[2] = {1e300, 1e300};
    for (int b = 0; b < 2; ++b)
      for (cplx w : boundary_images[std::size_t(b)])
        best[b] = std::min(best[b], std::abs(z - w));
    return best[0] <= best[1] ? 0 : 1;
  }
};

struct CantorPoint {
  std::vector<std::uint8_t> code;  // symbols 0/1, first symbol outermost
  cplx z;
  int depth = 0;
  double residual_bound = 0;
  bool periodic = false;  // code interpreted as a repeating block
};

struct BranchSearchConfig {
  int m_cap = 4;
  int center_period_cap = 3;
  int ladder_len = 8;
  int boundary_samples = 64;
  double safety = 1.2;
  double derivative_floor = 1e-9;
  double newton_tol = 1e-13;
  // explicit candidate ball; when set, the search checks only this ball
  std::optional<std::pair<cplx, double>> ball;
};

struct BranchFailure {
  std::vector<std::string> diagnostics;
};

namespace detail {

/// All z with f^m(z) = target, polished through the orbit evaluation.
inline std::vector<cplx> iterate_preimages(const MapAtLambda& f, int m,
                                           cplx target) {
  DensePolynomial w = DensePolynomial::identity();
  for (int k = 0; k < m; ++k) {
    DensePolynomial acc = DensePolynomial::constant(f.a[std::size_t(f.deg)]);
    for (int i = f.deg - 1; i >= 0; --i)
      acc = acc * w + DensePolynomial::constant(f.a[std::size_t(i)]);
    w = acc;
  }
  RootSet rs = all_roots(w - DensePolynomial::constant(target), 1e-13);
  std::vector<cplx> out;
  for (const RootCluster& rc : rs.roots) {
    cplx z = rc.root;
    for (int it = 0; it < 4; ++it) {
      try {
        auto [v, dv] = iterate_with_dz(f, z, m);
        if (std::abs(dv) < 1e-14) break;
        const cplx step = (v - target) / dv;
        if (std::abs(step) > 0.1 * (1.0 + std::abs(z))) break;
        z -= step;
      } catch (const IterateOverflowError&) {
        break;
      }
    }
    for (int c = 0; c < rc.multiplicity; ++c) out.push_back(z);
  }
  return out;
}

/// Newton inversion of f^m: the solution of f^m(x) = w near the seed.
inline std::optional<cplx> invert_once(const MapAtLambda& f, int m, cplx w,
                                       cplx seed, double tol) {
  cplx x = seed;
  for (int it = 0; it < 60; ++it) {
    cplx v, dv;
    try {
      std::tie(v, dv) = iterate_with_dz(f, x, m);
    } catch (const IterateOverflowError&) {
      return std::nullopt;
    }
    if (std::abs(v - w) <= tol * (1.0 + std::abs(w))) return x;
    if (std::abs(dv) < 1e-290) return std::nullopt;
    const cplx step = (v - w) / dv;
    x -= step;
    if (!is_finite(x)) return std::nullopt;
  }
  return std::nullopt;
}

/// Inversion with a short radial continuation fallback for robustness.
inline std::optional<cplx> invert_branch(const MapAtLambda& f, int m, cplx w,
                                         cplx anchor, cplx center,
                                         double tol) {
  if (auto x = invert_once(f, m, w, anchor, tol)) return x;
  cplx seed = anchor;
  for (int s = 1; s <= 4; ++s) {
    const cplx wt = center + (double(s) / 4.0) * (w - center);
    auto x = invert_once(f, m, wt, seed, tol);
    if (!x) return std::nullopt;
    seed = *x;
  }
  return seed;
}

struct BranchProbe {
  bool ok = false;
  std::vector<cplx> images;  // boundary images
  double max_dist = 0;       // max |image - center|
  double kappa_raw = 0;      // max 1/|(f^m)'| on the boundary
  std::string error;
};

/// Walks the ball boundary through one inverse branch, checking Newton
/// convergence and a floor on |(f^m)'|.
inline BranchProbe probe_branch(const MapAtLambda& f, int m, cplx center,
                                double radius, cplx anchor,
                                const BranchSearchConfig& cfg) {
  constexpr double kTau = 6.283185307179586476925;
  BranchProbe out;
  out.images.reserve(std::size_t(cfg.boundary_samples));
  cplx seed = anchor;
  for (int s = 0; s < cfg.boundary_samples; ++s) {
    const cplx w =
        center + std::polar(radius, kTau * double(s) / cfg.boundary_samples);
    const auto x = s == 0 ? invert_branch(f, m, w, anchor, center, cfg.newton_tol)
                          : invert_once(f, m, w, seed, cfg.newton_tol);
    if (!x) {
      out.error = "inversion failed on the boundary";
      return out;
    }
    cplx v, dv;
    try {
      std::tie(v, dv) = iterate_with_dz(f, *x, m);
    } catch (const IterateOverflowError&) {
      out.error = "orbit overflow on the boundary";
      return out;
    }
    if (std::abs(dv) < cfg.derivative_floor) {
      out.error = "derivative of f^m below floor (branch not univalent)";
      return out;
    }
    seed = *x;
    out.images.push_back(*x);
    out.max_dist = std::max(out.max_dist, std::abs(*x - center));
    out.kappa_raw = std::max(out.kappa_raw, 1.0 / std::abs(dv));
  }
  out.ok = true;
  return out;
}

/// Winding of a sampled closed curve around a point (overlap detection).
inline int curve_winding(const std::vector<cplx>& curve, cplx p) {
  double total = 0;
  for (std::size_t s = 0; s <= curve.size(); ++s) {
    const cplx a = curve[s % curve.size()] - p;
    const cplx b = curve[(s + 1) % curve.size()] - p;
    if (std::abs(a) == 0.0 || std::abs(b) == 0.0) return 1;
    total += std::arg(b / a);
  }
  return int(std::lround(total / 6.283185307179586476925));
}

struct CandidateOutcome {
  bool ok = false;
  BranchSystem system;
  std::string error;
};

/// Assembles and verifies a branch system from two probed anchors.
inline CandidateOutcome verify_pair(std::span<const cplx> lambda, int m,
                                    cplx center, double radius, cplx a0,
                                    const BranchProbe& p0, cplx a1,
                                    const BranchProbe& p1,
                                    const BranchSearchConfig& cfg) {
  CandidateOutcome out;
  double sep = 1e300;
  for (cplx u : p0.images)
    for (cplx v : p1.images) sep = std::min(sep, std::abs(u - v));
  if (sep <= 0 || curve_winding(p0.images, a1) != 0 ||
      curve_winding(p1.images, a0) != 0) {
    out.error = "branch images overlap";
    return out;
  }
  const double margin =
      (radius - std::max(p0.max_dist, p1.max_dist)) / cfg.safety;
  const double separation = sep / cfg.safety;
  const double kappa = std::max(p0.kappa_raw, p1.kappa_raw) * cfg.safety;
  if (margin <= 0 || separation <= 0 || kappa >= 1) {
    out.error = "margin/separation/contraction checks failed";
    return out;
  }
  BranchSystem sys;
  sys.lambda.assign(lambda.begin(), lambda.end());
  sys.m = m;
  sys.center = center;
  sys.radius = radius;
  sys.anchors = {a0, a1};
  sys.boundary_images = {p0.images, p1.images};
  sys.margin = margin;
  sys.separation = separation;
  sys.kappa = kappa;
  sys.boundary_samples = cfg.boundary_samples;
  out.system = std::move(sys);
  out.ok = true;
  return out;
}

inline CandidateOutcome try_candidate(const FamilySpec& fam,
                                      std::span<const cplx> lambda, int m,
                                      cplx center, double radius,
                                      const BranchSearchConfig& cfg) {
  CandidateOutcome out;
  const MapAtLambda f = fam.at(lambda);
  std::vector<cplx> anchors = iterate_preimages(f, m, center);
  std::vector<std::pair<cplx, BranchProbe>> survivors;
  for (cplx a : anchors) {
    if (std::abs(a - center) >= radius) continue;
    BranchProbe p = probe_branch(f, m, center, radius, a, cfg);
    if (!p.ok) continue;
    if (radius - p.max_dist <= 0) continue;  // image not inside the ball
    survivors.emplace_back(a, std::move(p));
  }
  if (survivors.size() < 2) {
    out.error = "fewer than two branch images stay inside the ball (" +
                std::to_string(survivors.size()) + ")";
    return out;
  }
  double best_score = -1;
  for (std::size_t i = 0; i < survivors.size(); ++i)
    for (std::size_t j = i + 1; j < survivors.size(); ++j) {
      CandidateOutcome cand =
          verify_pair(lambda, m, center, radius, survivors[i].first,
                      survivors[i].second, survivors[j].first,
                      survivors[j].second, cfg);
      if (!cand.ok) continue;
      const double score = std::min(cand.system.margin, cand.system.separation);
      if (score > best_score) {
        best_score = score;
        out.system = std::move(cand.system);
        out.ok = true;
      }
    }
  if (!out.ok) out.error = "no verified branch pair (overlap or contraction)";
  return out;
}

}  // namespace detail

/// Searches candidate balls and iterates m = 1..m_cap for two univalent
/// inverse branches of f^m mapping the ball strictly inside itself with
/// disjoint images. Candidate centers: the mean of the marked critical
/// points, then repelling periodic points up to the period cap; radii walk
/// a halving ladder from a Julia-set diameter estimate.
inline std::pair<std::optional<BranchSystem>, BranchFailure>
build_branch_system(const FamilySpec& fam, std::span<const cplx> lambda,
                    const BranchSearchConfig& cfg = {}) {
  BranchFailure fail;
  std::vector<std::pair<cplx, double>> balls;
  if (cfg.ball) {
    balls.push_back(*cfg.ball);
  } else {
    std::vector<cplx> centers;
    cplx mean = 0.0;
    for (int j = 0; j < fam.num_critical(); ++j)
      mean += fam.critical_value(j, lambda);
    centers.push_back(mean / double(fam.num_critical()));
    double beta = 1.0;
    for (int q = 1; q <= cfg.center_period_cap; ++q) {
      for (const PeriodicPoint& p : periodic_points(fam, lambda, q)) {
        beta = std::max(beta, std::abs(p.point));
        if (std::abs(p.multiplier) > 1.0 + 1e-9) centers.push_back(p.point);
      }
    }
    const double diam_estimate = 2.2 * beta;
    for (cplx c : centers)
      for (int k = 0; k < cfg.ladder_len; ++k)
        balls.emplace_back(c, diam_estimate / double(1 << (k + 1)));
  }

  for (int m = 1; m <= cfg.m_cap; ++m) {
    std::optional<BranchSystem> best;
    for (const auto& [center, radius] : balls) {
      detail::CandidateOutcome c =
          detail::try_candidate(fam, lambda, m, center, radius, cfg);
      if (c.ok) {
        if (!best || c.system.margin > best->margin) best = std::move(c.system);
      } else if (fail.diagnostics.size() < 64) {
        fail.diagnostics.push_back(
            "m=" + std::to_string(m) + " center=(" +
            std::to_string(center.real()) + "," + std::to_string(center.imag()) +
            ") r=" + std::to_string(radius) + ": " + c.error);
      }
    }
    if (best) return {std::move(best), std::move(fail)};
  }
  if (balls.empty()) fail.diagnostics.push_back("empty candidate budget");
  return {std::nullopt, std::move(fail)};
}

/// Composes the coded inverse branches depth times from the ball center.
/// Codes read left to right, first symbol outermost (cylinder symbol).
/// Purely periodic codes are polished to true periodic points of f^{m q}.
inline CantorPoint point_of(const FamilySpec& fam, const BranchSystem& sys,
                            std::span<const std::uint8_t> code, int depth,
                            bool periodic = false) {
  if (!periodic && depth > int(code.size()))
    throw std::invalid_argument("point_of: depth exceeds the code length");
  if (code.empty()) throw std::invalid_argument("point_of: empty code");
  const MapAtLambda f = fam.at(sys.lambda);
  cplx x = sys.center;
  for (int i = depth; i >= 1; --i) {
    const std::uint8_t s = code[std::size_t((i - 1) % int(code.size()))];
    const auto inv = detail::invert_branch(f, sys.m, x,
                                           sys.anchors[std::size_t(s)],
                                           sys.center, 1e-13);
    if (!inv)
      throw std::runtime_error(
          "point_of: inversion failed inside a verified system");
    x = *inv;
  }
  CantorPoint out;
  out.code.assign(code.begin(), code.end());
  out.depth = depth;
  out.z = x;
  out.residual_bound = std::pow(sys.kappa, depth) * 2.0 * sys.radius;
  out.periodic = periodic;
  if (periodic) {
    const int q = int(code.size());
    for (int it = 0; it < 60; ++it) {
      auto [v, dv] = iterate_with_dz(f, out.z, sys.m * q);
      const cplx den = dv - 1.0;
      if (std::abs(den) < 1e-14) break;
      const cplx step = (v - out.z) / den;
      out.z -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(out.z))) break;
    }
    auto [v, dv] = iterate_with_dz(f, out.z, sys.m * q);
    (void)dv;
    out.residual_bound = std::abs(v - out.z);
  }
  return out;
}

/// N independent samples of the balanced measure: uniform binary codes of
/// the given depth pushed through the coding, weight 1/N each.
inline std::vector<CantorPoint> sample_balanced(const FamilySpec& fam,
                                                const BranchSystem& sys,
                                                int depth, int n_samples,
                                                std::uint64_t seed) {
  if (n_samples < 1)
    throw std::invalid_argument("sample_balanced: need at least one sample");
  std::vector<CantorPoint> out(static_cast<std::size_t>(n_samples));
  parallel_for(out.size(), [&](std::size_t i) {
    std::uint64_t state = seed + 0x9e3779b97f4a7c15ull * (i + 1);
    Rng rng(splitmix64(state));
    std::vector<std::uint8_t> code(static_cast<std::size_t>(depth));
    for (auto& s : code) s = rng.coin() ? 1 : 0;
    out[i] = point_of(fam, sys, code, depth);
  });
  return out;
}

inline PointMeasure to_measure(const std::vector<CantorPoint>& pts) {
  PointMeasure mu;
  mu.point_dim = 1;
  for (const CantorPoint& p : pts) mu.push(p.z, 1.0 / double(pts.size()));
  return mu;
}

struct RepellingTarget {
  cplx point;
  std::vector<std::uint8_t> code;
  cplx multiplier;  // of f^{m q}, q = minimal code period
};

/// All periodic codes with minimal period up to q_cap, their polished
/// periodic points and multipliers (all repelling by hyperbolicity).
inline std::vector<RepellingTarget> repelling_targets(const FamilySpec& fam,
                                                      const BranchSystem& sys,
                                                      int q_cap) {
  if (q_cap < 1 || q_cap > 16)
    throw CapacityError("repelling_targets: period cap out of range");
  const MapAtLambda f = fam.at(sys.lambda);
  std::vector<RepellingTarget> out;
  for (int q = 1; q <= q_cap; ++q) {
    for (std::uint32_t bits = 0; bits < (1u << q); ++bits) {
      std::vector<std::uint8_t> code(static_cast<std::size_t>(q));
      for (int i = 0; i < q; ++i) code[std::size_t(i)] = (bits >> i) & 1u;
      // keep only codes whose minimal period is exactly q
      bool minimal = true;
      for (int d = 1; d < q; ++d) {
        if (q % d != 0) continue;
        bool repeats = true;
        for (int i = 0; i < q; ++i)
          if (code[std::size_t(i)] != code[std::size_t(i % d)]) repeats = false;
        if (repeats) minimal = false;
      }
      if (!minimal) continue;
      const int depth = std::max(q, 24 - (24 % q));
      CantorPoint p = point_of(fam, sys, code, depth, true);
      auto [v, dv] = iterate_with_dz(f, p.z, sys.m * q);
      (void)v;
      out.push_back({p.z, std::move(code), dv});
    }
  }
  return out;
}

struct MotionResult {
  bool complete = false;
  int steps_done = 0;
  std::vector<cplx> last_good_lambda;
  BranchSystem end_system;
  std::vector<CantorPoint> moved;
  std::vector<std::uint8_t> point_ok;
};

/// Walks the parameter segment in the given number of steps, re-anchoring
/// the branch system by Newton at each step and re-solving every tracked
/// point (periodicity equations for periodic codes, depth-truncated branch
/// composition otherwise). Points whose Newton update leaves the continued
/// ball are flagged; verification failure stops the walk and reports the
/// last good parameter.
inline MotionResult continue_motion(const FamilySpec& fam,
                                    const BranchSystem& system,
                                    std::span<const CantorPoint> points,
                                    std::span<const cplx> lambda1, int steps,
                                    const BranchSearchConfig& cfg = {}) {
  if (steps < 1) throw std::invalid_argument("continue_motion: steps >= 1");
  MotionResult out;
  out.end_system = system;
  out.moved.assign(points.begin(), points.end());
  out.point_ok.assign(points.size(), 1);
  out.last_good_lambda = system.lambda;

  const std::vector<cplx> lambda0 = system.lambda;
  for (int step = 1; step <= steps; ++step) {
    std::vector<cplx> lam(lambda0.size());
    const double t = double(step) / double(steps);
    for (std::size_t i = 0; i < lam.size(); ++i)
      lam[i] = lambda0[i] + t * (lambda1[i] - lambda0[i]);

    // re-anchor the same branch pair by Newton, then re-verify on the
    // fixed ball
    const MapAtLambda f = fam.at(lam);
    std::array<cplx, 2> anchors;
    bool ok = true;
    for (int b = 0; b < 2 && ok; ++b) {
      const auto a = detail::invert_once(
          f, out.end_system.m, out.end_system.center,
          out.end_system.anchors[std::size_t(b)], cfg.newton_tol);
      if (!a) ok = false;
      else anchors[std::size_t(b)] = *a;
    }
    if (ok) {
      const detail::BranchProbe p0 = detail::probe_branch(
          f, out.end_system.m, out.end_system.center, out.end_system.radius,
          anchors[0], cfg);
      const detail::BranchProbe p1 = detail::probe_branch(
          f, out.end_system.m, out.end_system.center, out.end_system.radius,
          anchors[1], cfg);
      if (!p0.ok || !p1.ok) {
        ok = false;
      } else {
        detail::CandidateOutcome cand = detail::verify_pair(
            lam, out.end_system.m, out.end_system.center,
            out.end_system.radius, anchors[0], p0, anchors[1], p1, cfg);
        if (!cand.ok) ok = false;
        else out.end_system = std::move(cand.system);
      }
    }
    if (!ok) return out;  // breakdown: partial result up to last_good_lambda

    parallel_for(out.moved.size(), [&](std::size_t i) {
      if (!out.point_ok[i]) return;
      CantorPoint& p = out.moved[i];
      if (p.periodic) {
        const int q = int(p.code.size());
        cplx x = p.z;
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
          cplx v, dv;
          try {
            std::tie(v, dv) = iterate_with_dz(f, x, out.end_system.m * q);
          } catch (const IterateOverflowError&) {
            break;
          }
          const cplx den = dv - 1.0;
          if (std::abs(den) < 1e-14) break;
          const cplx stepv = (v - x) / den;
          x -= stepv;
          if (std::abs(stepv) <= 1e-13 * (1.0 + std::abs(x))) {
            converged = true;
            break;
          }
        }
        if (!converged || std::abs(x - out.end_system.center) >
                              out.end_system.radius) {
          out.point_ok[i] = 0;
          return;
        }
        p.z = x;
      } else {
        try {
          CantorPoint q = point_of(fam, out.end_system, p.code, p.depth);
          p.z = q.z;
          p.residual_bound = q.residual_bound;
        } catch (const std::exception&) {
          out.point_ok[i] = 0;
        }
      }
    });
    out.last_good_lambda = lam;
    out.steps_done = step;
  }
  out.complete = true;
  return out;
}

}  // namespace biflab
