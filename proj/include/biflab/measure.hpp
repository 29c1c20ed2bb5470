#pragma once

// Weighted point measures and the dyadic box-counting discrepancy used to
// compare point clouds against each other and against grid densities.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "biflab/grid.hpp"

namespace biflab {

/// Weighted points in C^point_dim (dynamical-plane or parameter-space).
struct PointMeasure {
  int point_dim = 1;
  std::vector<cplx> pts;  // point_dim entries per point
  std::vector<double> w;
  double recorded_total = 0;

  std::size_t size() const { return w.size(); }
  std::span<const cplx> point(std::size_t i) const {
    return {pts.data() + i * std::size_t(point_dim), std::size_t(point_dim)};
  }
  void push(std::span<const cplx> p, double weight) {
    pts.insert(pts.end(), p.begin(), p.end());
    w.push_back(weight);
    recorded_total += weight;
  }
  void push(cplx p, double weight) { push({&p, 1}, weight); }
  double weight_sum() const {
    double s = 0;
    for (double x : w) s += x;
    return s;
  }
};

namespace detail {

/// Bin index along one real axis at the finest dyadic level; -1 if outside.
inline int dyadic_bin(double x, double lo, double hi, int cells) {
  if (x < lo || x > hi) return -1;
  int b = int((x - lo) / (hi - lo) * cells);
  if (b >= cells) b = cells - 1;  // top edge inclusive
  return b;
}

inline std::size_t bin_count(int levels, int real_dims) {
  std::size_t n = 1;
  for (int k = 0; k < real_dims; ++k) n *= std::size_t(1) << levels;
  return n;
}

inline std::vector<double> bin_points(const PointMeasure& mu,
                                      std::span<const Rect> box, int levels) {
  const int dim = int(box.size());
  const int cells = 1 << levels;
  std::vector<double> bins(bin_count(levels, 2 * dim), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto p = mu.point(i);
    std::size_t idx = 0;
    bool inside = true;
    for (int a = 0; a < dim; ++a) {
      const int bx = dyadic_bin(p[std::size_t(a)].real(), box[std::size_t(a)].re_lo,
                                box[std::size_t(a)].re_hi, cells);
      const int by = dyadic_bin(p[std::size_t(a)].imag(), box[std::size_t(a)].im_lo,
                                box[std::size_t(a)].im_hi, cells);
      if (bx < 0 || by < 0) {
        inside = false;
        break;
      }
      idx = (idx * std::size_t(cells) + std::size_t(by)) * std::size_t(cells) +
            std::size_t(bx);
    }
    if (inside) bins[idx] += mu.w[i];
  }
  return bins;
}

inline std::vector<double> bin_density(const DensityField& nu,
                                       std::span<const Rect> box, int levels) {
  const GridSpec& g = nu.grid;
  const int dim = int(box.size());
  if (dim != int(g.axes().size()))
    throw std::invalid_argument("discrepancy: box/axis dimension mismatch");
  const int cells = 1 << levels;
  std::vector<double> bins(bin_count(levels, 2 * dim), 0.0);
  for (std::size_t i = 0; i < g.sample_count(); ++i) {
    const double m = nu.mass(i);
    if (m == 0) continue;
    const std::vector<cplx> lam = g.lambda_at(i);
    std::size_t idx = 0;
    bool inside = true;
    for (int a = 0; a < dim; ++a) {
      const cplx z = lam[std::size_t(g.axes()[std::size_t(a)].param_index)];
      const int bx = dyadic_bin(z.real(), box[std::size_t(a)].re_lo,
                                box[std::size_t(a)].re_hi, cells);
      const int by = dyadic_bin(z.imag(), box[std::size_t(a)].im_lo,
                                box[std::size_t(a)].im_hi, cells);
      if (bx < 0 || by < 0) {
        inside = false;
        break;
      }
      idx = (idx * std::size_t(cells) + std::size_t(by)) * std::size_t(cells) +
            std::size_t(bx);
    }
    if (inside) bins[idx] += m;
  }
  return bins;
}

/// Max over dyadic sub-boxes of levels 0..L of |mu(B) - nu(B)|, with both
/// restricted masses rescaled to the smaller total first.
inline double bin_discrepancy(std::vector<double> a, std::vector<double> b,
                              int levels, int real_dims) {
  double ma = 0, mb = 0;
  for (double x : a) ma += x;
  for (double x : b) mb += x;
  if (ma <= 0 || mb <= 0) return std::abs(ma - mb);
  const double target = std::min(ma, mb);
  for (double& x : a) x *= target / ma;
  for (double& x : b) x *= target / mb;

  double worst = 0;
  for (int lev = levels;; --lev) {
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(a[i] - b[i]));
    if (lev == 0) break;
    // coarsen: halve every real axis
    const int fine = 1 << lev;
    const int coarse = fine >> 1;
    std::vector<double> a2(bin_count(lev - 1, real_dims), 0.0);
    std::vector<double> b2(a2.size(), 0.0);
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
      // remap each axis index by /2, preserving axis order
      std::size_t mul = 1;
      for (int k = 0; k < real_dims; ++k) mul *= std::size_t(fine);
      std::size_t src = i, dst = 0;
      for (int k = 0; k < real_dims; ++k) {
        mul /= std::size_t(fine);
        const std::size_t digit = src / mul;
        src %= mul;
        dst = dst * std::size_t(coarse) + digit / 2;
      }
      a2[dst] += a[i];
      b2[dst] += b[i];
    }
    a = std::move(a2);
    b = std::move(b2);
  }
  return worst;
}

}  // namespace detail

inline double discrepancy(const PointMeasure& mu, const PointMeasure& nu,
                          std::span<const Rect> box, int levels) {
  if (mu.point_dim != int(box.size()) || nu.point_dim != int(box.size()))
    throw std::invalid_argument("discrepancy: dimension mismatch");
  return detail::bin_discrepancy(detail::bin_points(mu, box, levels),
                                 detail::bin_points(nu, box, levels), levels,
                                 2 * int(box.size()));
}

inline double discrepancy(const PointMeasure& mu, const DensityField& nu,
                          std::span<const Rect> box, int levels) {
  if (mu.point_dim != int(box.size()))
    throw std::invalid_argument("discrepancy: dimension mismatch");
  return detail::bin_discrepancy(detail::bin_points(mu, box, levels),
                                 detail::bin_density(nu, box, levels), levels,
                                 2 * int(box.size()));
}

}  // namespace biflab
