#pragma once

// Escape-time Green functions, activity potentials u_j(l) = G_l(c_j(l)) on
// parameter grids, and the discrete dd^c / wedge masses built from them.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "biflab/family.hpp"
#include "biflab/grid.hpp"
#include "biflab/parallel.hpp"

namespace biflab {

inline constexpr double kTwoPi = 6.283185307179586476925;

struct GreenResult {
  double value = 0;
  int n_used = 0;
  double err = 0;
  bool possibly_bounded = false;
};

/// G(z) for one instantiated map, to absolute accuracy tol. Orbits that do
/// not escape within the iterate cap genuinely have G below tol, so they are
/// reported as 0 with the "possibly bounded" flag rather than as an error.
inline GreenResult green_at(const MapAtLambda& f, cplx z, double tol,
                            int n_cap = 0) {
  const double d = double(f.deg);
  const double logd = std::log(d);
  const double R = f.escape_radius;
  if (!(tol > 0)) throw std::invalid_argument("green_at: tol must be > 0");
  if (n_cap <= 0) {
    // unescaped after n iterates means G <= d^{-n} log(2R)
    n_cap = int(std::ceil(std::log(std::max(std::log(2.0 * R), 1.0) / tol) /
                          logd)) +
            4;
  }

  GreenResult out;
  double inv_dn = 1.0;  // d^{-n}
  int n = 0;
  while (n < n_cap && std::abs(z) <= R) {
    z = f.eval(z);
    ++n;
    inv_dn /= d;
  }
  if (std::abs(z) <= R) {
    out.value = 0.0;
    out.n_used = n;
    out.err = inv_dn * std::log(2.0 * R);
    out.possibly_bounded = true;
    return out;
  }
  // Escaped: refine g_n = d^{-n} log|z_n| until the geometric tail is below
  // tol. Increments decay at least like 1/d once |z| > R.
  double g = inv_dn * std::log(std::abs(z));
  double inc = g;  // placeholder until first refinement
  const int refine_cap = n + 80;
  while (n < refine_cap) {
    z = f.eval(z);
    ++n;
    inv_dn /= d;
    if (!is_finite(z) || std::abs(z) > 1e100) {
      // remaining corrections are below double resolution
      inc = 0.0;
      break;
    }
    const double g2 = inv_dn * std::log(std::abs(z));
    inc = std::abs(g2 - g);
    g = g2;
    if (inc < tol * (d - 1.0) / (2.0 * d)) break;
  }
  out.value = std::max(g, 0.0);
  out.n_used = n;
  out.err = inc * d / (d - 1.0);
  return out;
}

inline GreenResult green_at(const FamilySpec& fam,
                            std::span<const cplx> lambda, cplx z, double tol,
                            int n_cap = 0) {
  return green_at(fam.at(lambda), z, tol, n_cap);
}

/// Sup over pre-asymptotic grid samples of |g_{n+1} - g_n| for n in
/// [n_lo, n_hi], where g_n = d^{-n} log+ |f^n(c_j)|. Samples that escape
/// the bail-out radius before the window ends are excluded; the remaining
/// increments shrink like d^{-n}, which is what the returned sups measure.
inline std::vector<double> potential_increment_sups(const FamilySpec& fam,
                                                    const GridSpec& grid,
                                                    int j, int n_lo,
                                                    int n_hi) {
  if (n_lo < 1 || n_hi <= n_lo)
    throw std::invalid_argument("increment sups: bad window");
  const std::size_t width = std::size_t(n_hi - n_lo) + 1;
  const int rows = grid.extent(0);
  const std::size_t row_len = grid.sample_count() / std::size_t(rows);
  std::vector<std::vector<double>> row_sup(std::size_t(rows),
                                           std::vector<double>(width, 0.0));
  parallel_for(std::size_t(rows), [&](std::size_t row) {
    std::vector<double>& sup = row_sup[row];
    for (std::size_t k = 0; k < row_len; ++k) {
      const std::size_t idx = row * row_len + k;
      const std::vector<cplx> lam = grid.lambda_at(idx);
      const MapAtLambda f = fam.at(lam);
      cplx z = fam.critical_value(j, lam);
      std::vector<double> g(width + 1, 0.0);
      bool escaped_early = false;
      double inv_dn = 1.0;
      for (int n = 1; n <= n_hi + 1; ++n) {
        z = f.eval(z);
        inv_dn /= double(f.deg);
        if (std::abs(z) > f.escape_radius) {
          escaped_early = true;
          break;
        }
        if (n >= n_lo)
          g[std::size_t(n - n_lo)] =
              inv_dn * std::log(std::max(std::abs(z), 1.0));
      }
      if (escaped_early) continue;
      for (std::size_t t = 0; t < width; ++t)
        sup[t] = std::max(sup[t], std::abs(g[t + 1] - g[t]));
    }
  });
  std::vector<double> out(width, 0.0);
  for (const auto& sup : row_sup)
    for (std::size_t t = 0; t < width; ++t) out[t] = std::max(out[t], sup[t]);
  return out;
}

/// u_j(l) = G_l(c_j(l)) sampled over the grid. Parallel across samples.
inline ScalarField activity_potential_grid(const FamilySpec& fam,
                                           const GridSpec& grid, int j,
                                           double tol) {
  if (j < 0 || j >= fam.num_critical())
    throw std::invalid_argument("activity grid: critical index out of range");
  ScalarField field(grid, tol);
  parallel_for(grid.sample_count(), [&](std::size_t i) {
    const std::vector<cplx> lam = grid.lambda_at(i);
    const MapAtLambda f = fam.at(lam);
    const GreenResult g = green_at(f, fam.critical_value(j, lam), tol);
    field.v[i] = g.value;
    field.err[i] = float(g.err);
    field.n_used[i] = std::uint16_t(std::min(g.n_used, 65535));
    field.possibly_bounded[i] = g.possibly_bounded ? 1 : 0;
  });
  return field;
}

/// Discrete dd^c of a field over one complex coordinate: the 5-point stencil
/// sum (E+W+N+S-4C)/(2 pi) already integrates the Laplacian over the cell,
/// so no step division appears. Boundary cells are skipped and counted.
inline DensityField ddc_mass(const ScalarField& field) {
  const GridSpec& g = field.grid;
  if (g.axes().size() != 1)
    throw std::invalid_argument("ddc_mass: field must vary one coordinate");
  const int ny = g.extent(0), nx = g.extent(1);
  DensityField out(g);
  out.boundary_skipped = std::size_t(2 * (nx + ny) - 4);
  const std::vector<double>& u = field.v;
  parallel_for(std::size_t(ny), [&](std::size_t iy) {
    if (iy == 0 || int(iy) == ny - 1) return;
    for (int ix = 1; ix < nx - 1; ++ix) {
      const std::size_t c = iy * std::size_t(nx) + std::size_t(ix);
      const double s = u[c - 1] + u[c + 1] + u[c - std::size_t(nx)] +
                       u[c + std::size_t(nx)] - 4.0 * u[c];
      out.raw[c] = s / kTwoPi;
    }
  });
  return out;
}

namespace detail {

/// Separable Gaussian smoothing along every real grid dimension, in place.
/// Kernels renormalize over in-range taps at the edges.
inline void gaussian_smooth(std::vector<double>& v, const GridSpec& g,
                            double sigma) {
  for (int k = 0; k < g.real_dims(); ++k) {
    const AxisSpec& ax = g.axes()[std::size_t(k / 2)];
    const double h = (k % 2) == 0 ? ax.step_y() : ax.step_x();
    const int r = std::max(1, int(std::ceil(3.0 * sigma / h)));
    std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
    for (int j = -r; j <= r; ++j)
      w[std::size_t(j + r)] = std::exp(-0.5 * (j * h) * (j * h) /
                                       (sigma * sigma));
    const int E = g.extent(k);
    const std::size_t S = g.stride(k);
    const std::size_t lines = v.size() / std::size_t(E);
    parallel_for(lines, [&](std::size_t line) {
      const std::size_t outer = line / S, inner = line % S;
      const std::size_t base = outer * std::size_t(E) * S + inner;
      std::vector<double> buf(static_cast<std::size_t>(E));
      for (int i = 0; i < E; ++i) buf[std::size_t(i)] = v[base + std::size_t(i) * S];
      for (int i = 0; i < E; ++i) {
        double acc = 0, wsum = 0;
        const int j0 = std::max(-r, -i), j1 = std::min(r, E - 1 - i);
        for (int j = j0; j <= j1; ++j) {
          acc += w[std::size_t(j + r)] * buf[std::size_t(i + j)];
          wsum += w[std::size_t(j + r)];
        }
        v[base + std::size_t(i) * S] = acc / wsum;
      }
    });
  }
}

/// det of the complex Hessian of w, in stencil units: the value returned is
/// det(d^2 w / dl_i dl_j-bar) * h1^2 h2^2 at the given interior cell.
inline double hessian_det_cell(const std::vector<double>& w, const GridSpec& g,
                               std::size_t c) {
  const std::size_t sy0 = g.stride(0), sx0 = g.stride(1);
  const std::size_t sy1 = g.stride(2), sx1 = g.stride(3);
  const double wc = w[c];
  const double S1 = w[c - sx0] + w[c + sx0] + w[c - sy0] + w[c + sy0] - 4 * wc;
  const double S2 = w[c - sx1] + w[c + sx1] + w[c - sy1] + w[c + sy1] - 4 * wc;
  auto cross = [&](std::size_t sa, std::size_t sb) {
    return 0.25 * (w[c + sa + sb] - w[c + sa - sb] - w[c - sa + sb] +
                   w[c - sa - sb]);
  };
  const double Dxx = cross(sx0, sx1), Dyy = cross(sy0, sy1);
  const double Dxy = cross(sx0, sy1), Dyx = cross(sy0, sx1);
  const double Xre = 0.25 * (Dxx + Dyy);
  const double Xim = 0.25 * (Dxy - Dyx);
  return (S1 / 4.0) * (S2 / 4.0) - (Xre * Xre + Xim * Xim);
}

}  // namespace detail

/// Density of dd^c u ^ dd^c v over a two-complex-coordinate grid: Gaussian
/// smoothing at width sigma, then the polarization
/// (1/4)[(dd^c(u+v))^2 - (dd^c(u-v))^2] with each square evaluated as a
/// finite-difference complex-Hessian determinant. The constant 8/pi^2 makes
/// dd^c log|l1-p| ^ dd^c log|l2-q| carry unit mass.
inline DensityField wedge_mass_2d(const ScalarField& u, const ScalarField& v,
                                  double sigma) {
  const GridSpec& g = u.grid;
  if (!g.same_layout(v.grid))
    throw std::invalid_argument("wedge: fields live on different grids");
  if (g.axes().size() != 2)
    throw std::invalid_argument("wedge: need two varying coordinates");
  for (const AxisSpec& ax : g.axes()) {
    if (std::abs(ax.step_x() - ax.step_y()) >
        1e-9 * std::max(ax.step_x(), ax.step_y()))
      throw std::invalid_argument("wedge: cells must be square per axis");
  }
  const double h = std::max(g.axes()[0].step_x(), g.axes()[1].step_x());
  if (!(sigma >= 2.0 * h - 1e-12))
    throw std::invalid_argument("wedge: smoothing width must be >= 2h");

  const std::size_t n = g.sample_count();
  std::vector<double> s(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = u.v[i] + v.v[i];
    t[i] = u.v[i] - v.v[i];
  }
  detail::gaussian_smooth(s, g, sigma);
  detail::gaussian_smooth(t, g, sigma);

  DensityField out(g);
  const int e0 = g.extent(0), e1 = g.extent(1), e2 = g.extent(2),
            e3 = g.extent(3);
  constexpr double kCal = 8.0 / (3.14159265358979323846 *
                                 3.14159265358979323846);
  // Cells within the truncated kernel radius of the boundary see distorted
  // smoothing; they stay at zero and are counted as boundary cells.
  const int margin =
      1 + std::max(1, int(std::ceil(3.0 * sigma /
                                    std::min(g.axes()[0].step_x(),
                                             g.axes()[1].step_x()))));
  parallel_for(std::size_t(e0), [&](std::size_t i0) {
    if (int(i0) < margin || int(i0) >= e0 - margin) return;
    for (int i1 = margin; i1 < e1 - margin; ++i1)
      for (int i2 = margin; i2 < e2 - margin; ++i2)
        for (int i3 = margin; i3 < e3 - margin; ++i3) {
          const std::size_t c = ((i0 * std::size_t(e1) + std::size_t(i1)) *
                                     std::size_t(e2) +
                                 std::size_t(i2)) *
                                    std::size_t(e3) +
                                std::size_t(i3);
          const double ds = detail::hessian_det_cell(s, g, c);
          const double dt = detail::hessian_det_cell(t, g, c);
          out.raw[c] = kCal * 0.25 * (ds - dt);
        }
  });
  auto kept = [margin](int e) { return std::size_t(std::max(e - 2 * margin, 0)); };
  out.boundary_skipped = n - kept(e0) * kept(e1) * kept(e2) * kept(e3);
  return out;
}

/// Sum of cell masses whose centers lie in the box (one rectangle per
/// varying complex coordinate; clamped view).
inline double box_mass(const DensityField& density,
                       std::span<const Rect> boxes) {
  const GridSpec& g = density.grid;
  if (boxes.size() != g.axes().size())
    throw std::invalid_argument("box_mass: one rectangle per varying axis");
  double total = 0;
  for (std::size_t i = 0; i < g.sample_count(); ++i) {
    const double m = density.mass(i);
    if (m == 0) continue;
    const std::vector<cplx> lam = g.lambda_at(i);
    bool inside = true;
    for (std::size_t ax = 0; ax < boxes.size(); ++ax) {
      const cplx z = lam[std::size_t(g.axes()[ax].param_index)];
      if (!boxes[ax].contains(z)) {
        inside = false;
        break;
      }
    }
    if (inside) total += m;
  }
  return total;
}

inline double box_mass(const DensityField& density, const Rect& box) {
  return box_mass(density, std::span<const Rect>(&box, 1));
}

}  // namespace biflab
