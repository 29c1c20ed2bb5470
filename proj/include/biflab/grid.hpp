#pragma once

// Rectangular sampling grids over one or two complex parameter coordinates,
// and the sampled fields living on them. Samples sit at cell centers; the
// flattened index runs (y0, x0, y1, x1) with the last coordinate fastest.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "biflab/poly.hpp"

namespace biflab {

struct Rect {
  double re_lo = 0, re_hi = 0, im_lo = 0, im_hi = 0;
  bool contains(cplx z) const {
    return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo &&
           z.imag() <= im_hi;
  }
};

struct AxisSpec {
  int param_index = 0;
  Rect bounds;
  int nx = 0, ny = 0;

  double step_x() const { return (bounds.re_hi - bounds.re_lo) / nx; }
  double step_y() const { return (bounds.im_hi - bounds.im_lo) / ny; }
};

class GridSpec {
 public:
  GridSpec(std::vector<cplx> base_point, std::vector<AxisSpec> axes)
      : base_(std::move(base_point)), axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 2)
      throw std::invalid_argument("grid: one or two varying coordinates");
    for (const AxisSpec& a : axes_) {
      if (a.nx < 8 || a.ny < 8)
        throw std::invalid_argument("grid: resolution must be >= 8 per axis");
      if (!(a.bounds.re_hi > a.bounds.re_lo) ||
          !(a.bounds.im_hi > a.bounds.im_lo))
        throw std::invalid_argument("grid: degenerate bounds");
      if (a.param_index < 0 || a.param_index >= int(base_.size()))
        throw std::invalid_argument("grid: axis parameter index out of range");
    }
    if (axes_.size() == 2 && axes_[0].param_index == axes_[1].param_index)
      throw std::invalid_argument("grid: axes must vary distinct coordinates");
    // extents in flatten order (y0, x0 [, y1, x1])
    for (const AxisSpec& a : axes_) {
      ext_.push_back(a.ny);
      ext_.push_back(a.nx);
    }
    stride_.assign(ext_.size(), 1);
    for (int k = int(ext_.size()) - 2; k >= 0; --k)
      stride_[std::size_t(k)] =
          stride_[std::size_t(k + 1)] * std::size_t(ext_[std::size_t(k + 1)]);
    total_ = stride_[0] * std::size_t(ext_[0]);
  }

  const std::vector<cplx>& base_point() const { return base_; }
  const std::vector<AxisSpec>& axes() const { return axes_; }
  std::size_t sample_count() const { return total_; }
  int real_dims() const { return int(ext_.size()); }
  int extent(int k) const { return ext_[std::size_t(k)]; }
  std::size_t stride(int k) const { return stride_[std::size_t(k)]; }

  /// Coordinate value along flattened real dimension k at position i.
  double coord(int k, int i) const {
    const AxisSpec& a = axes_[std::size_t(k / 2)];
    const bool is_y = (k % 2) == 0;
    const double lo = is_y ? a.bounds.im_lo : a.bounds.re_lo;
    const double h = is_y ? a.step_y() : a.step_x();
    return lo + (double(i) + 0.5) * h;
  }

  std::vector<int> unflatten(std::size_t idx) const {
    std::vector<int> pos(ext_.size());
    for (std::size_t k = 0; k < ext_.size(); ++k) {
      pos[k] = int(idx / stride_[k]);
      idx %= stride_[k];
    }
    return pos;
  }

  std::vector<cplx> lambda_at(std::size_t idx) const {
    std::vector<cplx> lam = base_;
    for (std::size_t ax = 0; ax < axes_.size(); ++ax) {
      const std::size_t ky = 2 * ax, kx = 2 * ax + 1;
      const int iy = int((idx / stride_[ky]) % std::size_t(ext_[ky]));
      const int ix = int((idx / stride_[kx]) % std::size_t(ext_[kx]));
      lam[std::size_t(axes_[ax].param_index)] =
          cplx(coord(int(kx), ix), coord(int(ky), iy));
    }
    return lam;
  }

  bool same_layout(const GridSpec& o) const {
    if (base_.size() != o.base_.size() || axes_.size() != o.axes_.size())
      return false;
    for (std::size_t i = 0; i < base_.size(); ++i)
      if (base_[i] != o.base_[i]) return false;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      const AxisSpec &a = axes_[i], &b = o.axes_[i];
      if (a.param_index != b.param_index || a.nx != b.nx || a.ny != b.ny ||
          a.bounds.re_lo != b.bounds.re_lo || a.bounds.re_hi != b.bounds.re_hi ||
          a.bounds.im_lo != b.bounds.im_lo || a.bounds.im_hi != b.bounds.im_hi)
        return false;
    }
    return true;
  }

 private:
  std::vector<cplx> base_;
  std::vector<AxisSpec> axes_;
  std::vector<int> ext_;
  std::vector<std::size_t> stride_;
  std::size_t total_ = 0;
};

/// Sampled potential values (units: Green potential, the d^{-n} log|.| limit)
/// with per-sample error bounds and iterate counts.
struct ScalarField {
  GridSpec grid;
  double tol = 0;
  std::vector<double> v;
  std::vector<float> err;
  std::vector<std::uint16_t> n_used;
  std::vector<std::uint8_t> possibly_bounded;

  explicit ScalarField(GridSpec g, double tolerance = 0)
      : grid(std::move(g)), tol(tolerance) {
    v.assign(grid.sample_count(), 0.0);
    err.assign(grid.sample_count(), 0.f);
    n_used.assign(grid.sample_count(), 0);
    possibly_bounded.assign(grid.sample_count(), 0);
  }

  void release_diagnostics() {
    err = {};
    n_used = {};
    possibly_bounded = {};
  }
};

/// Per-cell current mass, normalized so that dd^c log|l - l0| carries total
/// mass 1. Raw stencil values are kept signed; serialization and totals use
/// the clamped (nonnegative) view and report what clamping removed.
struct DensityField {
  GridSpec grid;
  std::vector<double> raw;
  std::size_t boundary_skipped = 0;

  explicit DensityField(GridSpec g) : grid(std::move(g)) {
    raw.assign(grid.sample_count(), 0.0);
  }

  double mass(std::size_t i) const { return raw[i] > 0 ? raw[i] : 0.0; }
  double total_mass() const {
    double s = 0;
    for (double m : raw)
      if (m > 0) s += m;
    return s;
  }
  double clamped_total() const {
    double s = 0;
    for (double m : raw)
      if (m < 0) s -= m;
    return s;
  }
  double raw_total() const {
    double s = 0;
    for (double m : raw) s += m;
    return s;
  }
};

}  // namespace biflab
