#pragma once

// File artifacts: CSV (full %.17g precision), 16-bit binary PGM with the
// affine value map recorded in the comment line, and JSON Lines for
// certificates. Identical inputs produce byte-identical files.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "biflab/equidist.hpp"
#include "biflab/grid.hpp"
#include "biflab/hyperset.hpp"
#include "biflab/measure.hpp"
#include "biflab/misiurewicz.hpp"

namespace biflab {

inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(std::span<const char> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : bytes) {
    h ^= std::uint64_t(static_cast<unsigned char>(c));
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t file_fnv1a64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for hashing: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string s = ss.str();
  return fnv1a64({s.data(), s.size()});
}

namespace detail {

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out.write(data.data(), std::streamsize(data.size()));
}

inline std::string grid_header(const GridSpec& g) {
  std::string s;
  for (std::size_t ax = 0; ax < g.axes().size(); ++ax) {
    const AxisSpec& a = g.axes()[ax];
    if (ax) s += ";";
    s += "param" + std::to_string(a.param_index) + ":re[" +
         g17(a.bounds.re_lo) + "," + g17(a.bounds.re_hi) + "]x" +
         std::to_string(a.nx) + ":im[" + g17(a.bounds.im_lo) + "," +
         g17(a.bounds.im_hi) + "]x" + std::to_string(a.ny) + ":h=" +
         g17(a.step_x());
  }
  s += " base=";
  for (std::size_t i = 0; i < g.base_point().size(); ++i) {
    if (i) s += ";";
    s += g17(g.base_point()[i].real()) + "," + g17(g.base_point()[i].imag());
  }
  return s;
}

template <typename Value>
std::string rows_csv(const GridSpec& g, const Value& value) {
  std::string data;
  const int last = g.real_dims() - 1;
  const std::size_t row_len = std::size_t(g.extent(last));
  const std::size_t rows = g.sample_count() / row_len;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < row_len; ++c) {
      if (c) data += ",";
      data += g17(value(r * row_len + c));
    }
    data += "\n";
  }
  return data;
}

}  // namespace detail

inline void write_field_csv(const std::string& path, const ScalarField& f,
                            const std::string& label) {
  std::string data = "# biflab scalar-field " + label + " axes=" +
                     detail::grid_header(f.grid) + " tol=" + g17(f.tol) + "\n";
  data += detail::rows_csv(f.grid, [&](std::size_t i) { return f.v[i]; });
  detail::write_file(path, data);
}

inline void write_density_csv(const std::string& path, const DensityField& d,
                              const std::string& label) {
  std::string data = "# biflab density-field " + label + " axes=" +
                     detail::grid_header(d.grid) +
                     " clamped=" + g17(d.clamped_total()) +
                     " boundary_cells=" + std::to_string(d.boundary_skipped) +
                     "\n";
  data += detail::rows_csv(d.grid, [&](std::size_t i) { return d.mass(i); });
  detail::write_file(path, data);
}

/// 16-bit big-endian P5 with the affine gray -> value map in the comment.
/// Only two-real-dimensional fields have a raster layout.
template <typename Value>
void write_pgm16(const std::string& path, const GridSpec& g,
                 const Value& value) {
  if (g.real_dims() != 2)
    throw std::invalid_argument("pgm: field must vary one complex coordinate");
  const int ny = g.extent(0), nx = g.extent(1);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < g.sample_count(); ++i) {
    lo = std::min(lo, value(i));
    hi = std::max(hi, value(i));
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double scale = (hi - lo) / 65535.0;
  std::string data = "P5\n# v = " + g17(lo) + " + g * " + g17(scale) + "\n" +
                     std::to_string(nx) + " " + std::to_string(ny) +
                     "\n65535\n";
  data.reserve(data.size() + g.sample_count() * 2);
  for (int iy = ny - 1; iy >= 0; --iy)  // top row = largest imaginary part
    for (int ix = 0; ix < nx; ++ix) {
      const double v = value(std::size_t(iy) * std::size_t(nx) + std::size_t(ix));
      const unsigned g16 = unsigned((v - lo) / scale + 0.5);
      data += char((g16 >> 8) & 0xff);
      data += char(g16 & 0xff);
    }
  detail::write_file(path, data);
}

inline void write_field_pgm(const std::string& path, const ScalarField& f) {
  write_pgm16(path, f.grid, [&](std::size_t i) { return f.v[i]; });
}

inline void write_density_pgm(const std::string& path, const DensityField& d) {
  write_pgm16(path, d.grid, [&](std::size_t i) { return d.mass(i); });
}

// ---------------------------------------------------------------------------
// JSON / JSONL

inline nlohmann::ordered_json json_complex(cplx z) {
  return nlohmann::ordered_json::array({z.real(), z.imag()});
}

inline nlohmann::ordered_json certificate_json(
    const MisiurewiczCertificate& c) {
  nlohmann::ordered_json j;
  j["lambda"] = nlohmann::ordered_json::array();
  for (cplx l : c.lambda) j["lambda"].push_back(json_complex(l));
  j["spec"] = nlohmann::ordered_json::array();
  for (const auto& p : c.spec)
    j["spec"].push_back({{"preperiod", p.preperiod}, {"period", p.period}});
  j["residuals"] = c.residuals;
  j["cycle_points"] = nlohmann::ordered_json::array();
  for (cplx p : c.cycle_points) j["cycle_points"].push_back(json_complex(p));
  j["multipliers"] = nlohmann::ordered_json::array();
  for (cplx m : c.multipliers) j["multipliers"].push_back(json_complex(m));
  j["strictness"] = c.strictness;
  j["transversality_det"] = json_complex(c.det_jacobian);
  j["graph_det"] = json_complex(c.det_graph);
  j["intersection_index"] = c.intersection_index;
  j["newton_iterations"] = c.newton_iterations;
  j["seed"] = c.seed;
  return j;
}

inline void write_certificates_jsonl(
    const std::string& path, std::span<const MisiurewiczCertificate> certs) {
  std::string data;
  for (const auto& c : certs) data += certificate_json(c).dump() + "\n";
  detail::write_file(path, data);
}

inline void write_rejections_jsonl(const std::string& path,
                                   std::span<const RejectedRoot> rejected) {
  std::string data;
  for (const auto& r : rejected) {
    nlohmann::ordered_json j;
    j["root"] = json_complex(r.root);
    j["multiplicity"] = r.multiplicity;
    j["intersection_index"] = r.intersection_index;
    j["reason"] = to_string(r.rejection.reason);
    j["measured"] = r.rejection.measured;
    data += j.dump() + "\n";
  }
  detail::write_file(path, data);
}

// hyperset CSV: code as a string of 1/2 symbols, point, weight column
inline void write_cantor_csv(const std::string& path,
                             std::span<const CantorPoint> pts,
                             double weight_each) {
  std::string data = "code,re,im,weight\n";
  for (const auto& p : pts) {
    for (std::uint8_t s : p.code) data += char('1' + s);
    data += "," + g17(p.z.real()) + "," + g17(p.z.imag()) + "," +
            g17(weight_each) + "\n";
  }
  detail::write_file(path, data);
}

inline void write_targets_csv(const std::string& path,
                              std::span<const RepellingTarget> targets) {
  std::string data = "code,re,im,multiplier_re,multiplier_im\n";
  for (const auto& t : targets) {
    for (std::uint8_t s : t.code) data += char('1' + s);
    data += "," + g17(t.point.real()) + "," + g17(t.point.imag()) + "," +
            g17(t.multiplier.real()) + "," + g17(t.multiplier.imag()) + "\n";
  }
  detail::write_file(path, data);
}

inline void write_cloud_csv(const std::string& path, const PointMeasure& mu) {
  std::string data;
  if (mu.point_dim == 1) {
    data = "re,im,weight\n";
    for (std::size_t i = 0; i < mu.size(); ++i)
      data += g17(mu.pts[i].real()) + "," + g17(mu.pts[i].imag()) + "," +
              g17(mu.w[i]) + "\n";
  } else {
    data = "re0,im0,re1,im1,weight\n";
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const auto p = mu.point(i);
      for (std::size_t t = 0; t < p.size(); ++t)
        data += g17(p[t].real()) + "," + g17(p[t].imag()) + ",";
      data += g17(mu.w[i]) + "\n";
    }
  }
  detail::write_file(path, data);
}

inline nlohmann::ordered_json report_json(const ConvergenceReport& rep) {
  nlohmann::ordered_json j;
  j["levels"] = rep.levels;
  j["n_values"] = rep.n_values;
  j["targets"] = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < rep.targets.size(); ++t) {
    nlohmann::ordered_json tj;
    tj["id"] = int(t);
    tj["z"] = nlohmann::ordered_json::array();
    for (cplx z : rep.targets[t].z) tj["z"].push_back(json_complex(z));
    tj["provenance"] =
        rep.targets[t].provenance == TargetTuple::Provenance::pseudorandom
            ? "pseudorandom"
            : "user";
    tj["seed"] = rep.targets[t].seed;
    tj["near_exceptional"] = rep.targets[t].near_exceptional;
    j["targets"].push_back(tj);
  }
  j["rows"] = nlohmann::ordered_json::array();
  for (const ReportRow& r : rep.rows) {
    nlohmann::ordered_json rj;
    rj["n"] = r.n;
    rj["target_id"] = r.target_id;
    rj["count"] = r.count;
    rj["mass"] = r.mass;
    rj["vs_reference"] = r.vs_reference;
    rj["mutual"] = r.mutual;
    j["rows"].push_back(rj);
  }
  j["fraction_decreasing"] = rep.fraction_decreasing;
  return j;
}

}  // namespace biflab
