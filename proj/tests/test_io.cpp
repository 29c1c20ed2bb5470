#include "biflab/io.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace biflab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  fs::path p = fs::temp_directory_path() / "biflab_io_test";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScalarField small_field() {
  AxisSpec ax;
  ax.param_index = 0;
  ax.bounds = {-1.0, 1.0, -1.0, 1.0};
  ax.nx = ax.ny = 8;
  GridSpec g({cplx(0.0)}, {ax});
  ScalarField f(g, 1e-8);
  for (std::size_t i = 0; i < f.v.size(); ++i)
    f.v[i] = 0.25 * double(i % 13) + 1e-17 * double(i);
  return f;
}

}  // namespace

TEST_CASE("scalar CSV is byte-stable and carries the grid header") {
  const fs::path dir = temp_dir();
  ScalarField f = small_field();
  const std::string p1 = (dir / "a.csv").string();
  const std::string p2 = (dir / "b.csv").string();
  write_field_csv(p1, f, "test");
  write_field_csv(p2, f, "test");
  const std::string a = slurp(p1), b = slurp(p2);
  CHECK(a == b);
  CHECK(a.rfind("# biflab scalar-field test", 0) == 0);
  CHECK(a.find("tol=") != std::string::npos);
  // 8 rows of 8 full-precision values after the header line
  CHECK(std::count(a.begin(), a.end(), '\n') == 9);
  CHECK(fnv1a64({a.data(), a.size()}) == file_fnv1a64(p1));
}

TEST_CASE("PGM is 16-bit big-endian with the affine map recorded") {
  const fs::path dir = temp_dir();
  ScalarField f = small_field();
  const std::string p = (dir / "f.pgm").string();
  write_field_pgm(p, f);
  const std::string data = slurp(p);
  CHECK(data.rfind("P5\n# v = ", 0) == 0);
  CHECK(data.find("\n8 8\n65535\n") != std::string::npos);
  const std::size_t header_end = data.find("\n65535\n") + 7;
  CHECK(data.size() - header_end == 2u * 8u * 8u);

  // recover the affine map and check one value round-trips
  double lo = 0, scale = 0;
  std::sscanf(data.c_str(), "P5\n# v = %lf + g * %lf", &lo, &scale);
  const unsigned hi_byte = static_cast<unsigned char>(data[header_end]);
  const unsigned lo_byte = static_cast<unsigned char>(data[header_end + 1]);
  const double recovered = lo + double((hi_byte << 8) | lo_byte) * scale;
  // first written pixel is the top-left corner: row iy = ny-1, ix = 0
  const double expect = f.v[7 * 8 + 0];
  CHECK(std::abs(recovered - expect) <= scale);
}

TEST_CASE("certificates serialize one JSON object per line") {
  const fs::path dir = temp_dir();
  FamilySpec quad = FamilySpec::unicritical(2);
  CertifyResult cr = certify(quad, std::vector<cplx>{cplx(-2.0)},
                             PreperiodicSpec{{2, 1}});
  REQUIRE(cr.accepted());
  std::vector<MisiurewiczCertificate> certs{*cr.certificate, *cr.certificate};
  const std::string p = (dir / "c.jsonl").string();
  write_certificates_jsonl(p, certs);
  const std::string data = slurp(p);
  CHECK(std::count(data.begin(), data.end(), '\n') == 2);

  const std::string line = data.substr(0, data.find('\n'));
  const auto j = nlohmann::json::parse(line);
  CHECK(j["lambda"][0][0].get<double>() == Catch::Approx(-2.0));
  CHECK(j["lambda"][0][1].get<double>() == 0.0);
  CHECK(j["spec"][0]["preperiod"] == 2);
  CHECK(j["spec"][0]["period"] == 1);
  CHECK(j["multipliers"][0][0].get<double>() == Catch::Approx(4.0));
  CHECK(j["transversality_det"][0].get<double>() == Catch::Approx(-8.0));
  CHECK(j["intersection_index"] == 1);
}

TEST_CASE("cantor and cloud CSV formats") {
  const fs::path dir = temp_dir();
  std::vector<CantorPoint> pts(2);
  pts[0].code = {0, 1, 1};
  pts[0].z = cplx(0.5, -0.25);
  pts[1].code = {1, 0, 0};
  pts[1].z = cplx(-1.0, 2.0);
  const std::string p = (dir / "m.csv").string();
  write_cantor_csv(p, pts, 0.5);
  const std::string data = slurp(p);
  CHECK(data.rfind("code,re,im,weight\n", 0) == 0);
  CHECK(data.find("122,0.5,-0.25,0.5\n") != std::string::npos);
  CHECK(data.find("211,-1,2,0.5\n") != std::string::npos);

  PointMeasure mu;
  mu.point_dim = 1;
  mu.push(cplx(1.0, 2.0), 0.125);
  const std::string q = (dir / "cloud.csv").string();
  write_cloud_csv(q, mu);
  CHECK(slurp(q) == "re,im,weight\n1,2,0.125\n");
}
