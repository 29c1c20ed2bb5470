#include "biflab/hyperset.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

using namespace biflab;

namespace {

std::vector<cplx> lam1(cplx c) { return {c}; }

BranchSystem system_at_m3() {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSearchConfig cfg;
  cfg.ball = {{cplx(0.0), 2.5}};
  auto [sys, fail] = build_branch_system(quad, lam1(-3.0), cfg);
  REQUIRE(sys.has_value());
  return *sys;
}

}  // namespace

TEST_CASE("branch system at c = -3 on the disk |z| <= 2.5") {
  BranchSystem sys = system_at_m3();
  CHECK(sys.m == 1);
  CHECK(sys.margin >= 0.1);
  CHECK(sys.separation > 0.5);
  CHECK(sys.kappa < 1.0);

  // branches are +-sqrt(z+3): anchors at +-sqrt(3), image radius sqrt(5.5)
  const double s3 = std::sqrt(3.0);
  const double lo = std::min(std::abs(sys.anchors[0] - s3),
                             std::abs(sys.anchors[0] + s3));
  CHECK(lo < 1e-9);
  double max_image = 0;
  for (int b = 0; b < 2; ++b)
    for (cplx w : sys.boundary_images[std::size_t(b)])
      max_image = std::max(max_image, std::abs(w));
  CHECK(max_image < std::sqrt(5.5) + 1e-6);
  CHECK(max_image > std::sqrt(5.5) - 0.01);
}

TEST_CASE("default candidate search finds a system at c = -3") {
  FamilySpec quad = FamilySpec::unicritical(2);
  auto [sys, fail] = build_branch_system(quad, lam1(-3.0));
  REQUIRE(sys.has_value());
  CHECK(sys->m == 1);
  CHECK(sys->margin > 0);
  CHECK(sys->kappa < 1);
}

TEST_CASE("no two-branch system in a small ball at the fixed point of z^2") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSearchConfig cfg;
  cfg.m_cap = 1;
  cfg.ball = {{cplx(1.0), 0.5}};
  auto [sys, fail] = build_branch_system(quad, lam1(0.0), cfg);
  CHECK_FALSE(sys.has_value());
  REQUIRE_FALSE(fail.diagnostics.empty());
}

TEST_CASE("empty candidate budget fails with a diagnostic") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSearchConfig cfg;
  cfg.ladder_len = 0;
  cfg.center_period_cap = 0;
  auto [sys, fail] = build_branch_system(quad, lam1(-3.0), cfg);
  CHECK_FALSE(sys.has_value());
  CHECK_FALSE(fail.diagnostics.empty());
}

TEST_CASE("constant codes are the branch fixed points") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  const MapAtLambda f = quad.at(sys.lambda);
  for (std::uint8_t b : {0, 1}) {
    const std::vector<std::uint8_t> code{b};
    CantorPoint p = point_of(quad, sys, code, 24, true);
    auto [v, dv] = iterate_with_dz(f, p.z, sys.m);
    CHECK(std::abs(v - p.z) < 1e-12);
    CHECK(std::abs(dv) > 1.0);
    // the two fixed points of +-sqrt(z+3): (1 +- sqrt(13))/2
    const double fp = (1.0 + std::sqrt(13.0)) / 2.0;
    const double fm = (1.0 - std::sqrt(13.0)) / 2.0;
    CHECK(std::min(std::abs(p.z - fp), std::abs(p.z - fm)) < 1e-10);
  }
}

TEST_CASE("period-two code gives a genuine 2-cycle of f^m") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  const MapAtLambda f = quad.at(sys.lambda);
  const std::vector<std::uint8_t> code{0, 1};
  CantorPoint p = point_of(quad, sys, code, 24, true);
  auto [v2, dv2] = iterate_with_dz(f, p.z, 2 * sys.m);
  CHECK(std::abs(v2 - p.z) < 1e-11);
  CHECK(std::abs(dv2) > 1.0);
  auto [v1, dv1] = iterate_with_dz(f, p.z, sys.m);
  (void)dv1;
  CHECK(std::abs(v1 - p.z) > 0.1);  // not a fixed point
}

TEST_CASE("depth ladder contraction") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  Rng rng(17);
  std::vector<std::uint8_t> code(24, 0);
  for (auto& s : code) s = rng.coin() ? 1 : 0;
  const double diam = 2.0 * sys.radius;
  for (int depth = 3; depth <= 18; ++depth) {
    CantorPoint a = point_of(quad, sys, code, depth);
    CantorPoint b = point_of(quad, sys, code, depth + 1);
    CHECK(std::abs(a.z - b.z) <= std::pow(sys.kappa, depth) * diam + 1e-12);
  }
}

TEST_CASE("shift equivariance") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  const MapAtLambda f = quad.at(sys.lambda);
  Rng rng(23);
  const double diam = 2.0 * sys.radius;
  for (int trial = 0; trial < 20; ++trial) {
    const int depth = 14;
    std::vector<std::uint8_t> code(std::size_t(depth), 0);
    for (auto& s : code) s = rng.coin() ? 1 : 0;
    std::vector<std::uint8_t> shifted(code.begin() + 1, code.end());
    CantorPoint p = point_of(quad, sys, code, depth);
    CantorPoint q = point_of(quad, sys, shifted, depth - 1);
    const cplx pushed = f.eval(p.z);
    CHECK(std::abs(pushed - q.z) <=
          std::pow(sys.kappa, depth - 1) * diam + 1e-10);
  }
}

TEST_CASE("balanced sampling statistics") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  const int N = 4000;
  auto pts = sample_balanced(quad, sys, 12, N, 2024);
  REQUIRE(int(pts.size()) == N);

  int first1 = 0;
  for (const auto& p : pts) first1 += p.code[0];
  const double freq = double(first1) / N;
  CHECK(std::abs(freq - 0.5) <= 3.0 / std::sqrt(double(N)));

  // points land in the cell named by their first symbol
  int misplaced = 0;
  for (const auto& p : pts)
    if (sys.classify_cell(p.z) != int(p.code[0])) ++misplaced;
  CHECK(misplaced == 0);

  PointMeasure mu = to_measure(pts);
  CHECK(std::abs(mu.weight_sum() - mu.recorded_total) < 1e-12);
  CHECK(std::abs(mu.recorded_total - 1.0) < 1e-12);

  auto single = sample_balanced(quad, sys, 12, 1, 7);
  PointMeasure one = to_measure(single);
  CHECK(one.size() == 1);
  CHECK(one.w[0] == 1.0);
}

TEST_CASE("pushforward reproduces cylinder frequencies (chi-square)") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  const MapAtLambda f = quad.at(sys.lambda);
  const int N = 20000;
  auto pts = sample_balanced(quad, sys, 12, N, 99);

  // push forward by f^m and re-bin by measured cell membership
  int count0 = 0;
  for (const auto& p : pts) {
    const cplx pushed = f.eval(p.z);
    if (sys.classify_cell(pushed) == 0) ++count0;
  }
  const double expect = N / 2.0;
  const double chi2 = (count0 - expect) * (count0 - expect) / expect +
                      (N - count0 - expect) * (N - count0 - expect) / expect;
  CHECK(chi2 < 6.635);  // 1% critical value, 1 dof
}

TEST_CASE("repelling target enumeration counts") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();

  auto t1 = repelling_targets(quad, sys, 1);
  CHECK(t1.size() == 2);

  auto t4 = repelling_targets(quad, sys, 4);
  int per_q[5] = {0, 0, 0, 0, 0};
  for (const auto& t : t4) per_q[t.code.size()]++;
  CHECK(per_q[1] == 2);
  CHECK(per_q[2] == 2);
  CHECK(per_q[3] == 6);
  CHECK(per_q[4] == 12);

  const double floor = 1.0 + (1.0 / sys.kappa - 1.0) / 2.0;
  for (const auto& t : t4) CHECK(std::abs(t.multiplier) > floor);

  CHECK_THROWS_AS(repelling_targets(quad, sys, 20), CapacityError);
}

TEST_CASE("motion to the same parameter is the identity") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  auto pts = sample_balanced(quad, sys, 10, 40, 5);
  MotionResult mr = continue_motion(quad, sys, pts, lam1(-3.0), 3);
  REQUIRE(mr.complete);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(mr.point_ok[i] == 1);
    CHECK(std::abs(mr.moved[i].z - pts[i].z) <= 1e-12);
  }
}

TEST_CASE("motion of periodic points to c = -3 + 0.2i") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  auto targets = repelling_targets(quad, sys, 5);
  std::vector<CantorPoint> pts;
  for (const auto& t : targets) {
    CantorPoint p;
    p.code = t.code;
    p.z = t.point;
    p.depth = 24;
    p.periodic = true;
    pts.push_back(p);
  }
  const std::vector<cplx> lam_end = lam1(cplx(-3.0, 0.2));
  MotionResult mr = continue_motion(quad, sys, pts, lam_end, 20);
  REQUIRE(mr.complete);
  const MapAtLambda f_end = FamilySpec::unicritical(2).at(lam_end);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(mr.point_ok[i] == 1);
    const int q = int(pts[i].code.size());
    auto [v, dv] = iterate_with_dz(f_end, mr.moved[i].z, sys.m * q);
    CHECK(std::abs(v - mr.moved[i].z) < 1e-10);
    CHECK(std::abs(dv) > 1.0);  // stays repelling along the walk
  }
}

TEST_CASE("conjugacy: shifting the code commutes with moving the point") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  auto targets = repelling_targets(quad, sys, 6);
  REQUIRE(targets.size() >= 100);

  std::vector<CantorPoint> pts;
  for (const auto& t : targets) {
    CantorPoint p;
    p.code = t.code;
    p.z = t.point;
    p.periodic = true;
    pts.push_back(p);
    // the shifted companion (rotate the periodic block left)
    CantorPoint s = p;
    std::rotate(s.code.begin(), s.code.begin() + 1, s.code.end());
    s.z = 0;
    pts.push_back(s);
  }
  // recompute shifted points exactly at the base parameter
  for (std::size_t i = 1; i < pts.size(); i += 2)
    pts[i] = point_of(quad, sys, pts[i].code, 24, true);

  const std::vector<cplx> lam_end = lam1(cplx(-3.0, 0.2));
  MotionResult mr = continue_motion(quad, sys, pts, lam_end, 20);
  REQUIRE(mr.complete);
  const MapAtLambda f_end = quad.at(lam_end);
  int checked = 0;
  for (std::size_t i = 0; i + 1 < pts.size() && checked < 100; i += 2) {
    if (!mr.point_ok[i] || !mr.point_ok[i + 1]) continue;
    // h(sigma x) vs f^m(h(x)), both sides computed independently
    const cplx lhs = mr.moved[i + 1].z;
    const cplx rhs = f_end.eval(mr.moved[i].z);
    CHECK(std::abs(lhs - rhs) < 1e-8);
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("motion keeps points apart (injectivity proxy)") {
  FamilySpec quad = FamilySpec::unicritical(2);
  BranchSystem sys = system_at_m3();
  auto all = sample_balanced(quad, sys, 14, 50, 31);
  double init_min = 1e300;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      init_min = std::min(init_min, std::abs(all[i].z - all[j].z));
  REQUIRE(init_min > 0);

  for (int stage = 1; stage <= 10; ++stage) {
    const cplx end = cplx(-3.0) + double(stage) / 10.0 * cplx(0.0, 0.2);
    MotionResult mr = continue_motion(quad, sys, all, lam1(end), 2 * stage);
    REQUIRE(mr.complete);
    double min_d = 1e300;
    for (std::size_t i = 0; i < mr.moved.size(); ++i)
      for (std::size_t j = i + 1; j < mr.moved.size(); ++j)
        min_d = std::min(min_d, std::abs(mr.moved[i].z - mr.moved[j].z));
    CHECK(min_d >= 0.1 * init_min);
  }
}
