#include "biflab/family.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "biflab/rng.hpp"

using namespace biflab;

namespace {

std::vector<cplx> lam1(cplx c) { return {c}; }
std::vector<cplx> lam2(cplx a, cplx b) { return {a, b}; }

// Numerical lambda-derivative of f^n(c_j) by central differences, one
// parameter coordinate at a time.
cplx orbit_fd_partial(const FamilySpec& fam, std::vector<cplx> lam, int j,
                      int n, int t, double h) {
  auto value = [&](std::vector<cplx> l) {
    const MapAtLambda f = fam.at(l);
    cplx z = fam.critical_value(j, l);
    for (int k = 0; k < n; ++k) z = f.eval(z);
    return z;
  };
  std::vector<cplx> hi = lam, lo = lam;
  hi[std::size_t(t)] += h;
  lo[std::size_t(t)] -= h;
  return (value(hi) - value(lo)) / (2.0 * h);
}

}  // namespace

TEST_CASE("eval_map basics") {
  FamilySpec quad = FamilySpec::unicritical(2);
  CHECK(eval_map(quad, lam1(0.0), 2.0) == cplx(4.0));
  CHECK(eval_map(quad, lam1(-2.0), 0.0) == cplx(-2.0));

  FamilySpec cubic = FamilySpec::cubic_pm();
  CHECK(std::abs(eval_map(cubic, lam2(0.0, 0.0), cplx(1.0, 1.0)) -
                 cplx(-2.0, 2.0)) < 1e-14);

  CHECK_THROWS_AS(
      eval_map(quad, lam1(0.0), cplx(std::nan(""), 0.0)),
      std::invalid_argument);
}

TEST_CASE("built-in families satisfy the critical-point identity") {
  // construction runs the sampled df/dz(c_j) == 0 check internally
  REQUIRE_NOTHROW(FamilySpec::unicritical(2));
  REQUIRE_NOTHROW(FamilySpec::unicritical(3));
  REQUIRE_NOTHROW(FamilySpec::cubic_pm());

  // a wrongly marked point must be rejected
  std::vector<MultiPoly> coeffs(3);
  coeffs[0] = MultiPoly::variable(0);
  coeffs[2] = MultiPoly::constant(1.0);
  std::vector<MultiPoly> bad{MultiPoly::constant(0.5)};
  CHECK_THROWS_AS(
      FamilySpec("broken", 2, 1, std::move(coeffs), std::move(bad)),
      std::invalid_argument);
}

TEST_CASE("orbit_jet against symbolic derivatives of P_n(c)") {
  FamilySpec quad = FamilySpec::unicritical(2);

  // P_2(c) = c^2 + c, P_2(-2) = 2, P_2'(-2) = -3
  OrbitJetResult r = orbit_jet(quad, lam1(-2.0), 0, 2);
  REQUIRE_FALSE(r.overflow);
  CHECK(std::abs(r.jet.v - cplx(2.0)) < 1e-13);
  CHECK(std::abs(r.jet.d[0] - cplx(-3.0)) < 1e-13);

  // P_n(c) = c + O(c^2): at c = 0 value 0, derivative 1
  for (int n = 1; n <= 6; ++n) {
    OrbitJetResult z = orbit_jet(quad, lam1(0.0), 0, n);
    CHECK(std::abs(z.jet.v) == 0.0);
    CHECK(std::abs(z.jet.d[0] - cplx(1.0)) < 1e-14);
  }

  // n = 0 returns the critical point with its exact derivative
  FamilySpec cubic = FamilySpec::cubic_pm();
  OrbitJetResult c0 = orbit_jet(cubic, lam2(cplx(0.3, 0.1), 0.2), 1, 0);
  CHECK(std::abs(c0.jet.v - cplx(-0.3, -0.1)) < 1e-15);
  CHECK(std::abs(c0.jet.d[0] - cplx(-1.0)) < 1e-15);
  CHECK(std::abs(c0.jet.d[1]) < 1e-15);
}

TEST_CASE("jet partials agree with central finite differences") {
  FamilySpec quad = FamilySpec::unicritical(2);
  const std::vector<cplx> samples = {cplx(-0.12, 0.05), cplx(0.21, 0.31),
                                     cplx(-1.1, 0.1)};
  for (cplx c : samples) {
    for (int n : {1, 5, 12, 20}) {
      OrbitJetResult r = orbit_jet(quad, lam1(c), 0, n);
      REQUIRE_FALSE(r.overflow);
      const cplx fd = orbit_fd_partial(quad, lam1(c), 0, n, 0, 1e-6);
      CHECK(std::abs(r.jet.d[0] - fd) <= 1e-5 * (1.0 + std::abs(fd)));
    }
  }

  FamilySpec cubic = FamilySpec::cubic_pm();
  const std::vector<cplx> a = lam2(cplx(0.15, 0.08), cplx(-0.2, 0.1));
  for (int n : {1, 4, 9}) {
    for (int j = 0; j < 2; ++j) {
      OrbitJetResult r = orbit_jet(cubic, a, j, n);
      REQUIRE_FALSE(r.overflow);
      for (int t = 0; t < 2; ++t) {
        const cplx fd = orbit_fd_partial(cubic, a, j, n, t, 1e-6);
        CHECK(std::abs(r.jet.d[std::size_t(t)] - fd) <=
              1e-5 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST_CASE("jet arithmetic obeys the Leibniz rule") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Jet a, b;
    a.dim = b.dim = 2;
    a.v = rng.in_disk(0.0, 2.0);
    b.v = rng.in_disk(0.0, 2.0);
    for (int t = 0; t < 2; ++t) {
      a.d[std::size_t(t)] = rng.in_disk(0.0, 2.0);
      b.d[std::size_t(t)] = rng.in_disk(0.0, 2.0);
    }
    const Jet p = a * b;
    for (int t = 0; t < 2; ++t) {
      const cplx expect = a.v * b.d[std::size_t(t)] + b.v * a.d[std::size_t(t)];
      CHECK(std::abs(p.d[std::size_t(t)] - expect) < 1e-14);
    }
  }
}

TEST_CASE("orbit overflow is reported with the escape iterate") {
  FamilySpec quad = FamilySpec::unicritical(2);
  OrbitJetResult r = orbit_jet(quad, lam1(10.0), 0, 64);
  CHECK(r.overflow);
  CHECK(r.escape_iter > 0);
  CHECK(r.escape_iter <= 12);
}

TEST_CASE("cycle multipliers") {
  FamilySpec quad = FamilySpec::unicritical(2);
  CHECK(std::abs(cycle_multiplier(quad, lam1(0.0), 0.0, 1)) == 0.0);
  CHECK(std::abs(cycle_multiplier(quad, lam1(-2.0), 2.0, 1) - cplx(4.0)) <
        1e-12);

  FamilySpec cubic = FamilySpec::cubic_pm();
  CHECK(std::abs(cycle_multiplier(cubic, lam2(0.0, 0.0), 1.0, 1) - cplx(3.0)) <
        1e-12);

  CHECK_THROWS_AS(cycle_multiplier(quad, lam1(-2.0), 0.5, 1), NotACycleError);
}

TEST_CASE("multiplier is constant along a cycle") {
  // 2-cycle of z^2 - 2 at (-1 +- sqrt(5))/2, multiplier -4
  FamilySpec quad = FamilySpec::unicritical(2);
  const cplx p1 = (-1.0 + std::sqrt(5.0)) / 2.0;
  const cplx p2 = (-1.0 - std::sqrt(5.0)) / 2.0;
  const cplx m1 = cycle_multiplier(quad, lam1(-2.0), p1, 2);
  const cplx m2 = cycle_multiplier(quad, lam1(-2.0), p2, 2);
  CHECK(std::abs(m1 - m2) < 1e-10);
  CHECK(std::abs(m1 - cplx(-4.0)) < 1e-10);
}

TEST_CASE("periodic points of the quadratic family") {
  FamilySpec quad = FamilySpec::unicritical(2);

  auto fixed0 = periodic_points(quad, lam1(0.0), 1);
  REQUIRE(fixed0.size() == 2);
  CHECK(std::abs(fixed0[0].point - cplx(0.0)) < 1e-10);
  CHECK(std::abs(fixed0[0].multiplier) < 1e-10);
  CHECK(std::abs(fixed0[1].point - cplx(1.0)) < 1e-10);
  CHECK(std::abs(fixed0[1].multiplier - cplx(2.0)) < 1e-10);

  auto fixed2 = periodic_points(quad, lam1(-2.0), 1);
  REQUIRE(fixed2.size() == 2);
  CHECK(std::abs(fixed2[0].point - cplx(-1.0)) < 1e-10);
  CHECK(std::abs(fixed2[0].multiplier - cplx(-2.0)) < 1e-10);
  CHECK(std::abs(fixed2[1].point - cplx(2.0)) < 1e-10);
  CHECK(std::abs(fixed2[1].multiplier - cplx(4.0)) < 1e-10);

  auto per2 = periodic_points(quad, lam1(0.0), 2);
  int with_mult = 0;
  for (const auto& p : per2) with_mult += p.multiplicity;
  CHECK(with_mult == 4);
}

TEST_CASE("applying f permutes the periodic-point multiset") {
  FamilySpec quad = FamilySpec::unicritical(2);
  const std::vector<cplx> lam = lam1(cplx(0.1, 0.2));
  auto pts = periodic_points(quad, lam, 3);
  const MapAtLambda f = quad.at(lam);

  std::vector<cplx> orig, mapped;
  for (const auto& p : pts)
    for (int k = 0; k < p.multiplicity; ++k) {
      orig.push_back(p.point);
      mapped.push_back(f.eval(p.point));
    }
  REQUIRE(orig.size() == 8);

  // greedy matching; fine at these scales
  double worst = 0;
  std::vector<bool> used(orig.size(), false);
  for (cplx m : mapped) {
    double best = 1e9;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < orig.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(orig[i] - m);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("periodic point degree cap") {
  FamilySpec quad = FamilySpec::unicritical(2);
  CHECK_THROWS_AS(periodic_points(quad, lam1(0.0), 20, 1 << 14),
                  CapacityError);
}
