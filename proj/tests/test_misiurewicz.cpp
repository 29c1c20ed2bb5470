#include "biflab/misiurewicz.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

using namespace biflab;

namespace {
std::vector<cplx> lam1(cplx c) { return {c}; }
const PreperiodicSpec spec21{{2, 1}};
const PreperiodicSpec spec11{{1, 1}};
}  // namespace

TEST_CASE("Newton lands on the Chebyshev parameter") {
  FamilySpec quad = FamilySpec::unicritical(2);
  NewtonOutcome r = newton_solve(quad, spec21, lam1(-1.8));
  REQUIRE(r.ok);
  CHECK(std::abs(r.lambda[0] - cplx(-2.0)) < 1e-10);
  CHECK(r.residual < 1e-12);
}

TEST_CASE("Newton from inside the cardioid reaches the superattracting root") {
  FamilySpec quad = FamilySpec::unicritical(2);
  NewtonOutcome r = newton_solve(quad, spec11, lam1(0.1));
  REQUIRE(r.ok);
  CHECK(std::abs(r.lambda[0]) < 1e-8);
  // ... which certify then rejects
  CertifyResult cr = certify(quad, r.lambda, spec11);
  REQUIRE_FALSE(cr.accepted());
  CHECK(cr.rejection->reason == RejectReason::not_repelling);
  CHECK(cr.rejection->measured < 1e-6);
}

TEST_CASE("spec length must match the parameter dimension") {
  FamilySpec quad = FamilySpec::unicritical(2);
  PreperiodicSpec too_long{{2, 1}, {1, 1}};
  CHECK_THROWS_AS(newton_solve(quad, too_long, lam1(0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(certify(quad, lam1(0.0), too_long), std::invalid_argument);
}

TEST_CASE("certificate at c = -2") {
  FamilySpec quad = FamilySpec::unicritical(2);
  CertifyResult cr = certify(quad, lam1(-2.0), spec21);
  REQUIRE(cr.accepted());
  const MisiurewiczCertificate& c = *cr.certificate;
  CHECK(c.residuals[0] < 1e-10);
  CHECK(std::abs(c.cycle_points[0] - cplx(2.0)) < 1e-12);
  CHECK(std::abs(c.multipliers[0] - cplx(4.0)) < 1e-8);
  CHECK(std::abs(c.det_jacobian - cplx(-8.0)) < 1e-5);
  // D(C - P) = -8/3: DC = -3 and the continued fixed point has Dp = -1/3
  CHECK(std::abs(c.det_graph - cplx(-8.0 / 3.0)) < 1e-5);
  CHECK(c.intersection_index == 1);
  CHECK(c.strictness[0] > 1.0);  // f(0) = -2 is far from the cycle {2}

  // consistency: det DF = (mu - 1) det D(C-P)
  const cplx expect = (c.multipliers[0] - 1.0) * c.det_graph;
  CHECK(std::abs(c.det_jacobian - expect) < 1e-8);
}

TEST_CASE("implicit-function cycle derivative matches finite differences") {
  // p(l) solves f_l(p) = p near 2; dp/dl = -1/sqrt(1-4l) = -1/3 at l = -2
  FamilySpec quad = FamilySpec::unicritical(2);
  const double h = 1e-6;
  auto continued = [&](cplx l) {
    cplx p = 2.0;
    for (int it = 0; it < 50; ++it) {
      const MapAtLambda f = quad.at(std::vector<cplx>{l});
      const cplx num = f.eval(p) - p;
      const cplx den = f.dz(p) - 1.0;
      p -= num / den;
    }
    return p;
  };
  const cplx fd =
      (continued(cplx(-2.0) + h) - continued(cplx(-2.0) - h)) / (2.0 * h);
  CHECK(std::abs(fd - cplx(-1.0 / 3.0)) <= 1e-5 * (1.0 + std::abs(fd)));

  CertifyResult cr = certify(quad, lam1(-2.0), spec21);
  REQUIRE(cr.accepted());
  // det_graph = DC - Dp with DC = -3
  const cplx dp = cplx(-3.0) - cr.certificate->det_graph;
  CHECK(std::abs(dp - fd) <= 1e-5 * (1.0 + std::abs(fd)));
}

TEST_CASE("rejections carry the failed check and measured value") {
  FamilySpec quad = FamilySpec::unicritical(2);
  CertifyResult at_zero = certify(quad, lam1(0.0), spec11);
  REQUIRE_FALSE(at_zero.accepted());
  CHECK(at_zero.rejection->reason == RejectReason::not_repelling);

  CertifyResult sloppy = certify(quad, lam1(-2.001), spec21);
  REQUIRE_FALSE(sloppy.accepted());
  CHECK(sloppy.rejection->reason == RejectReason::residual);
  CHECK(sloppy.rejection->measured > 1e-10);
}

TEST_CASE("complete enumeration for (n,m) = (2,1)") {
  FamilySpec quad = FamilySpec::unicritical(2);
  EnumerationResult er = enumerate_1d(quad, 2, 1, Rect{-3, 3, -3, 3});

  // F = c^3 (c + 2), degree 2^{n+m-1}
  CHECK(er.F.degree() == 4);

  REQUIRE(er.certificates.size() == 1);
  CHECK(std::abs(er.certificates[0].lambda[0] - cplx(-2.0)) < 1e-10);

  REQUIRE(er.rejected.size() == 1);
  CHECK(std::abs(er.rejected[0].root) < 1e-7);
  CHECK(er.rejected[0].multiplicity == 3);
  CHECK(er.rejected[0].intersection_index == 3);
}

TEST_CASE("enumeration for (n,m) = (1,1) finds only the double root 0") {
  FamilySpec quad = FamilySpec::unicritical(2);
  EnumerationResult er = enumerate_1d(quad, 1, 1, Rect{-3, 3, -3, 3});
  CHECK(er.F.degree() == 2);
  CHECK(er.certificates.empty());
  REQUIRE(er.rejected.size() == 1);
  CHECK(er.rejected[0].multiplicity == 2);
}

TEST_CASE("defining polynomial degree follows the exact recursion") {
  FamilySpec quad = FamilySpec::unicritical(2);
  for (int n = 1; n <= 4; ++n)
    for (int m = 1; m <= 3; ++m)
      CHECK(preperiodic_poly_degree(quad, 0, n + m) == (1L << (n + m - 1)));
  CHECK_THROWS_AS(enumerate_1d(quad, 10, 6, Rect{-3, 3, -3, 3}),
                  CapacityError);
}

TEST_CASE("enumeration root count equals the polynomial degree") {
  FamilySpec quad = FamilySpec::unicritical(2);
  EnumerationResult er = enumerate_1d(quad, 3, 2, Rect{-9, 9, -9, 9});
  int count = int(er.certificates.size());
  for (const auto& r : er.rejected) count += r.multiplicity;
  CHECK(count == er.F.degree());
}

TEST_CASE("winding index") {
  FamilySpec quad = FamilySpec::unicritical(2);

  IndexResult at_m2 = local_intersection_index(quad, spec21, lam1(-2.0), 0.1);
  REQUIRE(at_m2.ok);
  CHECK(at_m2.index == 1);

  IndexResult at_0 = local_intersection_index(quad, spec21, lam1(0.0), 0.1);
  REQUIRE(at_0.ok);
  CHECK(at_0.index == 3);

  // synthetic exact-linear map has index 1 at any radius
  for (double r : {1e-3, 0.1, 2.0}) {
    const cplx z0(0.4, -0.7);
    WindingResult w = winding_number([z0](cplx z) { return z - z0; }, z0, r);
    REQUIRE(w.ok);
    CHECK(w.turns == 1);
  }
}

TEST_CASE("certificate stability under perturbed seeds") {
  FamilySpec quad = FamilySpec::unicritical(2);
  const double radius = 0.1;
  Rng rng(99);
  int reconverged = 0;
  for (int s = 0; s < 20; ++s) {
    const cplx seed = cplx(-2.0) + rng.in_disk(0.0, 0.3 * radius);
    NewtonOutcome r = newton_solve(quad, spec21, lam1(seed));
    if (r.ok && std::abs(r.lambda[0] - cplx(-2.0)) <= 1e-9) ++reconverged;
  }
  CHECK(reconverged >= 1);
}

TEST_CASE("search around the Chebyshev parameter") {
  FamilySpec quad = FamilySpec::unicritical(2);
  SearchConfig cfg;
  cfg.n_cap = 4;
  cfg.budget = 400;
  cfg.seed = 5;
  SearchResult sr = search_near(quad, lam1(-2.0), 0.5, cfg);
  bool found = false;
  for (const auto& c : sr.certificates)
    if (std::abs(c.lambda[0] - cplx(-2.0)) < 1e-9) found = true;
  CHECK(found);
  CHECK(sr.diagnostics.newton_runs <= cfg.budget);
}

TEST_CASE("no certificates inside a stability component") {
  FamilySpec quad = FamilySpec::unicritical(2);
  SearchConfig cfg;
  cfg.n_cap = 7;
  cfg.sum_cap = 8;
  cfg.budget = 600;
  SearchResult sr = search_near(quad, lam1(0.1), 0.05, cfg);
  CHECK(sr.certificates.empty());
  CHECK(sr.diagnostics.newton_runs > 0);
}

TEST_CASE("search rejects a non-positive radius") {
  FamilySpec quad = FamilySpec::unicritical(2);
  CHECK_THROWS_AS(search_near(quad, lam1(0.0), 0.0, {}),
                  std::invalid_argument);
}
