#include <cmath>
#include <random>

#include "breather/discrete_data.hpp"
#include "breather/dressing.hpp"
#include "breather/error.hpp"
#include "breather/two_soliton.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace breather;
using oracle::cplx;
using oracle::kPi;

namespace {

const TwoSolitonParams kQuarter{0.25, 0.75, 0.0, 0.0};
const TwoSolitonParams kResonant{1.0 / std::sqrt(2.0), 1.0, 0.0, 0.0};
const TwoSolitonParams kPhased{0.4, 0.9, 0.3, -1.1};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

DiscreteData three_point_data() {
  DiscreteData d;
  d.lambdas = {cplx(0.2, 0.4), cplx(-0.3, 0.7), cplx(0.0, 1.1)};
  d.g = {{cplx(1.0, 0.2), cplx(0.3, -0.5)}, {cplx(-0.4, 0.9), cplx(0.7, 0.1)}, {cplx(0.5, 0.5), cplx(-1.0, 0.3)}};
  return d;
}

}  // namespace

TEST_CASE("discrete data invariants are enforced") {
  DiscreteData d = DiscreteData::from_two_soliton(kQuarter);
  CHECK_NOTHROW(d.validate());

  DiscreteData lower = d;
  lower.lambdas[0] = cplx(0.0, -0.25);
  CHECK_THROWS_AS(lower.validate(), InvalidArgument);

  DiscreteData repeated = d;
  repeated.lambdas[1] = repeated.lambdas[0];
  CHECK_THROWS_AS(repeated.validate(), InvalidArgument);

  DiscreteData ragged = three_point_data();
  ragged.g[1].pop_back();
  CHECK_THROWS_AS(ragged.validate(), InvalidArgument);

  CHECK_THROWS_AS((TwoSolitonParams{0.75, 0.25, 0.0, 0.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((TwoSolitonParams{0.0, 0.25, 0.0, 0.0}.validate()), InvalidArgument);
}

TEST_CASE("two-soliton period and equal Floquet multipliers") {
  for (const auto& p : {kQuarter, kResonant, kPhased}) {
    const double L = p.period();
    CHECK(L == doctest::Approx(kPi / (p.s() * p.d())).epsilon(1e-15));
    const cplx m1 = std::polar(1.0, 2.0 * p.rho1 * p.rho1 * L);
    const cplx m2 = std::polar(1.0, 2.0 * p.rho2 * p.rho2 * L);
    CHECK(std::abs(m1 - m2) < 1e-13);
  }
  CHECK(kQuarter.period() == doctest::Approx(2.0 * kPi).epsilon(1e-15));
  CHECK(kResonant.period() == doctest::Approx(2.0 * kPi).epsilon(1e-15));
}

TEST_CASE("dressing relations hold at random points") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(-15.0, 15.0), ut(-10.0, 10.0), unit(-1.0, 1.0);
  for (const DiscreteData& d : {DiscreteData::from_two_soliton(kQuarter), DiscreteData::from_two_soliton(kPhased),
                                DiscreteData::single_well(0.6, 0.4)}) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const CoefficientSolution s = solve_dressing(d, ux(rng), ut(rng));
      worst = std::max(worst, dressing_relation_residual(d, s));
    }
    CHECK(worst <= 1e-10);
  }
  // Moving solitons separate in time; stay where they still interact.
  {
    const DiscreteData d = three_point_data();
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const CoefficientSolution s = solve_dressing(d, 5.0 * unit(rng), 1.5 * unit(rng));
      worst = std::max(worst, dressing_relation_residual(d, s));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("V0 at the origin for the (1/4, 3/4) well") {
  // Peak of the NLS two-soliton |psi| is 2(rho1 + rho2) = 2, so V0 = -|psi|^2 = -4.
  const DiscreteData d = DiscreteData::from_two_soliton(kQuarter);
  CHECK(eval_potential(d, 0.0, 0.0) == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(std::abs(two_soliton_fields(kQuarter, 0.0, 0.0).b1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single well is a shifted sech^2") {
  for (double rho : {0.3, 0.5, 1.2}) {
    const DiscreteData d = DiscreteData::single_well(rho, 0.7);
    const auto V = [&](double x) { return eval_potential(d, x, 0.0); };
    // The well is symmetric about its centre, so the centroid locates it.
    const double X = 40.0 / rho;
    const double centre = oracle::simpson([&](double x) { return x * V(x); }, -X, X, 8000) /
                          oracle::simpson(V, -X, X, 8000);
    const double delta = 2.0 * rho * centre;
    double worst = 0.0;
    for (double x = -20.0; x <= 20.0; x += 0.37) {
      const double c = std::cosh(2.0 * rho * x - delta);
      worst = std::max(worst, std::abs(V(x) + 4.0 * rho * rho / (c * c)));
    }
    CHECK(worst <= 1e-8);
    // Stationary: no t dependence at all.
    CHECK(eval_potential(d, 1.3, 0.0) == doctest::Approx(eval_potential(d, 1.3, 17.0)).epsilon(1e-13));
  }
}

TEST_CASE("closed-form two-soliton fields agree with the general constructor") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(-12.0, 12.0), ut(0.0, 20.0);
  for (const auto& p : {kQuarter, kResonant, kPhased}) {
    const DiscreteData d = DiscreteData::from_two_soliton(p);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double x = ux(rng), t = ut(rng);
      const CoefficientSolution s = solve_dressing(d, x, t);
      const TwoSolitonFields f = two_soliton_fields(p, x, t);
      worst = std::max({worst, rel(f.b1, s.b[1][0]), rel(f.a0, s.a[0]), rel(f.a1, s.a[1])});
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("eval_a symmetry, Floquet multipliers and far-field modulus") {
  const DiscreteData d = DiscreteData::from_two_soliton(kQuarter);
  const double L = kQuarter.period();
  for (double x : {0.3, 2.5, -4.0}) {
    for (double t : {0.0, 1.7}) {
      for (cplx lam : {cplx(0.7, 0.0), cplx(0.2, 0.1), cplx(-1.3, 0.0)})
        CHECK(rel(eval_a(d, -x, t, lam), eval_a(d, x, t, -lam)) < 1e-11);
      for (double rho : {kQuarter.rho1, kQuarter.rho2}) {
        const cplx lam(0.0, -rho);
        const cplx shifted = eval_a(d, x, t + L, lam);
        const cplx expected = std::polar(1.0, 2.0 * rho * rho * L) * eval_a(d, x, t, lam);
        CHECK(rel(shifted, expected) < 1e-10);
      }
    }
  }
  // |a| tends to |prod (lambda - lambda_k)| for real lambda on either side.
  for (double lam : {0.3, 0.7, 2.0}) {
    const double expected = std::abs(cplx(lam, -kQuarter.rho1)) * std::abs(cplx(lam, -kQuarter.rho2));
    CHECK(std::abs(eval_a(d, 40.0, 0.0, lam)) == doctest::Approx(expected).epsilon(1e-8));
    CHECK(std::abs(eval_a(d, -40.0, 0.0, lam)) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("V0 is negative, even, periodic and Schwartz") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ux(-30.0, 30.0), ut(0.0, 10.0);
  for (const auto& p : {kQuarter, kResonant, kPhased}) {
    const double L = p.period();
    for (int i = 0; i < 200; ++i) {
      const double x = ux(rng), t = ut(rng);
      const double v = two_soliton_potential(p, x, t);
      CHECK(v <= 0.0);
      CHECK(std::abs(v - two_soliton_potential(p, -x, t)) <= 1e-13);
      CHECK(std::abs(v - two_soliton_potential(p, x, t + L)) <= 1e-12);
    }
    const double far = 40.0 / p.rho1;
    for (double t : {0.0, 0.3 * L, 0.5 * L}) {
      CHECK(std::abs(two_soliton_potential(p, far, t)) < 1e-12);
      CHECK(std::abs(two_soliton_potential(p, -far, t)) < 1e-12);
    }
    // No overflow far outside any sensible domain.
    CHECK(two_soliton_potential(p, 1e4, 0.3) == 0.0);
    CHECK(std::isfinite(eval_potential(DiscreteData::from_two_soliton(p), 500.0, 0.3)));
  }
  // Even in x for N = 1 general data too.
  const DiscreteData d = DiscreteData::from_two_soliton(kPhased);
  CHECK(eval_potential(d, 1.7, 0.4) == doctest::Approx(eval_potential(d, -1.7, 0.4)).epsilon(1e-11));
}

TEST_CASE("a0 is even and a1 is odd in x") {
  for (double x : {0.4, 3.0, 9.0}) {
    const auto fp = two_soliton_fields(kPhased, x, 0.8);
    const auto fm = two_soliton_fields(kPhased, -x, 0.8);
    CHECK(rel(fp.a0, fm.a0) < 1e-12);
    CHECK(rel(fp.a1, -fm.a1) < 1e-12);
  }
}

TEST_CASE("L1 norm of V0 is constant in time and equals 4 (rho1 + rho2)") {
  for (const auto& p : {kQuarter, kResonant}) {
    const double L = p.period();
    const double X = 60.0 / p.rho1;
    for (double t : {0.0, L / 3.0, L / 2.0}) {
      const double l1 = oracle::simpson([&](double x) { return std::abs(two_soliton_potential(p, x, t)); }, -X, X, 40000);
      CHECK(l1 == doctest::Approx(4.0 * (p.rho1 + p.rho2)).epsilon(1e-8));
    }
  }
}

TEST_CASE("psi = 2i b1 solves the focusing NLS") {
  for (const auto& p : {kQuarter, kResonant}) {
    const auto psi = [&](double x, double t) { return cplx(0.0, 2.0) * two_soliton_fields(p, x, t).b1; };
    double worst = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.5)
      for (double t = 0.0; t < p.period(); t += 0.7) worst = std::max(worst, oracle::nls_residual(psi, x, t, 1e-3));
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("commensurability classification") {
  PeriodReport r = check_commensurate(DiscreteData::from_two_soliton(kQuarter));
  CHECK(r.kind == TimeDependence::Periodic);
  CHECK(r.period == doctest::Approx(2.0 * kPi).epsilon(1e-12));

  r = check_commensurate(DiscreteData::from_two_soliton(kResonant));
  CHECK(r.kind == TimeDependence::Periodic);
  CHECK(r.period == doctest::Approx(2.0 * kPi).epsilon(1e-12));

  r = check_commensurate(DiscreteData::single_well(0.5));
  CHECK(r.kind == TimeDependence::Stationary);

  // rho^2 = 1, 2, 1+sqrt2: differences 1 and sqrt 2 are incommensurate.
  DiscreteData q;
  q.lambdas = {cplx(0.0, 1.0), cplx(0.0, std::sqrt(2.0)), cplx(0.0, std::sqrt(1.0 + std::sqrt(2.0)))};
  q.g = {{1.0}, {1.0}, {1.0}};
  CHECK(check_commensurate(q).kind == TimeDependence::Quasiperiodic);

  CHECK_THROWS_AS(check_commensurate(three_point_data()), NotImaginarySpectrum);
}

TEST_CASE("nearly coincident spectral points are reported as singular") {
  DiscreteData d;
  d.lambdas = {cplx(0.0, 0.5), cplx(0.0, 0.5 + 1e-13)};
  d.g = {{1.0}, {1.0}};
  CHECK_THROWS_AS(solve_dressing(d, 0.3, 0.0), SingularSystem);
}
