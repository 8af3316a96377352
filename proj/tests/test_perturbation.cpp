#include <cmath>
#include <map>

#include "breather/error.hpp"
#include "breather/perturbation.hpp"
#include "breather/two_soliton.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace breather;
using oracle::cplx;
using oracle::kPi;

namespace {

const TwoSolitonParams kQuarter{0.25, 0.75, 0.0, 0.0};
const TwoSolitonParams kResonant{1.0 / std::sqrt(2.0), 1.0, 0.0, 0.0};

CouplingOptions fast() {
  CouplingOptions o;
  o.run_oracle = false;
  o.threads = 1;
  return o;
}

// Couplings are expensive; build each configuration once per process.
const CouplingData& coupling(const TwoSolitonParams& p, Parity par, double eps, bool drop = false) {
  static std::map<std::tuple<double, int, double, bool>, CouplingData> cache;
  const auto key = std::make_tuple(p.rho1, static_cast<int>(par), eps, drop);
  auto it = cache.find(key);
  if (it == cache.end()) {
    CouplingOptions o;
    o.threads = 1;
    o.drop_zero_resonance = drop;
    if (p.rho1 > 0.5) o.k_max = 64;
    it = cache.emplace(key, compute_coupling(PerturbationSpec::detuning(p, eps), par, o)).first;
  }
  return it->second;
}

// W1 = (1 - (x/2) d/dx) V0 with a centred difference.
double first_order_W(const TwoSolitonParams& p, double x, double t) {
  const double h = 1e-4;
  const double dv = (two_soliton_potential(p, x + h, t) - two_soliton_potential(p, x - h, t)) / (2.0 * h);
  return two_soliton_potential(p, x, t) - 0.5 * x * dv;
}

}  // namespace

TEST_CASE("detuning perturbation: zero, even, first order in epsilon") {
  for (double x : {0.0, 1.3, -7.0})
    for (double t : {0.0, 2.1}) CHECK(detuning_W(kQuarter, 0.0, x, t) == 0.0);

  for (double x : {0.4, 3.3, 11.0})
    for (double t : {0.3, 4.0})
      CHECK(detuning_W(kQuarter, 0.04, x, t) == doctest::Approx(detuning_W(kQuarter, 0.04, -x, t)).epsilon(1e-13));

  auto remainder = [](double eps) {
    double worst = 0.0;
    for (double x = -15.0; x <= 15.0; x += 0.25)
      for (double t : {0.0, 1.0, 2.5, 4.4})
        worst = std::max(worst, std::abs(detuning_W(kQuarter, eps, x, t) - eps * first_order_W(kQuarter, x, t)));
    return worst;
  };
  const double ratio = remainder(1e-2) / remainder(1e-3);
  CHECK(ratio > 80.0);
  CHECK(ratio < 120.0);
}

TEST_CASE("perturbation specs are checked for evenness and period") {
  CHECK_NOTHROW(PerturbationSpec::detuning(kQuarter, 0.02).validate());
  const double L = kQuarter.period();
  CHECK_THROWS_AS(PerturbationSpec::custom(kQuarter, [](double x, double) { return x * std::exp(-x * x); }),
                  InvalidArgument);
  CHECK_THROWS_AS(
      PerturbationSpec::custom(kQuarter, [](double x, double t) { return std::exp(-x * x) * std::cos(1.3 * t); }),
      InvalidArgument);
  CHECK_NOTHROW(PerturbationSpec::custom(kQuarter, [L](double x, double t) {
    return std::exp(-x * x) * std::cos(2.0 * kPi * t / L);
  }));
  CHECK_THROWS_AS(PerturbationSpec::detuning(kQuarter, -1.5), InvalidArgument);
}

TEST_CASE("discrete Fourier coefficients") {
  const std::size_t n = 64;
  std::vector<cplx> constant(n, cplx(2.5, -1.0));
  const FourierSeries c = fourier_coeffs(constant, 8);
  CHECK(std::abs(c[0] - cplx(2.5, -1.0)) < 1e-14);
  for (long k = 1; k <= 8; ++k) CHECK(std::abs(c[k]) + std::abs(c[-k]) < 1e-14);

  std::vector<cplx> cosine(n);
  for (std::size_t j = 0; j < n; ++j) cosine[j] = std::cos(2.0 * kPi * static_cast<double>(j) / n);
  FourierOptions real;
  real.real_valued = true;
  const FourierSeries s = fourier_coeffs(cosine, 8, real);
  CHECK(std::abs(s[1] - 0.5) < 1e-14);
  CHECK(std::abs(s[-1] - 0.5) < 1e-14);
  CHECK(std::abs(s[0]) < 1e-14);
  CHECK(std::abs(s.evaluate(0.3, 1.0) - std::cos(2.0 * kPi * 0.3)) < 1e-13);

  std::vector<cplx> lumpy(n);
  for (std::size_t j = 0; j < n; ++j) lumpy[j] = std::exp(std::sin(2.0 * kPi * static_cast<double>(j) / n));
  const FourierSeries r = fourier_coeffs(lumpy, 8, real);
  for (long k = 0; k <= 8; ++k) CHECK(std::abs(r[-k] - std::conj(r[k])) < 1e-12);

  std::vector<cplx> nyquist(n);
  for (std::size_t j = 0; j < n; ++j) nyquist[j] = (j % 2 ? -1.0 : 1.0) + 0.1;
  CHECK_THROWS_AS(fourier_coeffs(nyquist, 8), AliasingSuspected);
  CHECK_THROWS_AS(fourier_coeffs(constant, 32), InvalidArgument);
}

TEST_CASE("matrix elements against direct quadrature") {
  const auto W = PerturbationSpec::detuning(kQuarter, 0.04);
  const double L = kQuarter.period();
  for (Parity par : {Parity::Even, Parity::Odd}) {
    MatrixElementIntegrator in(W, par, fast());
    for (double t : {0.0, 1.9}) {
      const double X = 40.0;
      const double M = oracle::simpson(
          [&](double x) { return std::norm(psi_b_parity(kQuarter, par, x, t)) * W(x, t); }, -X, X, 8000);
      const MatrixElements me = in.at(t, {0.3, 1.2});
      CHECK(me.M == doctest::Approx(M).epsilon(1e-8));
      for (double lam : {0.3, 1.2}) {
        const cplx raw = oracle::simpson(
            [&](double x) {
              return std::conj(psi_b_parity(kQuarter, par, x, t)) * W(x, t) * psi_d_parity(kQuarter, par, x, t, lam);
            },
            -X, X, 8000);
        const cplx expected = raw * std::polar(1.0, 2.0 * (lam * lam + kQuarter.floquet_exponent()) * t);
        CHECK(std::abs(in.N(t, lam) - expected) < 1e-8 * std::abs(expected));
      }
      // Periodic once the phases are applied.
      const MatrixElements later = in.at(t + L, {0.3, 1.2});
      CHECK(std::abs(later.M - me.M) < 1e-10);
      for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(later.N[j] - me.N[j]) < 1e-10);
    }
  }
  MatrixElementIntegrator odd(W, Parity::Odd, fast());
  CHECK(std::abs(odd.N(0.7, 0.0)) < 1e-14);

  MatrixElementIntegrator zero(PerturbationSpec::detuning(kQuarter, 0.0), Parity::Even, fast());
  const MatrixElements z = zero.at(0.5, {0.0, 0.5, 1.0}, true);
  CHECK(z.M == 0.0);
  for (const cplx& v : z.N) CHECK(v == cplx(0.0));
  CHECK(z.K->cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("continuum kernel is Hermitian") {
  const auto W = PerturbationSpec::detuning(kQuarter, 0.04);
  const SpectralGrid sg = SpectralGrid::make(Parity::Even, 3.0, 4, 8);
  for (double t : {0.0, 2.3}) {
    const MatrixElements me = matrix_elements(W, Parity::Even, t, sg, true, fast());
    REQUIRE(me.K.has_value());
    const Eigen::MatrixXcd& K = *me.K;
    CHECK((K - K.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * K.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("resonance positions") {
  const double L = 2.0 * kPi;
  for (long n = 0; n < 10; ++n) {
    CHECK(resonance_sigma(n, kQuarter.period(), kQuarter.floquet_exponent()) ==
          doctest::Approx(n / 2.0 - 1.0 / 16.0).epsilon(1e-15));
    CHECK(resonance_sigma(n, kResonant.period(), kResonant.floquet_exponent()) ==
          doctest::Approx(n / 2.0 - 0.5).epsilon(1e-15));
  }
  CHECK(first_resonance(L, 1.0 / 16.0) == 1);
  CHECK(first_resonance(kResonant.period(), kResonant.floquet_exponent()) == 2);
}

TEST_CASE("odd coupling at (1/4, 3/4): structure, oracle and golden rule") {
  const CouplingData& c = coupling(kQuarter, Parity::Odd, 0.04);
  const double L = kQuarter.period();

  for (long k = 0; k <= c.fourier_M.K; ++k) CHECK(std::abs(c.fourier_M[-k] - std::conj(c.fourier_M[k])) < 1e-12);
  CHECK(c.near_zero.empty());
  REQUIRE(!c.resonances.empty());
  CHECK(c.resonances.front().n == 1);

  const DecayPrediction d = predict(c);
  double sum = 0.0;
  for (const Resonance& r : c.resonances) {
    CHECK(r.sigma == resonance_sigma(r.n, L, c.beta));
    CHECK(r.contribution >= 0.0);
    CHECK(r.contribution == doctest::Approx(0.25 * kPi * std::norm(r.coefficient) / std::sqrt(r.sigma)).epsilon(1e-13));
    if (r.contribution > 1e-10 * d.Gamma) {
      CHECK(r.oracle_checked);
      CHECK(r.oracle_error <= 1e-6);
    }
    sum += r.contribution;
  }
  CHECK(d.Gamma > 0.0);
  CHECK(d.Gamma == doctest::Approx(sum).epsilon(1e-13));

  // Harmonics fall off faster than any power: successive ratios do not creep towards 1.
  std::vector<double> mag;
  for (const Resonance& r : c.resonances) mag.push_back(std::abs(r.coefficient));
  REQUIRE(mag.size() >= 13);
  const double r1 = mag[8] / mag[4], r2 = mag[12] / mag[8];
  INFO("tail ratios " << r1 << " " << r2);
  CHECK(r1 < 0.1);
  CHECK(r2 < 1.5 * r1);

  // Small-time coefficient equals the continuum share of ||W psi_b||^2.
  MatrixElementIntegrator in(PerturbationSpec::detuning(kQuarter, 0.04), Parity::Odd, fast());
  CHECK(d.small_time_C == doctest::Approx(in.continuum_coupling_norm(0.0)).epsilon(1e-4));
  CHECK(d.small_time_C > 0.0);

  // Integrated M from its series against direct quadrature in time.
  const double T = 0.37 * L;
  const double direct = oracle::simpson([&](double t) { return in.at(t, {}).M; }, 0.0, T, 200);
  CHECK(integrated_M(c.fourier_M, L, T) == doctest::Approx(direct).epsilon(1e-9));
  CHECK(d.Mbar == doctest::Approx(c.fourier_M[0].real()).epsilon(1e-15));
  CHECK(integrated_M(c.fourier_M, L, L) == doctest::Approx(d.Mbar * L).epsilon(1e-12));
}

TEST_CASE("time-domain oracle reproduces Gamma and Lambda") {
  const double L = kQuarter.period();
  {
    const CouplingData& c = coupling(kQuarter, Parity::Odd, 0.04);
    const DecayPrediction d = predict(c);
    const cplx s = time_domain_rates(c, 100.0 * L, 200.0 * L);
    CHECK(s.real() == doctest::Approx(d.Gamma).epsilon(1e-2));
    CHECK(-s.imag() == doctest::Approx(d.Lambda).epsilon(1e-2));
  }
  {
    // The lambda = 0 endpoint converges slowly in even parity.
    const CouplingData& c = coupling(kQuarter, Parity::Even, 0.04);
    const DecayPrediction d = predict(c);
    const cplx s = time_domain_rates(c, 100.0 * L, 200.0 * L);
    CHECK(s.real() == doctest::Approx(d.Gamma).epsilon(5e-2));
    CHECK(-s.imag() == doctest::Approx(d.Lambda).epsilon(1e-2));
  }
}

TEST_CASE("zero-energy resonance at (1/sqrt2, 1)") {
  const CouplingData& even = coupling(kResonant, Parity::Even, 0.04);
  REQUIRE(even.near_zero.size() == 1);
  CHECK(even.near_zero.front() == 1);
  CHECK_THROWS_AS(golden_rule(even), NearZeroResonance);
  CHECK_THROWS_AS(lamb_shift(even), NearZeroResonance);
  CHECK_THROWS_AS(predict(even), NearZeroResonance);

  const DecayPrediction dropped = predict(coupling(kResonant, Parity::Even, 0.04, true));
  CHECK(dropped.dropped == std::vector<long>{1});
  CHECK(std::isfinite(dropped.Gamma));
  CHECK(dropped.Gamma > 0.0);

  // Odd parity vanishes fast enough at lambda = 0 to need no special handling.
  const DecayPrediction odd = predict(coupling(kResonant, Parity::Odd, 0.04));
  CHECK(std::isfinite(odd.Gamma));
  CHECK(odd.Gamma > 0.0);
  CHECK(std::isfinite(odd.Lambda));
  CHECK(odd.n0 == 2);
}

TEST_CASE("no perturbation, no decay") {
  for (Parity par : {Parity::Even, Parity::Odd}) {
    const DecayPrediction d = predict(compute_coupling(PerturbationSpec::detuning(kQuarter, 0.0), par, fast()));
    CHECK(d.Gamma == 0.0);
    CHECK(d.Lambda == 0.0);
    CHECK(d.small_time_C == 0.0);
    CHECK(d.Mbar == 0.0);
  }
}

TEST_CASE("rates scale like epsilon squared") {
  std::vector<double> g, l;
  for (double eps : {0.04, 0.02, 0.01}) {
    const DecayPrediction d = predict(compute_coupling(PerturbationSpec::detuning(kQuarter, eps), Parity::Odd, fast()));
    g.push_back(d.Gamma / (eps * eps));
    l.push_back(d.Lambda / (eps * eps));
  }
  const auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / std::abs(*hi);
  };
  CHECK(spread(g) <= 0.1);
  CHECK(spread(l) <= 0.1);
}

TEST_CASE("amplitude predictor") {
  const DecayPrediction d = predict(coupling(kQuarter, Parity::Odd, 0.04));
  const cplx A0(0.6, -0.8);
  CHECK(predict_amplitude(d, A0, 0.0) == A0);
  for (double t : {1.0, 50.0, 300.0}) {
    CHECK(std::abs(predict_amplitude(d, A0, t)) == doctest::Approx(std::exp(-d.Gamma * t)).epsilon(1e-14));
    CHECK(std::abs(predict_amplitude(d, A0, -t)) == doctest::Approx(std::abs(predict_amplitude(d, A0, t))).epsilon(1e-14));
  }
  // Over whole periods the phase advances by (2 beta + Lambda - Mbar) t.
  const double L = d.period;
  const cplx ratio = predict_amplitude(d, A0, 10.0 * L) / predict_amplitude(d, A0, 9.0 * L);
  CHECK(std::arg(ratio * std::polar(1.0, -(2.0 * d.beta + d.Lambda - d.Mbar) * L)) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("refinement gate") {
  CouplingOptions o;
  o.threads = 1;
  const ConvergenceReport r = convergence_gate(PerturbationSpec::detuning(kQuarter, 0.04), Parity::Odd, o);
  CHECK(r.passed);
  CHECK(r.gamma_change < 5e-3);
  CHECK(r.lambda_change < 5e-3);
}

TEST_CASE("truncated spatial integration is detected") {
  CouplingOptions o = fast();
  o.x_extent = 4.0;
  CHECK_THROWS_AS(compute_coupling(PerturbationSpec::detuning(kQuarter, 0.04), Parity::Odd, o), QuadratureDivergence);
}
