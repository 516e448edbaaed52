#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "doctest.h"
#include "generators.hpp"

#include "cohdisc/signal.hpp"

using namespace cohdisc;

TEST_CASE("ensemble construction and validation") {
  const auto e = SignalEnsemble::from_mean_photons(0.24);
  CHECK(e.alpha == doctest::Approx(std::sqrt(0.24)).epsilon(1e-15));
  CHECK(e.prior_minus == 0.5);
  CHECK(e.mean_photons() == doctest::Approx(0.24));

  CHECK_NOTHROW(SignalEnsemble::equal_priors(0.0));
  CHECK_THROWS_AS(SignalEnsemble::equal_priors(-0.1), std::domain_error);
  CHECK_THROWS_AS(SignalEnsemble::equal_priors(NAN), std::domain_error);
  CHECK_THROWS_AS(SignalEnsemble::with_priors(1.0, 0.3, 0.6), std::domain_error);
  CHECK_THROWS_AS(SignalEnsemble::with_priors(1.0, -0.1, 1.1), std::domain_error);
  CHECK_THROWS_AS(SignalEnsemble::from_mean_photons(-1.0), std::domain_error);
  CHECK_NOTHROW(SignalEnsemble::with_priors(1.0, 0.3, 0.7 + 5e-13));
}

TEST_CASE("coherent overlap") {
  CHECK(coherent_overlap(0.0) == 1.0);
  CHECK(coherent_overlap(std::sqrt(0.47)) == doctest::Approx(std::exp(-0.94)).epsilon(1e-14));
  CHECK(coherent_overlap(std::sqrt(0.24)) == doctest::Approx(0.6187833918061408).epsilon(1e-14));
  double prev = 1.0;
  for (int i = 1; i <= 50; ++i) {
    const double o = coherent_overlap(0.05 * i);
    CHECK(o < prev);
    prev = o;
  }
  CHECK_THROWS_AS(coherent_overlap(-1.0), std::domain_error);
}

TEST_CASE("displaced mean photon numbers") {
  CHECK(displaced_mean_photon(0.5, 1.0, Hypothesis::minus) == doctest::Approx(0.25));
  CHECK(displaced_mean_photon(0.5, 1.0, Hypothesis::plus) == doctest::Approx(2.25));
  CHECK(displaced_mean_photon(0.7, 0.7, Hypothesis::minus) == 0.0);
  CHECK_THROWS_AS(displaced_mean_photon(0.5, -1.0, Hypothesis::plus), std::domain_error);
}

TEST_CASE("poisson window against high-precision sums") {
  struct Case {
    double mean;
    std::uint64_t lo, hi;
    double expected;
  };
  const std::array<Case, 7> cases{{
      {0.2602041028867288, 1, 1, 0.20058984101943711934},
      {2.2197958971132707, 2, kUnbounded, 0.65022945512324236881},
      {80.0, 60, 100, 0.97823360786603480767},
      {80.0, 0, 40, 5.7490501653059992762e-7},
      {200.0, 250, kUnbounded, 0.00036207045828969313228},
      {0.001, 3, kUnbounded, 1.6654171665278076385e-10},
      {30.0, 31, kUnbounded, 0.45164848742208857385},
  }};
  for (const auto& c : cases) {
    CAPTURE(c.mean);
    CAPTURE(c.lo);
    CHECK(poisson_window(c.mean, c.lo, c.hi) == doctest::Approx(c.expected).epsilon(1e-10));
  }
}

TEST_CASE("poisson window normalization") {
  for (double mean : {0.0, 0.1, 1.0, 5.0, 20.0, 75.0, 400.0}) {
    CAPTURE(mean);
    CHECK(std::abs(poisson_window(mean, 0, kUnbounded) - 1.0) <= 1e-12);
    // Head plus tail also normalizes.
    for (std::uint64_t split : {1u, 3u, 10u, 40u}) {
      const double total = poisson_window(mean, 0, split - 1) + poisson_window(mean, split, kUnbounded);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("poisson window edge cases") {
  CHECK(poisson_window(0.0, 0, 0) == 1.0);
  CHECK(poisson_window(0.0, 1, kUnbounded) == 0.0);
  CHECK(poisson_pmf(0.0, 0) == 1.0);
  CHECK(poisson_pmf(0.0, 3) == 0.0);
  CHECK(poisson_pmf(2.0, 2) == doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK_THROWS_AS(poisson_window(1.0, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(poisson_window(-1.0, 0, 1), std::domain_error);
  CHECK_THROWS_AS(poisson_pmf(INFINITY, 1), std::domain_error);
}

TEST_CASE("poisson window matches pmf sums on random inputs") {
  testgen::Stream gen(11);
  for (int i = 0; i < 200; ++i) {
    const double mean = gen.uniform(0.0, 40.0);
    const std::uint32_t lo = gen.integer(0, 30);
    const std::uint32_t hi = lo + gen.integer(0, 30);
    double direct = 0.0;
    for (std::uint32_t n = lo; n <= hi; ++n) direct += poisson_pmf(mean, n);
    CAPTURE(mean);
    CHECK(poisson_window(mean, lo, hi) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("standard erfc against high-precision values") {
  // The receivers rely on std::erfc; pin its accuracy including the deep tail.
  const std::array<std::pair<double, double>, 20> table{{
      {-3.0, 1.9999779095030014146},
      {-1.5, 1.9661051464753107271},
      {-0.5, 1.5204998778130465377},
      {-0.1, 1.1124629160182848922},
      {0.0, 1.0},
      {0.05, 0.94362802220298337617},
      {0.1, 0.8875370839817151078},
      {0.25, 0.72367360983176306701},
      {0.5, 0.47950012218695346232},
      {0.75, 0.2888443663464848684},
      {1.0, 0.15729920705028513066},
      {1.5, 0.033894853524689272933},
      {2.0, 0.0046777349810472658379},
      {2.5, 0.00040695201744495893956},
      {3.0, 0.000022090496998585441373},
      {4.0, 1.5417257900280018852e-8},
      {5.0, 1.5374597944280348502e-12},
      {7.0, 4.1838256077794143986e-23},
      {10.0, 2.088487583762544757e-45},
      {20.0, 5.3958656116079009289e-176},
  }};
  for (const auto& [x, expected] : table) {
    CAPTURE(x);
    CHECK(std::erfc(x) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("quadrature pdf") {
  for (double alpha : {0.0, 0.3, 1.0, 2.0}) {
    for (auto h : {Hypothesis::minus, Hypothesis::plus}) {
      const int n = 20000;
      const double dx = 20.0 / n;
      double integral = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        integral += w * quadrature_pdf(-10.0 + i * dx, alpha, h);
      }
      CHECK(std::abs(integral * dx - 1.0) < 1e-6);
    }
    // Mirror symmetry between the hypotheses.
    CHECK(quadrature_pdf(0.4, alpha, Hypothesis::plus) == doctest::Approx(quadrature_pdf(-0.4, alpha, Hypothesis::minus)));
  }
  CHECK(quadrature_pdf(std::sqrt(2.0), 1.0, Hypothesis::plus) == doctest::Approx(1.0 / std::sqrt(M_PI)));
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.5 * std::exp(-4.0)) == doctest::Approx(0.0751568411277659).epsilon(1e-12));
  CHECK_THROWS_AS(binary_entropy(-1e-9), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.5), std::domain_error);
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double p = i / 40.0;
      const double q = j / 40.0;
      CHECK(binary_entropy(0.5 * (p + q)) >= 0.5 * (binary_entropy(p) + binary_entropy(q)) - 1e-15);
    }
  }
}

TEST_CASE("result assembly") {
  const auto e = SignalEnsemble::with_priors(1.0, 0.25, 0.75);
  const OutcomeProbabilities given_minus{0.7, 0.1, 0.2};
  const OutcomeProbabilities given_plus{0.05, 0.6, 0.35};
  const auto r = assemble_result(e, given_minus, given_plus);
  CHECK(r.p_inc == doctest::Approx(0.25 * 0.2 + 0.75 * 0.35));
  CHECK(r.p_conclusive == doctest::Approx(1.0 - r.p_inc));
  CHECK(r.p_err == doctest::Approx((0.25 * 0.1 + 0.75 * 0.05) / r.p_conclusive));
  CHECK(r.joint_error() == doctest::Approx(0.25 * 0.1 + 0.75 * 0.05));
  CHECK(r.p_err_given_minus == 0.1);
  CHECK(r.p_err_given_plus == 0.05);
  CHECK(r.error_defined);

  const auto none = assemble_result(e, {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0});
  CHECK_FALSE(none.error_defined);
  CHECK(std::isnan(none.p_err));
  CHECK(none.p_inc == 1.0);
  CHECK(none.joint_error() == 0.0);
}

TEST_CASE("names") {
  CHECK(to_string(Hypothesis::minus) == "minus");
  CHECK(to_string(Hypothesis::plus) == "plus");
  CHECK(to_string(Decision::inconclusive) == "inconclusive");
}
