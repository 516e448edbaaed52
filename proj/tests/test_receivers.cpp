#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "generators.hpp"

#include "cohdisc/receivers.hpp"

using namespace cohdisc;

namespace {

// Direct summation of the photon-count distribution, independent of poisson_window.
struct CountSums {
  double zero = 0.0;
  double window = 0.0;
  double above = 0.0;
};

CountSums brute_force_counts(double mean, unsigned m) {
  CountSums s;
  double term = std::exp(-mean);
  for (unsigned n = 0; n < 400; ++n) {
    if (n == 0) s.zero += term;
    else if (n <= m) s.window += term;
    else s.above += term;
    term *= mean / (n + 1);
  }
  return s;
}

double brute_force_pnr_error(double alpha, double beta, unsigned m, double* p_inc) {
  const auto minus = brute_force_counts((beta - alpha) * (beta - alpha), m);
  const auto plus = brute_force_counts((beta + alpha) * (beta + alpha), m);
  *p_inc = 0.5 * (minus.window + plus.window);
  return 0.5 * (minus.above + plus.zero) / (1.0 - *p_inc);
}

}  // namespace

TEST_CASE("worked PNR point") {
  const auto e = SignalEnsemble::from_mean_photons(0.24);
  const auto r = pnr_receiver(e, PnrReceiverConfig::ideal(1.0, 1));
  CHECK(r.p_inc == doctest::Approx(0.220864553688114).epsilon(1e-12));
  CHECK(r.p_err == doctest::Approx(0.088012431048738619).epsilon(1e-12));
}

TEST_CASE("Kennedy receiver closed form") {
  for (double a2 : {0.05, 0.24, 0.47, 1.0, 3.0}) {
    const auto e = SignalEnsemble::from_mean_photons(a2);
    const auto r = pnr_receiver(e, PnrReceiverConfig::ideal(e.alpha, 0));
    CHECK(r.p_inc == 0.0);
    CHECK(r.p_err == doctest::Approx(0.5 * std::exp(-4.0 * a2)).epsilon(1e-13));
  }
}

TEST_CASE("homodyne MESD closed form") {
  for (double a2 : {0.1, 0.47, 1.0}) {
    const auto e = SignalEnsemble::from_mean_photons(a2);
    const auto r = homodyne_receiver(e, HomodyneReceiverConfig::ideal(0.0));
    CHECK(r.p_inc == 0.0);
    CHECK(r.p_err == doctest::Approx(0.5 * std::erfc(std::sqrt(2.0 * a2))).epsilon(1e-14));
  }
  CHECK(homodyne_receiver(SignalEnsemble::from_mean_photons(0.47), HomodyneReceiverConfig::ideal()).p_err ==
        doctest::Approx(0.085167073868782546).epsilon(1e-13));
}

TEST_CASE("PNR agrees with brute-force summation") {
  testgen::Stream gen(3);
  for (int i = 0; i < 300; ++i) {
    const double a2 = gen.uniform(0.01, 2.0);
    const double beta = gen.uniform(0.0, 4.0);
    const unsigned m = gen.integer(0, 6);
    const auto e = SignalEnsemble::from_mean_photons(a2);
    const auto r = pnr_receiver(e, PnrReceiverConfig::ideal(beta, m));
    double p_inc = 0.0;
    const double p_err = brute_force_pnr_error(e.alpha, beta, m, &p_inc);
    CAPTURE(a2);
    CAPTURE(beta);
    CAPTURE(m);
    CHECK(std::abs(r.p_inc - p_inc) <= 1e-10);
    CHECK(std::abs(r.p_err - p_err) <= 1e-10);
  }
}

TEST_CASE("completeness for both receivers") {
  testgen::Stream gen(5);
  for (int i = 0; i < 100; ++i) {
    const auto e = SignalEnsemble::from_mean_photons(gen.uniform(0.0, 3.0));
    PnrReceiverConfig pnr;
    pnr.displacement = gen.uniform(0.0, 4.0);
    pnr.threshold = gen.integer(0, 8);
    pnr.efficiency = gen.uniform(0.3, 1.0);
    pnr.mode_match = gen.uniform(0.9, 1.0);
    pnr.dark_count_mean = gen.uniform(0.0, 0.05);
    const auto [mm, mp] = pnr_mean_counts(e, pnr);
    const PnrPovm povm(pnr.threshold);
    for (double mean : {mm, mp}) {
      const auto o = povm.outcome(mean);
      CHECK(std::abs(o.guess_minus + o.guess_plus + o.inconclusive - 1.0) <= 1e-12);
    }
    const auto r = pnr_receiver(e, pnr);
    CHECK(std::abs(r.p_inc + r.p_conclusive - 1.0) <= 1e-12);

    HomodyneReceiverConfig hd{gen.uniform(0.0, 3.0), gen.uniform(0.5, 1.0), gen.uniform(0.0, 0.1)};
    const auto h = homodyne_receiver(e, hd);
    CHECK(std::abs(h.p_inc + h.p_conclusive - 1.0) <= 1e-12);
    CHECK(h.p_inc_given_minus == doctest::Approx(h.p_inc_given_plus));
  }
}

TEST_CASE("PNR monotonicity in the threshold") {
  // Conditional error falls with m only once the displacement is large enough
  // that the counts moved into the window are mostly errors.
  for (int i = 1; i <= 20; ++i) {
    const auto e = SignalEnsemble::from_mean_photons(0.05 * i);
    for (double beta : {1.35, 1.6, 2.0, 3.0}) {
      double prev_inc = -1.0;
      double prev_err = 2.0;
      for (unsigned m = 0; m <= 3; ++m) {
        const auto r = pnr_receiver(e, PnrReceiverConfig::ideal(beta, m));
        CHECK(r.p_inc >= prev_inc);
        CHECK(r.p_err <= prev_err + 1e-15);
        prev_inc = r.p_inc;
        prev_err = r.p_err;
      }
    }
  }
}

TEST_CASE("small displacement breaks error monotonicity in the threshold") {
  const auto e = SignalEnsemble::from_mean_photons(0.24);
  for (double beta : {0.3, 0.8, 1.0}) {
    double inc = -1.0;
    bool rises = false;
    double prev_err = 2.0;
    for (unsigned m = 0; m <= 3; ++m) {
      const auto r = pnr_receiver(e, PnrReceiverConfig::ideal(beta, m));
      CHECK(r.p_inc >= inc);
      inc = r.p_inc;
      rises = rises || r.p_err > prev_err;
      prev_err = r.p_err;
    }
    CHECK(rises);
  }
}

TEST_CASE("homodyne monotonicity in the threshold") {
  for (double a2 : {0.05, 0.24, 0.47, 1.0}) {
    const auto e = SignalEnsemble::from_mean_photons(a2);
    double prev_inc = -1.0;
    double prev_err = 2.0;
    for (int i = 0; i <= 30; ++i) {
      const auto r = homodyne_receiver(e, HomodyneReceiverConfig::ideal(0.1 * i));
      CHECK(r.p_inc > prev_inc);
      CHECK(r.p_err < prev_err);
      prev_inc = r.p_inc;
      prev_err = r.p_err;
    }
  }
}

TEST_CASE("prior swap symmetry of the homodyne receiver") {
  testgen::Stream gen(8);
  for (int i = 0; i < 50; ++i) {
    const double alpha = gen.uniform(0.0, 1.5);
    const double p1 = gen.uniform(0.0, 1.0);
    const HomodyneReceiverConfig cfg{gen.uniform(0.0, 2.0), 1.0, 0.0};
    const auto a = homodyne_receiver(SignalEnsemble::with_priors(alpha, p1, 1.0 - p1), cfg);
    const auto b = homodyne_receiver(SignalEnsemble::with_priors(alpha, 1.0 - p1, p1), cfg);
    CHECK(a.p_err == doctest::Approx(b.p_err).epsilon(1e-12));
    CHECK(a.p_inc == doctest::Approx(b.p_inc).epsilon(1e-12));
  }
}

TEST_CASE("threshold mapping round trip") {
  testgen::Stream gen(9);
  for (int i = 0; i < 100; ++i) {
    const double alpha = gen.uniform(0.05, 2.0);
    const double lambda = std::exp(gen.uniform(0.0, 6.0));
    const double b = likelihood_to_quadrature_threshold(lambda, alpha);
    CHECK(quadrature_to_likelihood_threshold(b, alpha) == doctest::Approx(lambda).epsilon(1e-12));
  }
  CHECK(likelihood_to_quadrature_threshold(1.0, 0.7) == 0.0);
  CHECK_THROWS_AS(likelihood_to_quadrature_threshold(2.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(likelihood_to_quadrature_threshold(0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(quadrature_to_likelihood_threshold(-0.1, 1.0), std::domain_error);
}

TEST_CASE("decision rules") {
  CHECK(homodyne_decision(0.5, 0.3) == Decision::plus);
  CHECK(homodyne_decision(-0.5, 0.3) == Decision::minus);
  CHECK(homodyne_decision(0.1, 0.3) == Decision::inconclusive);
  CHECK(homodyne_decision(0.0, 0.0) == Decision::plus);
  const PnrPovm povm(2);
  CHECK(povm.decide(0) == Decision::minus);
  CHECK(povm.decide(1) == Decision::inconclusive);
  CHECK(povm.decide(2) == Decision::inconclusive);
  CHECK(povm.decide(3) == Decision::plus);
  CHECK(PnrPovm(0).decide(1) == Decision::plus);
}

TEST_CASE("imperfections worsen the PNR receiver") {
  const auto e = SignalEnsemble::from_mean_photons(0.47);
  auto cfg = PnrReceiverConfig::ideal(1.0, 1);
  const double ideal = pnr_receiver(e, cfg).p_err;
  cfg.dark_count_mean = 0.01;
  CHECK(pnr_receiver(e, cfg).p_err > ideal);

  auto kennedy = PnrReceiverConfig::ideal(e.alpha, 0);
  const double floor = pnr_receiver(e, kennedy).p_err;
  kennedy.mode_match = 0.99;
  CHECK(pnr_receiver(e, kennedy).p_err > floor);
}

TEST_CASE("electronic noise and efficiency") {
  CHECK(electronic_noise_variance_from_db(23.0) == doctest::Approx(0.5 * std::pow(10.0, -2.3)));
  const auto e = SignalEnsemble::from_mean_photons(0.47);
  const double ideal = homodyne_receiver(e, HomodyneReceiverConfig::ideal()).p_err;
  const double lossy = homodyne_receiver(e, {0.0, 0.858, electronic_noise_variance_from_db(23.0)}).p_err;
  CHECK(lossy > ideal);
  // Efficiency alone is equivalent to a smaller amplitude.
  const auto shrunk = SignalEnsemble::equal_priors(std::sqrt(0.858) * e.alpha);
  CHECK(homodyne_receiver(e, {0.4, 0.858, 0.0}).p_err ==
        doctest::Approx(homodyne_receiver(shrunk, HomodyneReceiverConfig::ideal(0.4)).p_err).epsilon(1e-13));
}

TEST_CASE("vacuum signal") {
  const auto e = SignalEnsemble::equal_priors(0.0);
  CHECK(homodyne_receiver(e, HomodyneReceiverConfig::ideal()).p_err == doctest::Approx(0.5));
  const auto r = pnr_receiver(e, PnrReceiverConfig::ideal(0.0, 0));
  CHECK(r.p_err == doctest::Approx(0.5));
  // Undisplaced vacuum never clicks: everything is guessed minus.
  CHECK(r.p_err_given_plus == 1.0);
}

TEST_CASE("configuration validation") {
  const auto e = SignalEnsemble::from_mean_photons(0.3);
  CHECK_THROWS_AS(homodyne_receiver(e, {-0.1, 1.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(homodyne_receiver(e, {0.1, 0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(homodyne_receiver(e, {0.1, 1.0, -1.0}), std::domain_error);
  auto cfg = PnrReceiverConfig::ideal(1.0, 1);
  cfg.threshold = cfg.count_cap;
  CHECK_THROWS_AS(pnr_receiver(e, cfg), std::domain_error);
  CHECK_THROWS_AS(pnr_receiver(e, PnrReceiverConfig::ideal(-1.0, 1)), std::domain_error);
  cfg = PnrReceiverConfig::ideal(1.0, 1);
  cfg.mode_match = 1.5;
  CHECK_THROWS_AS(pnr_receiver(e, cfg), std::domain_error);
}
