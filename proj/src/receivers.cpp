#include "cohdisc/receivers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cohdisc {

namespace {

constexpr double kVacuumVariance = 0.5;

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

double ln_ratio_scale(double alpha) { return 4.0 * std::numbers::sqrt2 * alpha; }

}  // namespace

double electronic_noise_variance_from_db(double db_below_shot_noise) {
  return std::pow(10.0, -db_below_shot_noise / 10.0) * kVacuumVariance;
}

void HomodyneReceiverConfig::validate() const {
  require(std::isfinite(threshold) && threshold >= 0.0, "homodyne threshold must be finite and >= 0");
  require(efficiency > 0.0 && efficiency <= 1.0, "homodyne efficiency must lie in (0,1]");
  require(std::isfinite(electronic_noise_variance) && electronic_noise_variance >= 0.0,
          "electronic noise variance must be >= 0");
}

Decision homodyne_decision(double x, double threshold) noexcept {
  if (x >= threshold) return Decision::plus;
  if (x <= -threshold) return Decision::minus;
  return Decision::inconclusive;
}

double likelihood_to_quadrature_threshold(double likelihood_threshold, double alpha) {
  require(likelihood_threshold >= 1.0, "likelihood threshold must be >= 1");
  require(alpha > 0.0, "likelihood threshold is undefined for alpha == 0");
  return std::log(likelihood_threshold) / ln_ratio_scale(alpha);
}

double quadrature_to_likelihood_threshold(double threshold, double alpha) {
  require(threshold >= 0.0, "quadrature threshold must be >= 0");
  require(alpha > 0.0, "likelihood threshold is undefined for alpha == 0");
  return std::exp(threshold * ln_ratio_scale(alpha));
}

DiscriminationResult homodyne_receiver(const SignalEnsemble& ensemble, const HomodyneReceiverConfig& cfg) {
  ensemble.validate();
  cfg.validate();

  const double mean = std::sqrt(2.0 * cfg.efficiency) * ensemble.alpha;
  const double scale = std::sqrt(2.0 * (kVacuumVariance + cfg.electronic_noise_variance));
  const double near = (cfg.threshold - mean) / scale;
  const double far = (cfg.threshold + mean) / scale;

  // Given |-alpha>; the |+alpha> table is its mirror image.
  OutcomeProbabilities given_minus;
  given_minus.guess_minus = 0.5 * std::erfc(near);
  given_minus.guess_plus = 0.5 * std::erfc(far);
  given_minus.inconclusive = 0.5 * (std::erf(near) + std::erf(far));

  const OutcomeProbabilities given_plus{given_minus.guess_plus, given_minus.guess_minus,
                                        given_minus.inconclusive};
  return assemble_result(ensemble, given_minus, given_plus);
}

OutcomeProbabilities PnrPovm::outcome(double mean_counts) const {
  OutcomeProbabilities p;
  p.guess_minus = poisson_window(mean_counts, 0, 0);
  p.inconclusive = threshold_ == 0 ? 0.0 : poisson_window(mean_counts, 1, threshold_);
  p.guess_plus = poisson_window(mean_counts, std::uint64_t{threshold_} + 1, kUnbounded);
  return p;
}

void PnrReceiverConfig::validate() const {
  require(std::isfinite(displacement) && displacement >= 0.0, "displacement must be finite and >= 0");
  require(efficiency >= 0.0 && efficiency <= 1.0, "PNR efficiency must lie in [0,1]");
  require(std::isfinite(dark_count_mean) && dark_count_mean >= 0.0, "dark count mean must be >= 0");
  require(mode_match >= 0.0 && mode_match <= 1.0, "mode match must lie in [0,1]");
  require(threshold < count_cap, "PNR threshold must be below the count cap");
}

std::pair<double, double> pnr_mean_counts(const SignalEnsemble& ensemble, const PnrReceiverConfig& cfg) {
  const double alpha = ensemble.alpha;
  const double beta = cfg.displacement;
  const double incoherent = (1.0 - cfg.mode_match) * (beta * beta + alpha * alpha);
  auto detected = [&](Hypothesis h) {
    const double coherent = cfg.mode_match * displaced_mean_photon(alpha, beta, h);
    return cfg.efficiency * (coherent + incoherent) + cfg.dark_count_mean;
  };
  return {detected(Hypothesis::minus), detected(Hypothesis::plus)};
}

DiscriminationResult pnr_receiver(const SignalEnsemble& ensemble, const PnrReceiverConfig& cfg) {
  ensemble.validate();
  cfg.validate();
  const auto [mean_minus, mean_plus] = pnr_mean_counts(ensemble, cfg);
  const PnrPovm povm(cfg.threshold);
  return assemble_result(ensemble, povm.outcome(mean_minus), povm.outcome(mean_plus));
}

}  // namespace cohdisc
