// The two receivers being compared: a postselected homodyne detector and a
// displacement-controlled photon-number-resolving (PNR) detector.
#pragma once

#include <cstdint>
#include <utility>

#include "cohdisc/signal.hpp"

namespace cohdisc {

/// Electronic noise quoted as "N dB below shot noise", as a quadrature variance.
double electronic_noise_variance_from_db(double db_below_shot_noise);

struct HomodyneReceiverConfig {
  /// Postselection threshold B on the x quadrature; |x| < B is inconclusive.
  double threshold = 0.0;
  double efficiency = 1.0;
  /// Added to the vacuum variance 1/2.
  double electronic_noise_variance = 0.0;

  static HomodyneReceiverConfig ideal(double threshold = 0.0) { return {threshold, 1.0, 0.0}; }
  void validate() const;
};

/// Verdict of the homodyne receiver for a single quadrature sample.
Decision homodyne_decision(double x, double threshold) noexcept;

/// Likelihood threshold Lambda_B (>= 1) to quadrature threshold B for ideal
/// detection: B = ln(Lambda_B) / (4 sqrt(2) alpha).
double likelihood_to_quadrature_threshold(double likelihood_threshold, double alpha);
double quadrature_to_likelihood_threshold(double threshold, double alpha);

DiscriminationResult homodyne_receiver(const SignalEnsemble& ensemble, const HomodyneReceiverConfig& cfg);

/// Three-window photon-count POVM: {0} -> minus, {1..m} -> inconclusive,
/// {m+1, ...} -> plus.
class PnrPovm {
 public:
  explicit PnrPovm(std::uint32_t threshold) : threshold_(threshold) {}

  std::uint32_t threshold() const noexcept { return threshold_; }
  Decision decide(std::uint64_t count) const noexcept {
    if (count == 0) return Decision::minus;
    return count <= threshold_ ? Decision::inconclusive : Decision::plus;
  }
  /// Verdict probabilities for Poissonian counts of the given mean.
  OutcomeProbabilities outcome(double mean_counts) const;

 private:
  std::uint32_t threshold_;
};

struct PnrReceiverConfig {
  double displacement = 0.0;
  std::uint32_t threshold = 0;
  double efficiency = 1.0;
  double dark_count_mean = 0.0;
  /// Fraction of the signal amplitude that interferes with the displacement beam.
  double mode_match = 1.0;
  /// Largest reported count; larger counts are pooled into the "plus" window.
  std::uint32_t count_cap = 32;

  static PnrReceiverConfig ideal(double displacement, std::uint32_t threshold) {
    PnrReceiverConfig cfg;
    cfg.displacement = displacement;
    cfg.threshold = threshold;
    return cfg;
  }
  void validate() const;
};

/// Mean detected counts (minus, plus) including inefficiency, mode mismatch and dark counts.
std::pair<double, double> pnr_mean_counts(const SignalEnsemble& ensemble, const PnrReceiverConfig& cfg);

DiscriminationResult pnr_receiver(const SignalEnsemble& ensemble, const PnrReceiverConfig& cfg);

}  // namespace cohdisc
