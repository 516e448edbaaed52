// Binary coherent-state alphabet {|-alpha>, |+alpha>} and the elementary
// state-space math shared by the receivers, bounds and emulator.
//
// Conventions used throughout the library:
//   * alpha and beta are real and non-negative; the pi phase between the two
//     signals is carried by the hypothesis sign.
//   * quadrature x = (a + a^dag)/sqrt(2): vacuum variance 1/2, coherent mean
//     sqrt(2)*alpha.
//   * the displacement D(beta) maps |+-alpha> to |beta +- alpha>, so the
//     "minus" state is the one nulled when beta == alpha.
#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace cohdisc {

enum class Hypothesis : std::uint8_t { minus, plus };

/// Receiver verdict for one pulse.
enum class Decision : std::uint8_t { minus, plus, inconclusive };

std::string_view to_string(Hypothesis h) noexcept;
std::string_view to_string(Decision d) noexcept;

/// Open upper end of a photon-count window.
inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

/// Tolerance on p_minus + p_plus == 1.
inline constexpr double kPriorTolerance = 1e-12;

struct SignalEnsemble {
  double alpha = 0.0;
  double prior_minus = 0.5;
  double prior_plus = 0.5;

  /// Equal-prior alphabet with amplitude alpha.
  static SignalEnsemble equal_priors(double alpha);
  /// Equal-prior alphabet given the mean photon number |alpha|^2.
  static SignalEnsemble from_mean_photons(double alpha_sq, double prior_minus = 0.5);
  static SignalEnsemble with_priors(double alpha, double prior_minus, double prior_plus);

  double prior(Hypothesis h) const noexcept { return h == Hypothesis::minus ? prior_minus : prior_plus; }
  double mean_photons() const noexcept { return alpha * alpha; }

  /// Throws std::domain_error if an invariant is broken.
  void validate() const;
};

/// Probabilities of the three verdicts for one prepared state.
struct OutcomeProbabilities {
  double guess_minus = 0.0;
  double guess_plus = 0.0;
  double inconclusive = 0.0;

  double conclusive() const noexcept { return guess_minus + guess_plus; }
};

/// Error / inconclusive statistics of a three-outcome receiver.
///
/// p_err is conditioned on a conclusive verdict; the per-hypothesis error
/// entries are not: p_err * (1 - p_inc) = p1 * p_err_given_minus + p2 * p_err_given_plus.
/// p_conclusive is carried separately so that 1 - p_inc stays accurate when
/// almost every pulse is discarded.
struct DiscriminationResult {
  double p_err = 0.0;
  double p_inc = 0.0;
  double p_conclusive = 1.0;
  double p_err_given_minus = 0.0;
  double p_err_given_plus = 0.0;
  double p_inc_given_minus = 0.0;
  double p_inc_given_plus = 0.0;
  /// False when nothing is ever conclusive; p_err is NaN in that case.
  bool error_defined = true;

  double acceptance() const noexcept { return p_conclusive; }
  /// Unconditional probability of a wrong conclusive verdict.
  double joint_error() const noexcept;
};

/// Assembles the averaged statistics from the per-hypothesis verdict tables.
DiscriminationResult assemble_result(const SignalEnsemble& ensemble,
                                     const OutcomeProbabilities& given_minus,
                                     const OutcomeProbabilities& given_plus);

/// |<-alpha|+alpha>| = exp(-2 alpha^2).
double coherent_overlap(double alpha);

/// Mean photon number after D(beta): (beta - alpha)^2 for minus, (beta + alpha)^2 for plus.
double displaced_mean_photon(double alpha, double beta, Hypothesis h);

/// Sum of Poisson(mean) probabilities over n_lo..n_hi (n_hi may be kUnbounded).
double poisson_window(double mean, std::uint64_t n_lo, std::uint64_t n_hi);

/// Single Poisson probability P(n | mean).
double poisson_pmf(double mean, std::uint64_t n);

/// x-quadrature density of |+-alpha> for an ideal homodyne detector.
double quadrature_pdf(double x, double alpha, Hypothesis h);

/// Shannon entropy of a binary source, in bits.
double binary_entropy(double p);

}  // namespace cohdisc
