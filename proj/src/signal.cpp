#include "cohdisc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cohdisc {

namespace {

// Above this mean the recurrence is seeded in log space; exp(-50) is still
// comfortably representable so smaller means use the plain recurrence.
constexpr double kLogSpaceMean = 50.0;
constexpr double kNegligibleTerm = 1e-18;

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

double log_pmf(double mean, std::uint64_t n) {
  const auto nd = static_cast<double>(n);
  return nd * std::log(mean) - mean - std::lgamma(nd + 1.0);
}

// First term of the window, without underflowing for large means.
double seed_term(double mean, std::uint64_t n) {
  if (mean > kLogSpaceMean || n > 170) return std::exp(log_pmf(mean, n));
  double term = std::exp(-mean);
  for (std::uint64_t k = 1; k <= n; ++k) term *= mean / static_cast<double>(k);
  return term;
}

double finite_window(double mean, std::uint64_t n_lo, std::uint64_t n_hi) {
  double term = seed_term(mean, n_lo);
  double sum = 0.0;
  for (std::uint64_t n = n_lo;; ++n) {
    sum += term;
    if (n == n_hi) break;
    term *= mean / static_cast<double>(n + 1);
    const bool past_mode = static_cast<double>(n + 1) > mean;
    if (past_mode && (term == 0.0 || term < kNegligibleTerm * sum)) break;
  }
  return sum;
}

}  // namespace

std::string_view to_string(Hypothesis h) noexcept {
  return h == Hypothesis::minus ? "minus" : "plus";
}

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::minus: return "minus";
    case Decision::plus: return "plus";
    case Decision::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SignalEnsemble SignalEnsemble::equal_priors(double alpha) {
  return with_priors(alpha, 0.5, 0.5);
}

SignalEnsemble SignalEnsemble::from_mean_photons(double alpha_sq, double prior_minus) {
  require(alpha_sq >= 0.0 && std::isfinite(alpha_sq), "mean photon number must be finite and >= 0");
  return with_priors(std::sqrt(alpha_sq), prior_minus, 1.0 - prior_minus);
}

SignalEnsemble SignalEnsemble::with_priors(double alpha, double prior_minus, double prior_plus) {
  SignalEnsemble e{alpha, prior_minus, prior_plus};
  e.validate();
  return e;
}

void SignalEnsemble::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
  require(prior_minus >= 0.0 && prior_minus <= 1.0, "prior_minus outside [0,1]");
  require(prior_plus >= 0.0 && prior_plus <= 1.0, "prior_plus outside [0,1]");
  require(std::abs(prior_minus + prior_plus - 1.0) <= kPriorTolerance, "priors must sum to 1");
}

double DiscriminationResult::joint_error() const noexcept {
  return error_defined ? p_err * p_conclusive : 0.0;
}

DiscriminationResult assemble_result(const SignalEnsemble& ensemble,
                                     const OutcomeProbabilities& given_minus,
                                     const OutcomeProbabilities& given_plus) {
  const double p1 = ensemble.prior_minus;
  const double p2 = ensemble.prior_plus;

  DiscriminationResult r;
  r.p_err_given_minus = given_minus.guess_plus;
  r.p_err_given_plus = given_plus.guess_minus;
  r.p_inc_given_minus = given_minus.inconclusive;
  r.p_inc_given_plus = given_plus.inconclusive;
  r.p_inc = std::clamp(p1 * given_minus.inconclusive + p2 * given_plus.inconclusive, 0.0, 1.0);
  r.p_conclusive = std::clamp(p1 * given_minus.conclusive() + p2 * given_plus.conclusive(), 0.0, 1.0);

  const double joint = p1 * r.p_err_given_minus + p2 * r.p_err_given_plus;
  if (r.p_conclusive > 0.0) {
    r.p_err = std::clamp(joint / r.p_conclusive, 0.0, 1.0);
  } else {
    r.p_err = std::numeric_limits<double>::quiet_NaN();
    r.error_defined = false;
  }
  return r;
}

double coherent_overlap(double alpha) {
  require(alpha >= 0.0, "coherent_overlap: alpha must be >= 0");
  return std::exp(-2.0 * alpha * alpha);
}

double displaced_mean_photon(double alpha, double beta, Hypothesis h) {
  require(alpha >= 0.0, "displaced_mean_photon: alpha must be >= 0");
  require(beta >= 0.0, "displaced_mean_photon: beta must be >= 0");
  const double amplitude = h == Hypothesis::minus ? beta - alpha : beta + alpha;
  return amplitude * amplitude;
}

double poisson_pmf(double mean, std::uint64_t n) {
  require(mean >= 0.0 && std::isfinite(mean), "poisson_pmf: mean must be finite and >= 0");
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(log_pmf(mean, n));
}

double poisson_window(double mean, std::uint64_t n_lo, std::uint64_t n_hi) {
  require(mean >= 0.0 && std::isfinite(mean), "poisson_window: mean must be finite and >= 0");
  if (n_lo > n_hi) throw std::invalid_argument("poisson_window: n_lo > n_hi");
  if (mean == 0.0) return n_lo == 0 ? 1.0 : 0.0;

  if (n_hi != kUnbounded) return std::min(1.0, finite_window(mean, n_lo, n_hi));
  if (n_lo == 0) return 1.0;

  // Upper tail: complement of the head, unless the tail itself is small
  // enough that the subtraction would cancel; then sum it directly.
  const double head = finite_window(mean, 0, n_lo - 1);
  if (head < 0.5) return std::max(0.0, 1.0 - head);
  return std::min(1.0, finite_window(mean, n_lo, kUnbounded - 1));
}

double quadrature_pdf(double x, double alpha, Hypothesis h) {
  const double mu = (h == Hypothesis::minus ? -1.0 : 1.0) * std::numbers::sqrt2 * alpha;
  const double d = x - mu;
  return std::exp(-d * d) * std::numbers::inv_sqrtpi;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy: p outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace cohdisc
