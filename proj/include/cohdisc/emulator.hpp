// Monte Carlo emulation of the two-receiver experiment: every pulse is
// measured by the homodyne and the PNR receiver simultaneously.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "cohdisc/receivers.hpp"
#include "cohdisc/signal.hpp"

namespace cohdisc {

/// Homodyne quantum efficiency of the reference apparatus.
inline constexpr double kApparatusHomodyneEfficiency = 0.858;
/// Electronic noise floor below shot noise, in dB.
inline constexpr double kApparatusElectronicNoiseDb = 23.0;
/// Combined displacement and APD detection efficiency.
inline constexpr double kApparatusPnrEfficiency = 0.55;
/// Interference visibility implied by an extinction ratio of 1/700.
inline constexpr double kApparatusModeMatch = 699.0 / 700.0;

struct ExperimentConfig {
  SignalEnsemble ensemble = SignalEnsemble::equal_priors(0.0);
  HomodyneReceiverConfig homodyne = HomodyneReceiverConfig::ideal();
  PnrReceiverConfig pnr;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 1;

  /// Perfect detectors.
  static ExperimentConfig ideal(const SignalEnsemble& ensemble, double homodyne_threshold, double displacement,
                                std::uint32_t pnr_threshold);
  /// Detector imperfections of the reference apparatus.
  static ExperimentConfig apparatus(const SignalEnsemble& ensemble, double homodyne_threshold, double displacement,
                                    std::uint32_t pnr_threshold);

  void validate() const;
};

/// All fields materialized, including defaults.
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys fall back to the apparatus defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct TrialRecord {
  std::uint64_t index = 0;
  Hypothesis true_state = Hypothesis::minus;
  double x = 0.0;
  /// Detected photon count, capped at the configured count cap.
  std::uint32_t n = 0;
  Decision homodyne_decision = Decision::inconclusive;
  Decision pnr_decision = Decision::inconclusive;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Trials are generated in fixed-size blocks, each with its own derived
/// seed, so any partition of blocks reproduces the serial stream.
inline constexpr std::uint64_t kTrialBlockSize = 1u << 16;

std::uint64_t block_count(const ExperimentConfig& cfg) noexcept;

/// Records of one block, in index order.
std::vector<TrialRecord> simulate_block(const ExperimentConfig& cfg, std::uint64_t block);

/// Full record stream; `threads` > 1 spreads blocks over worker threads
/// without changing the result.
std::vector<TrialRecord> simulate(const ExperimentConfig& cfg, unsigned threads = 1);

enum class ReceiverChannel : std::uint8_t { homodyne, pnr };

/// Relates an estimate to the ideal-theory amplitude it is compared with.
/// Detector inefficiency is accounted for by moving the comparison amplitude
/// to sqrt(efficiency) * alpha; the counts themselves are never altered.
struct ComparisonAxis {
  double alpha = 0.0;
  double efficiency = 1.0;

  double effective_alpha() const noexcept;
  friend bool operator==(const ComparisonAxis&, const ComparisonAxis&) = default;
};

struct Interval {
  double low = 0.0;
  double high = 1.0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// 95% Wilson score interval for k successes out of n.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

struct RateEstimate {
  std::uint64_t total = 0;
  std::uint64_t conclusive = 0;
  std::uint64_t errors = 0;
  std::uint64_t inconclusive = 0;
  double p_err_hat = 0.0;
  double p_inc_hat = 0.0;
  Interval p_err_ci;
  Interval p_inc_ci;
  /// False when no record was conclusive.
  bool error_defined = true;
  ComparisonAxis axis;

  friend bool operator==(const RateEstimate&, const RateEstimate&) = default;
};

RateEstimate estimate_rates(const std::vector<TrialRecord>& records, ReceiverChannel receiver,
                            const ComparisonAxis& axis = {});

/// Re-attributes the estimate to the amplitude seen after an efficiency loss.
RateEstimate inefficiency_correct(const RateEstimate& estimate, double efficiency);
ComparisonAxis inefficiency_correct(const ComparisonAxis& axis, double efficiency);

nlohmann::json to_json(const RateEstimate& e);

/// CSV header: index,true_state,x,n,hd_decision,pnr_decision
void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);

/// Locale-independent 12-significant-digit rendering used by every CSV writer.
std::string format_number(double v);

}  // namespace cohdisc
