// Error-rate vs inconclusive-rate trade-offs: displacement optimization for
// the PNR receiver, the matched-inconclusive homodyne comparison, and grid
// sweeps that tabulate both against the optimal intermediate bound.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cohdisc/bounds.hpp"
#include "cohdisc/receivers.hpp"
#include "cohdisc/signal.hpp"

namespace cohdisc {

struct DisplacementOptimum {
  double displacement = 0.0;
  DiscriminationResult rates;
};

/// Displacement minimizing the conditional error of the PNR receiver with
/// threshold m. Every field of `base` except the displacement is honoured.
DisplacementOptimum optimize_displacement(const SignalEnsemble& ensemble, std::uint32_t threshold,
                                          const PnrReceiverConfig& base = {});

/// Postselection threshold B at which the homodyne inconclusive rate equals
/// `p_inc_target` (to 1e-10).
double homodyne_threshold_for_inconclusive(const SignalEnsemble& ensemble, double p_inc_target,
                                           const HomodyneReceiverConfig& base = HomodyneReceiverConfig::ideal());

struct MatchedHomodyne {
  double threshold = 0.0;
  DiscriminationResult homodyne;
  DiscriminationResult pnr;
};

/// Homodyne receiver tuned to the same inconclusive rate as the given PNR receiver.
MatchedHomodyne match_inconclusive(const SignalEnsemble& ensemble, const PnrReceiverConfig& pnr,
                                   const HomodyneReceiverConfig& homodyne_base = HomodyneReceiverConfig::ideal());

struct TradeoffPoint {
  double p_inc = 0.0;
  double p_err = 0.0;
  /// B for homodyne curves, the target rate for bound curves.
  double parameter = 0.0;
};

/// (p_inc, p_err) points ordered by strictly increasing p_inc.
class TradeoffCurve {
 public:
  /// Throws std::invalid_argument if p_inc does not increase or a rate leaves [0,1].
  void append(const TradeoffPoint& p);
  const std::vector<TradeoffPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

 private:
  std::vector<TradeoffPoint> points_;
};

TradeoffCurve homodyne_curve(const SignalEnsemble& ensemble, const std::vector<double>& thresholds,
                             const HomodyneReceiverConfig& base = HomodyneReceiverConfig::ideal());

/// One PNR (or Kennedy) operating point at a given amplitude.
struct AmplitudeRow {
  double alpha_sq = 0.0;
  std::uint32_t threshold = 0;
  double displacement = 0.0;
  DiscriminationResult rates;
};

/// One matched-inconclusive comparison at a given amplitude and m.
struct ComparisonRow {
  double alpha_sq = 0.0;
  std::uint32_t threshold = 0;
  double displacement = 0.0;
  double homodyne_threshold = 0.0;
  double p_inc = 0.0;
  double p_err_pnr = 0.0;
  double p_err_homodyne = 0.0;
  double p_err_optimal_id = 0.0;
  bool optimal_id_certified = true;
};

struct SweepOptions {
  double prior_minus = 0.5;
  PnrReceiverConfig pnr_base;
  HomodyneReceiverConfig homodyne_base = HomodyneReceiverConfig::ideal();
  bool with_optimal_id = true;
  /// When set, comparison rows use this displacement instead of the optimum.
  std::optional<double> fixed_displacement;
  IdOracleOptions oracle;
  bool parallel = true;
};

/// Kennedy receiver (beta = alpha, m = 0) per amplitude.
std::vector<AmplitudeRow> kennedy_rows(const std::vector<double>& alpha_sq_grid, const SweepOptions& opt = {});

/// PNR receiver with optimized displacement, amplitude-major then m.
std::vector<AmplitudeRow> pnr_rows(const std::vector<double>& alpha_sq_grid, const std::vector<std::uint32_t>& thresholds,
                                   const SweepOptions& opt = {});

/// Matched-inconclusive comparison rows, amplitude-major then m. Targets above
/// the unambiguous rate get an optimal-ID error of zero (unambiguous
/// discrimination followed by random abstention reaches them).
std::vector<ComparisonRow> comparison_rows(const std::vector<double>& alpha_sq_grid,
                                           const std::vector<std::uint32_t>& thresholds, const SweepOptions& opt = {});

struct SweepResult {
  std::vector<AmplitudeRow> kennedy;
  std::vector<AmplitudeRow> pnr;
  std::vector<ComparisonRow> comparison;
  /// One homodyne curve over the threshold grid per amplitude.
  std::vector<TradeoffCurve> homodyne;
};

SweepResult sweep_curves(const std::vector<double>& alpha_sq_grid, const std::vector<std::uint32_t>& thresholds,
                         const std::vector<double>& homodyne_thresholds, const SweepOptions& opt = {});

}  // namespace cohdisc
