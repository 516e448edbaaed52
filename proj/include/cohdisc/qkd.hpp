// Secret key rate of binary coherent-state QKD over a pure-loss channel with
// direct reconciliation, for Bob using either receiver.
#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <variant>

#include "cohdisc/signal.hpp"

namespace cohdisc {

struct ChannelModel {
  /// Power transmittance; the lost fraction is handed to the eavesdropper.
  double transmittance = 1.0;
  void validate() const;
};

/// Holevo information of the eavesdropper's tapped states |+-sqrt(1 - eta) alpha>.
double eve_information(double alpha, double transmittance, double prior_minus = 0.5);

/// Replaceable bound on the eavesdropper's information per pulse: (alpha, eta) -> bits.
using EveInformationModel = std::function<double(double alpha, double transmittance)>;

/// The default EveInformationModel (unconditioned Holevo bound, equal priors).
EveInformationModel holevo_eve_model();

enum class ReceiverKind : std::uint8_t { pnr, homodyne };
std::string_view to_string(ReceiverKind k) noexcept;

struct PnrSetting {
  double displacement = 0.0;
  std::uint32_t threshold = 0;
};

struct HomodyneSetting {
  double threshold = 0.0;
};

using ReceiverSetting = std::variant<PnrSetting, HomodyneSetting>;

struct KeyRateEvaluation {
  /// Bits per channel pulse; may be negative.
  double key_rate = 0.0;
  double p_err = 0.0;
  double p_inc = 0.0;
  double bob_information = 0.0;
  double eve_information = 0.0;
};

/// G = (1 - p_inc)(I_B - I_E) with I_B = 1 - H(p_err), Bob's ideal receiver
/// seeing the attenuated amplitude sqrt(eta) alpha.
KeyRateEvaluation key_rate(double alpha, const ReceiverSetting& receiver, const ChannelModel& channel,
                           const EveInformationModel& eve = holevo_eve_model());

struct KeyRatePoint {
  double transmittance = 0.0;
  ReceiverKind receiver = ReceiverKind::pnr;
  /// Optimized raw rate; negative when no setting yields a key.
  double key_rate = 0.0;
  double alpha_opt = 0.0;
  /// PNR displacement (0 for homodyne).
  double beta_opt = 0.0;
  std::uint32_t m_opt = 0;
  /// Homodyne postselection threshold (0 for PNR).
  double threshold_opt = 0.0;
  double p_err = 0.0;
  double p_inc = 0.0;
  double bob_information = 0.0;
  double eve_information = 0.0;

  bool positive() const noexcept { return key_rate > 0.0; }
  double reported_key_rate() const noexcept { return key_rate > 0.0 ? key_rate : 0.0; }
};

struct KeyRateSearch {
  std::uint32_t m_cap = 10;
  double alpha_min = 0.05;
  double alpha_max = 3.0;
  /// Outer amplitude grid; a denser seed grid covers [0.5, 1.5].
  int alpha_points = 40;
  int seed_points = 21;
  /// Upper end of the homodyne threshold scan.
  double homodyne_threshold_max = 12.0;
  EveInformationModel eve = holevo_eve_model();
};

/// Maximizes G over alpha and the receiver parameters. Deterministic.
KeyRatePoint optimize_key_rate(const ChannelModel& channel, ReceiverKind kind, const KeyRateSearch& search = {});

}  // namespace cohdisc
