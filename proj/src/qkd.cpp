#include "cohdisc/qkd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <stdexcept>
#include <vector>

#include "cohdisc/receivers.hpp"
#include "cohdisc/scalar_search.hpp"

namespace cohdisc {

namespace {

struct InnerBest {
  KeyRateEvaluation eval;
  double beta = 0.0;
  std::uint32_t m = 0;
  double threshold = 0.0;
};

std::vector<double> alpha_grid(const KeyRateSearch& s) {
  std::vector<double> grid;
  auto add_linspace = [&](double lo, double hi, int n) {
    for (int i = 0; i < n; ++i) grid.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  };
  add_linspace(s.alpha_min, s.alpha_max, s.alpha_points);
  add_linspace(std::max(0.5, s.alpha_min), std::min(1.5, s.alpha_max), s.seed_points);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());
  return grid;
}

InnerBest best_receiver_setting(double alpha, ReceiverKind kind, const ChannelModel& channel,
                                const KeyRateSearch& search) {
  ScanGoldenOptions scan;
  scan.scan_points = 60;
  InnerBest best;
  best.eval.key_rate = -std::numeric_limits<double>::infinity();

  if (kind == ReceiverKind::homodyne) {
    auto neg_g = [&](double b) { return -key_rate(alpha, HomodyneSetting{b}, channel, search.eve).key_rate; };
    const auto r = minimize_scan_golden(neg_g, 0.0, search.homodyne_threshold_max, scan);
    best.threshold = r.x;
    best.eval = key_rate(alpha, HomodyneSetting{r.x}, channel, search.eve);
    return best;
  }

  const double received = std::sqrt(channel.transmittance) * alpha;
  for (std::uint32_t m = 0; m <= search.m_cap; ++m) {
    auto neg_g = [&](double beta) { return -key_rate(alpha, PnrSetting{beta, m}, channel, search.eve).key_rate; };
    const auto r = minimize_scan_golden(neg_g, 0.0, received + 5.0, scan);
    const auto eval = key_rate(alpha, PnrSetting{r.x, m}, channel, search.eve);
    if (eval.key_rate > best.eval.key_rate) {
      best.eval = eval;
      best.beta = r.x;
      best.m = m;
    }
  }
  return best;
}

}  // namespace

void ChannelModel::validate() const {
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw std::domain_error("channel transmittance outside [0,1]");
  }
}

std::string_view to_string(ReceiverKind k) noexcept { return k == ReceiverKind::pnr ? "pnr" : "homodyne"; }

double eve_information(double alpha, double transmittance, double prior_minus) {
  ChannelModel{transmittance}.validate();
  if (alpha < 0.0) throw std::domain_error("eve_information: alpha must be >= 0");
  if (!(prior_minus >= 0.0 && prior_minus <= 1.0)) throw std::domain_error("eve_information: prior outside [0,1]");
  const double overlap = coherent_overlap(std::sqrt(1.0 - transmittance) * alpha);
  // Eigenvalues of p1|e-><e-| + p2|e+><e+| are (1 +- sqrt(1 - 4 p1 p2 (1 - o^2))) / 2.
  const double p1p2 = prior_minus * (1.0 - prior_minus);
  const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * p1p2 * (1.0 - overlap * overlap)));
  return binary_entropy(std::clamp(0.5 * (1.0 - root), 0.0, 1.0));
}

EveInformationModel holevo_eve_model() {
  return [](double alpha, double transmittance) { return eve_information(alpha, transmittance); };
}

KeyRateEvaluation key_rate(double alpha, const ReceiverSetting& receiver, const ChannelModel& channel,
                           const EveInformationModel& eve) {
  channel.validate();
  const auto bob = SignalEnsemble::equal_priors(std::sqrt(channel.transmittance) * alpha);
  const DiscriminationResult r = std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PnrSetting>) {
          return pnr_receiver(bob, PnrReceiverConfig::ideal(s.displacement, s.threshold));
        } else {
          return homodyne_receiver(bob, HomodyneReceiverConfig::ideal(s.threshold));
        }
      },
      receiver);

  KeyRateEvaluation out;
  out.p_err = r.p_err;
  out.p_inc = r.p_inc;
  out.eve_information = eve(alpha, channel.transmittance);
  if (!r.error_defined) {
    out.key_rate = 0.0;
    return out;
  }
  out.bob_information = 1.0 - binary_entropy(r.p_err);
  out.key_rate = r.p_conclusive * (out.bob_information - out.eve_information);
  return out;
}

KeyRatePoint optimize_key_rate(const ChannelModel& channel, ReceiverKind kind, const KeyRateSearch& search) {
  channel.validate();
  if (!(channel.transmittance > 0.0)) throw std::domain_error("optimize_key_rate needs transmittance > 0");
  if (!(search.alpha_min > 0.0 && search.alpha_max > search.alpha_min)) {
    throw std::invalid_argument("optimize_key_rate: bad amplitude range");
  }

  const auto grid = alpha_grid(search);
  std::size_t best_i = 0;
  double best_g = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = best_receiver_setting(grid[i], kind, channel, search).eval.key_rate;
    if (g > best_g) {
      best_g = g;
      best_i = i;
    }
  }

  // Golden refinement between the grid neighbours of the best amplitude.
  double lo = grid[best_i == 0 ? 0 : best_i - 1];
  double hi = grid[std::min(best_i + 1, grid.size() - 1)];
  double alpha_opt = grid[best_i];
  InnerBest best = best_receiver_setting(alpha_opt, kind, channel, search);
  if (hi > lo) {
    ScanGoldenOptions refine;
    refine.scan_points = 5;
    refine.golden_steps = 30;
    const auto r = minimize_scan_golden(
        [&](double a) { return -best_receiver_setting(a, kind, channel, search).eval.key_rate; }, lo, hi, refine);
    const InnerBest candidate = best_receiver_setting(r.x, kind, channel, search);
    if (candidate.eval.key_rate > best.eval.key_rate) {
      best = candidate;
      alpha_opt = r.x;
    }
  }

  KeyRatePoint p;
  p.transmittance = channel.transmittance;
  p.receiver = kind;
  p.key_rate = best.eval.key_rate;
  p.alpha_opt = alpha_opt;
  p.beta_opt = kind == ReceiverKind::pnr ? best.beta : 0.0;
  p.m_opt = kind == ReceiverKind::pnr ? best.m : 0;
  p.threshold_opt = kind == ReceiverKind::homodyne ? best.threshold : 0.0;
  p.p_err = best.eval.p_err;
  p.p_inc = best.eval.p_inc;
  p.bob_information = best.eval.bob_information;
  p.eve_information = best.eval.eve_information;
  return p;
}

}  // namespace cohdisc
