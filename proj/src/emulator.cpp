#include "cohdisc/emulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "cohdisc/seeding.hpp"

namespace cohdisc {

namespace {

struct TrialSampler {
  Hypothesis state_for(double u, double prior_minus) const {
    return u < prior_minus ? Hypothesis::minus : Hypothesis::plus;
  }

  // Box-Muller on two uniforms; 1 - u1 lies in (0, 1].
  static double standard_normal(double u1, double u2) {
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Poisson inversion, stopping at cap: the cap absorbs the whole upper tail.
  static std::uint32_t capped_poisson(double mean, double u, std::uint32_t cap) {
    double pmf = std::exp(-mean);
    double cdf = pmf;
    std::uint32_t n = 0;
    while (u >= cdf && n < cap) {
      ++n;
      pmf *= mean / n;
      cdf += pmf;
    }
    return n;
  }
};

double require_number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw std::invalid_argument(std::string("config key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

template <typename Int>
Int require_count(const nlohmann::json& j, const char* key, Int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw std::invalid_argument(std::string("config key '") + key + "' must be a non-negative integer");
  }
  return static_cast<Int>(v.get<unsigned long long>());
}

}  // namespace

ExperimentConfig ExperimentConfig::ideal(const SignalEnsemble& ensemble, double homodyne_threshold, double displacement,
                                         std::uint32_t pnr_threshold) {
  ExperimentConfig cfg;
  cfg.ensemble = ensemble;
  cfg.homodyne = HomodyneReceiverConfig::ideal(homodyne_threshold);
  cfg.pnr = PnrReceiverConfig::ideal(displacement, pnr_threshold);
  return cfg;
}

ExperimentConfig ExperimentConfig::apparatus(const SignalEnsemble& ensemble, double homodyne_threshold,
                                             double displacement, std::uint32_t pnr_threshold) {
  ExperimentConfig cfg = ideal(ensemble, homodyne_threshold, displacement, pnr_threshold);
  cfg.homodyne.efficiency = kApparatusHomodyneEfficiency;
  cfg.homodyne.electronic_noise_variance = electronic_noise_variance_from_db(kApparatusElectronicNoiseDb);
  cfg.pnr.efficiency = kApparatusPnrEfficiency;
  cfg.pnr.mode_match = kApparatusModeMatch;
  return cfg;
}

void ExperimentConfig::validate() const {
  ensemble.validate();
  homodyne.validate();
  pnr.validate();
  if (trials < 1) throw std::domain_error("experiment needs at least one trial");
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {
      {"alpha", cfg.ensemble.alpha},
      {"prior_minus", cfg.ensemble.prior_minus},
      {"prior_plus", cfg.ensemble.prior_plus},
      {"homodyne",
       {{"threshold", cfg.homodyne.threshold},
        {"efficiency", cfg.homodyne.efficiency},
        {"electronic_noise_variance", cfg.homodyne.electronic_noise_variance}}},
      {"pnr",
       {{"displacement", cfg.pnr.displacement},
        {"threshold", cfg.pnr.threshold},
        {"efficiency", cfg.pnr.efficiency},
        {"dark_count_mean", cfg.pnr.dark_count_mean},
        {"mode_match", cfg.pnr.mode_match},
        {"count_cap", cfg.pnr.count_cap}}},
      {"trials", cfg.trials},
      {"seed", cfg.seed},
  };
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  double alpha = require_number(j, "alpha", 0.0);
  if (j.contains("alpha_sq")) {
    if (j.contains("alpha")) throw std::invalid_argument("give either 'alpha' or 'alpha_sq', not both");
    const double a2 = require_number(j, "alpha_sq", 0.0);
    if (a2 < 0.0) throw std::invalid_argument("'alpha_sq' must be >= 0");
    alpha = std::sqrt(a2);
  }
  const double p1 = require_number(j, "prior_minus", 0.5);
  const double p2 = require_number(j, "prior_plus", 1.0 - p1);

  ExperimentConfig cfg = ExperimentConfig::apparatus(SignalEnsemble::with_priors(alpha, p1, p2), 0.0, alpha, 0);
  const nlohmann::json empty = nlohmann::json::object();
  const auto& hd = j.contains("homodyne") ? j.at("homodyne") : empty;
  const auto& pnr = j.contains("pnr") ? j.at("pnr") : empty;
  cfg.homodyne.threshold = require_number(hd, "threshold", cfg.homodyne.threshold);
  cfg.homodyne.efficiency = require_number(hd, "efficiency", cfg.homodyne.efficiency);
  cfg.homodyne.electronic_noise_variance =
      require_number(hd, "electronic_noise_variance", cfg.homodyne.electronic_noise_variance);
  cfg.pnr.displacement = require_number(pnr, "displacement", cfg.pnr.displacement);
  cfg.pnr.threshold = require_count(pnr, "threshold", cfg.pnr.threshold);
  cfg.pnr.efficiency = require_number(pnr, "efficiency", cfg.pnr.efficiency);
  cfg.pnr.dark_count_mean = require_number(pnr, "dark_count_mean", cfg.pnr.dark_count_mean);
  cfg.pnr.mode_match = require_number(pnr, "mode_match", cfg.pnr.mode_match);
  cfg.pnr.count_cap = require_count(pnr, "count_cap", cfg.pnr.count_cap);
  cfg.trials = require_count(j, "trials", cfg.trials);
  cfg.seed = require_count(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

std::uint64_t block_count(const ExperimentConfig& cfg) noexcept {
  return (cfg.trials + kTrialBlockSize - 1) / kTrialBlockSize;
}

std::vector<TrialRecord> simulate_block(const ExperimentConfig& cfg, std::uint64_t block) {
  const std::uint64_t first = block * kTrialBlockSize;
  if (first >= cfg.trials) return {};
  const std::uint64_t last = std::min(cfg.trials, first + kTrialBlockSize);

  const double hd_mean = std::sqrt(2.0 * cfg.homodyne.efficiency) * cfg.ensemble.alpha;
  const double hd_sigma = std::sqrt(0.5 + cfg.homodyne.electronic_noise_variance);
  const auto [count_mean_minus, count_mean_plus] = pnr_mean_counts(cfg.ensemble, cfg.pnr);
  const PnrPovm povm(cfg.pnr.threshold);

  // Every trial consumes exactly four draws: state, two for the quadrature,
  // one for the count.
  std::mt19937_64 rng(mix_seed(cfg.seed, block));
  TrialSampler sampler;
  std::vector<TrialRecord> out;
  out.reserve(static_cast<std::size_t>(last - first));
  for (std::uint64_t i = first; i < last; ++i) {
    const double u_state = unit_interval(rng());
    const double u1 = unit_interval(rng());
    const double u2 = unit_interval(rng());
    const double u_count = unit_interval(rng());

    TrialRecord r;
    r.index = i;
    r.true_state = sampler.state_for(u_state, cfg.ensemble.prior_minus);
    const bool minus = r.true_state == Hypothesis::minus;
    r.x = (minus ? -hd_mean : hd_mean) + hd_sigma * TrialSampler::standard_normal(u1, u2);
    r.n = TrialSampler::capped_poisson(minus ? count_mean_minus : count_mean_plus, u_count, cfg.pnr.count_cap);
    r.homodyne_decision = homodyne_decision(r.x, cfg.homodyne.threshold);
    r.pnr_decision = povm.decide(r.n);
    out.push_back(r);
  }
  return out;
}

std::vector<TrialRecord> simulate(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::uint64_t blocks = block_count(cfg);
  std::vector<std::vector<TrialRecord>> parts(static_cast<std::size_t>(blocks));

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) parts[b] = simulate_block(cfg, b);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::uint64_t b = w; b < blocks; b += workers) parts[b] = simulate_block(cfg, b);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  std::vector<TrialRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.trials));
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

double ComparisonAxis::effective_alpha() const noexcept { return std::sqrt(efficiency) * alpha; }

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (k > n) throw std::invalid_argument("wilson_interval: k > n");
  if (n == 0) return {0.0, 1.0};
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(k) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double centre = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

RateEstimate estimate_rates(const std::vector<TrialRecord>& records, ReceiverChannel receiver,
                            const ComparisonAxis& axis) {
  RateEstimate e;
  e.axis = axis;
  for (const auto& r : records) {
    const Decision d = receiver == ReceiverChannel::homodyne ? r.homodyne_decision : r.pnr_decision;
    ++e.total;
    if (d == Decision::inconclusive) {
      ++e.inconclusive;
      continue;
    }
    ++e.conclusive;
    const bool said_minus = d == Decision::minus;
    if (said_minus != (r.true_state == Hypothesis::minus)) ++e.errors;
  }
  if (e.total > 0) {
    e.p_inc_hat = static_cast<double>(e.inconclusive) / static_cast<double>(e.total);
    e.p_inc_ci = wilson_interval(e.inconclusive, e.total);
  }
  if (e.conclusive > 0) {
    e.p_err_hat = static_cast<double>(e.errors) / static_cast<double>(e.conclusive);
    e.p_err_ci = wilson_interval(e.errors, e.conclusive);
  } else {
    e.error_defined = false;
    e.p_err_hat = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

ComparisonAxis inefficiency_correct(const ComparisonAxis& axis, double efficiency) {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw std::domain_error("efficiency must lie in (0,1]");
  return {axis.alpha, axis.efficiency * efficiency};
}

RateEstimate inefficiency_correct(const RateEstimate& estimate, double efficiency) {
  RateEstimate out = estimate;
  out.axis = inefficiency_correct(estimate.axis, efficiency);
  return out;
}

nlohmann::json to_json(const RateEstimate& e) {
  nlohmann::json j{
      {"total", e.total},
      {"conclusive", e.conclusive},
      {"errors", e.errors},
      {"inconclusive", e.inconclusive},
      {"p_inc_hat", e.p_inc_hat},
      {"p_inc_ci", {e.p_inc_ci.low, e.p_inc_ci.high}},
      {"error_defined", e.error_defined},
      {"comparison_alpha", e.axis.effective_alpha()},
      {"inefficiency_correction", {{"efficiency", e.axis.efficiency}, {"method", "amplitude_relabeling"}}},
  };
  if (e.error_defined) {
    j["p_err_hat"] = e.p_err_hat;
    j["p_err_ci"] = {e.p_err_ci.low, e.p_err_ci.high};
  } else {
    j["p_err_hat"] = nullptr;
    j["p_err_ci"] = nullptr;
  }
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "index,true_state,x,n,hd_decision,pnr_decision\n";
  for (const auto& r : records) {
    out << std::to_string(r.index) << ',' << to_string(r.true_state) << ',' << format_number(r.x) << ','
        << std::to_string(r.n) << ','
        << to_string(r.homodyne_decision) << ',' << to_string(r.pnr_decision) << '\n';
  }
}

}  // namespace cohdisc
