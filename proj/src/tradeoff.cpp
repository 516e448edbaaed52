#include "cohdisc/tradeoff.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "cohdisc/scalar_search.hpp"

namespace cohdisc {

namespace {

constexpr double kMatchTolerance = 1e-10;

// Runs fn(i) for every grid index, concurrently if asked, and concatenates
// the per-index outputs in index order.
template <typename Row, typename Fn>
std::vector<Row> gather(std::size_t count, bool parallel, Fn fn) {
  std::vector<std::vector<Row>> parts(count);
  if (parallel && count > 1) {
    std::vector<std::future<std::vector<Row>>> jobs;
    jobs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) jobs.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t i = 0; i < count; ++i) parts[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < count; ++i) parts[i] = fn(i);
  }
  std::vector<Row> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

DisplacementOptimum optimize_displacement(const SignalEnsemble& ensemble, std::uint32_t threshold,
                                          const PnrReceiverConfig& base) {
  ensemble.validate();
  PnrReceiverConfig cfg = base;
  cfg.threshold = threshold;
  cfg.validate();

  auto objective = [&](double beta) {
    cfg.displacement = beta;
    const auto r = pnr_receiver(ensemble, cfg);
    return r.error_defined ? r.p_err : std::numeric_limits<double>::infinity();
  };
  ScanGoldenOptions opt;
  opt.max_expansions = 4;
  const auto best = minimize_scan_golden(objective, 0.0, ensemble.alpha + 5.0, opt);

  cfg.displacement = best.x;
  return {best.x, pnr_receiver(ensemble, cfg)};
}

double homodyne_threshold_for_inconclusive(const SignalEnsemble& ensemble, double p_inc_target,
                                           const HomodyneReceiverConfig& base) {
  if (!(p_inc_target >= 0.0 && p_inc_target < 1.0)) {
    throw std::domain_error("homodyne matching needs an inconclusive target in [0,1)");
  }
  if (p_inc_target == 0.0) return 0.0;

  HomodyneReceiverConfig cfg = base;
  auto p_inc_at = [&](double b) {
    cfg.threshold = b;
    return homodyne_receiver(ensemble, cfg).p_inc;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (p_inc_at(hi) < p_inc_target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("homodyne matching: threshold bracket diverged");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double diff = p_inc_at(mid) - p_inc_target;
    if (std::abs(diff) < 0.01 * kMatchTolerance) break;
    (diff < 0.0 ? lo : hi) = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  if (std::abs(p_inc_at(mid) - p_inc_target) >= kMatchTolerance) {
    throw std::runtime_error("homodyne matching did not converge");
  }
  return mid;
}

MatchedHomodyne match_inconclusive(const SignalEnsemble& ensemble, const PnrReceiverConfig& pnr,
                                   const HomodyneReceiverConfig& homodyne_base) {
  MatchedHomodyne out;
  out.pnr = pnr_receiver(ensemble, pnr);
  if (out.pnr.p_inc >= 1.0) throw std::domain_error("PNR receiver is never conclusive");
  out.threshold = homodyne_threshold_for_inconclusive(ensemble, out.pnr.p_inc, homodyne_base);
  HomodyneReceiverConfig cfg = homodyne_base;
  cfg.threshold = out.threshold;
  out.homodyne = homodyne_receiver(ensemble, cfg);
  return out;
}

void TradeoffCurve::append(const TradeoffPoint& p) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.p_inc) || !in_unit(p.p_err)) throw std::invalid_argument("trade-off point outside [0,1]");
  if (!points_.empty() && !(p.p_inc > points_.back().p_inc)) {
    throw std::invalid_argument("trade-off curve needs strictly increasing p_inc");
  }
  points_.push_back(p);
}

TradeoffCurve homodyne_curve(const SignalEnsemble& ensemble, const std::vector<double>& thresholds,
                             const HomodyneReceiverConfig& base) {
  TradeoffCurve curve;
  HomodyneReceiverConfig cfg = base;
  for (double b : thresholds) {
    cfg.threshold = b;
    const auto r = homodyne_receiver(ensemble, cfg);
    if (!r.error_defined) continue;
    // Thresholds so large that p_inc no longer moves in double precision add nothing.
    if (!curve.empty() && !(r.p_inc > curve.points().back().p_inc)) continue;
    curve.append({r.p_inc, r.p_err, b});
  }
  return curve;
}

std::vector<AmplitudeRow> kennedy_rows(const std::vector<double>& alpha_sq_grid, const SweepOptions& opt) {
  std::vector<AmplitudeRow> rows;
  for (double a2 : alpha_sq_grid) {
    const auto ens = SignalEnsemble::from_mean_photons(a2, opt.prior_minus);
    PnrReceiverConfig cfg = opt.pnr_base;
    cfg.displacement = ens.alpha;
    cfg.threshold = 0;
    rows.push_back({a2, 0, ens.alpha, pnr_receiver(ens, cfg)});
  }
  return rows;
}

std::vector<AmplitudeRow> pnr_rows(const std::vector<double>& alpha_sq_grid, const std::vector<std::uint32_t>& thresholds,
                                   const SweepOptions& opt) {
  return gather<AmplitudeRow>(alpha_sq_grid.size(), opt.parallel, [&](std::size_t i) {
    const double a2 = alpha_sq_grid[i];
    const auto ens = SignalEnsemble::from_mean_photons(a2, opt.prior_minus);
    std::vector<AmplitudeRow> rows;
    for (auto m : thresholds) {
      const auto best = optimize_displacement(ens, m, opt.pnr_base);
      rows.push_back({a2, m, best.displacement, best.rates});
    }
    return rows;
  });
}

std::vector<ComparisonRow> comparison_rows(const std::vector<double>& alpha_sq_grid,
                                           const std::vector<std::uint32_t>& thresholds, const SweepOptions& opt) {
  IdOracleOptions oracle = opt.oracle;
  if (opt.parallel) oracle.parallel = false;  // parallelism already spent on the grid

  return gather<ComparisonRow>(alpha_sq_grid.size(), opt.parallel, [&](std::size_t i) {
    const double a2 = alpha_sq_grid[i];
    const auto ens = SignalEnsemble::from_mean_photons(a2, opt.prior_minus);
    std::vector<ComparisonRow> rows;
    for (auto m : thresholds) {
      PnrReceiverConfig cfg = opt.pnr_base;
      cfg.threshold = m;
      cfg.displacement =
          opt.fixed_displacement ? *opt.fixed_displacement : optimize_displacement(ens, m, opt.pnr_base).displacement;
      const auto matched = match_inconclusive(ens, cfg, opt.homodyne_base);

      ComparisonRow row;
      row.alpha_sq = a2;
      row.threshold = m;
      row.displacement = cfg.displacement;
      row.homodyne_threshold = matched.threshold;
      row.p_inc = matched.pnr.p_inc;
      row.p_err_pnr = matched.pnr.p_err;
      row.p_err_homodyne = matched.homodyne.p_err;
      row.p_err_optimal_id = std::numeric_limits<double>::quiet_NaN();
      if (opt.with_optimal_id) {
        if (row.p_inc >= unambiguous_min_inconclusive(ens)) {
          row.p_err_optimal_id = 0.0;
        } else {
          const auto id = optimal_id_bound(ens, row.p_inc, oracle);
          row.p_err_optimal_id = id.p_err_min;
          row.optimal_id_certified = id.certified;
        }
      }
      rows.push_back(row);
    }
    return rows;
  });
}

SweepResult sweep_curves(const std::vector<double>& alpha_sq_grid, const std::vector<std::uint32_t>& thresholds,
                         const std::vector<double>& homodyne_thresholds, const SweepOptions& opt) {
  if (alpha_sq_grid.empty() || thresholds.empty() || homodyne_thresholds.empty()) {
    throw std::invalid_argument("sweep_curves needs non-empty grids");
  }
  SweepResult out;
  out.kennedy = kennedy_rows(alpha_sq_grid, opt);
  out.pnr = pnr_rows(alpha_sq_grid, thresholds, opt);
  out.comparison = comparison_rows(alpha_sq_grid, thresholds, opt);
  for (double a2 : alpha_sq_grid) {
    out.homodyne.push_back(
        homodyne_curve(SignalEnsemble::from_mean_photons(a2, opt.prior_minus), homodyne_thresholds, opt.homodyne_base));
  }
  return out;
}

}  // namespace cohdisc
