#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cohdisc {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
};

struct ScanGoldenOptions {
  int scan_points = 200;
  int golden_steps = 40;
  /// Double the upper end while the scan minimum sits on it.
  int max_expansions = 0;
};

/// Dense scan followed by golden-section refinement around the scan argmin.
/// Flat objectives (and exact ties) resolve to the smallest x.
template <typename F>
ScalarMinimum minimize_scan_golden(const F& f, double lo, double hi, const ScanGoldenOptions& opt = {}) {
  if (!(hi > lo) || opt.scan_points < 3) throw std::invalid_argument("minimize_scan_golden: bad bracket");

  std::vector<double> xs(static_cast<std::size_t>(opt.scan_points));
  std::vector<double> vs(xs.size());
  std::size_t best = 0;
  for (int expansion = 0;; ++expansion) {
    const double step = (hi - lo) / static_cast<double>(opt.scan_points - 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = lo + step * static_cast<double>(i);
      vs[i] = f(xs[i]);
    }
    best = static_cast<std::size_t>(std::min_element(vs.begin(), vs.end()) - vs.begin());
    if (best + 1 < xs.size() || expansion >= opt.max_expansions) break;
    hi = lo + 2.0 * (hi - lo);
  }

  const auto [lo_it, hi_it] = std::minmax_element(vs.begin(), vs.end());
  if (*hi_it - *lo_it <= 1e-15 * std::max(1.0, std::abs(*lo_it))) return {xs.front(), vs.front()};

  double a = xs[best == 0 ? 0 : best - 1];
  double b = xs[std::min(best + 1, xs.size() - 1)];
  ScalarMinimum out{xs[best], vs[best]};

  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < opt.golden_steps; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fmid = f(mid);
  for (const auto& [x, v] : {std::pair{c, fc}, std::pair{d, fd}, std::pair{mid, fmid}}) {
    if (v < out.value) out = {x, v};
  }
  return out;
}

}  // namespace cohdisc
