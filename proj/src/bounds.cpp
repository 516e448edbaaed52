#include "cohdisc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "cohdisc/seeding.hpp"

namespace cohdisc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

// (lnLambda_B -+ ln(p1/p2)) / (4 sqrt(2) alpha), with the alpha == 0 limit.
double shift(double numerator, double alpha) {
  const double scale = 4.0 * std::numbers::sqrt2 * alpha;
  if (scale > 0.0) return numerator / scale;
  if (numerator == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), numerator);
}

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Povm = std::array<Matrix, 3>;

enum Element { kGuessMinus = 0, kGuessPlus = 1, kInconclusive = 2 };

double expectation(const Vector& v, const Matrix& m) { return v.dot(m * v); }

// Conditional-error problem on a fixed inconclusive rate.
struct IdProblem {
  Vector minus;
  Vector plus;
  double p1 = 0.5;
  double p2 = 0.5;
  double target = 0.0;
  int dim = 2;

  int block() const { return dim * (dim + 1) / 2; }
  int parameter_count() const { return 3 * block(); }

  double joint_error(const Povm& p) const {
    return p1 * expectation(minus, p[kGuessPlus]) + p2 * expectation(plus, p[kGuessMinus]);
  }
  double inconclusive(const Povm& p) const {
    return p1 * expectation(minus, p[kInconclusive]) + p2 * expectation(plus, p[kInconclusive]);
  }
};

struct Decoded {
  Povm povm;
  double trace = 0.0;
};

// Pi_k = S^{-1/2} L_k L_k^T S^{-1/2}, S = sum_k L_k L_k^T, with each L_k
// lower triangular. Every POVM is reachable and every output is a POVM.
std::optional<Decoded> decode(const IdProblem& prob, const Vector& x) {
  const int d = prob.dim;
  std::array<Matrix, 3> raw;
  Matrix s = Matrix::Zero(d, d);
  int offset = 0;
  for (auto& r : raw) {
    Matrix l = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) l(i, j) = x[offset++];
    r = l * l.transpose();
    s += r;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.maxCoeff()))) return std::nullopt;
  const Matrix inv_sqrt = eig.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() *
                          eig.eigenvectors().transpose();
  Decoded out;
  for (int k = 0; k < 3; ++k) out.povm[k] = inv_sqrt * raw[k] * inv_sqrt;
  out.trace = s.trace();
  return out;
}

// Minimum-error projective measurement (inconclusive element zero).
Povm helstrom_povm(const IdProblem& prob) {
  const Matrix gamma = prob.p2 * prob.plus * prob.plus.transpose() - prob.p1 * prob.minus * prob.minus.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma);
  Povm p;
  for (auto& m : p) m = Matrix::Zero(prob.dim, prob.dim);
  for (int i = 0; i < prob.dim; ++i) {
    const Vector v = eig.eigenvectors().col(i);
    p[eig.eigenvalues()[i] > 0.0 ? kGuessPlus : kGuessMinus] += v * v.transpose();
  }
  return p;
}

// Mixes `p` with the Helstrom measurement or with "always inconclusive" so
// that the inconclusive rate hits the target exactly.
Povm restore_feasibility(const IdProblem& prob, const Povm& p, const Povm& helstrom) {
  const double q = prob.inconclusive(p);
  Povm out = p;
  if (q > prob.target && q > 0.0) {
    const double t = 1.0 - prob.target / q;
    for (int k = 0; k < 3; ++k) out[k] = (1.0 - t) * p[k] + t * helstrom[k];
  } else if (q < prob.target) {
    const double t = (prob.target - q) / (1.0 - q);
    for (int k = 0; k < 3; ++k) out[k] = (1.0 - t) * p[k];
    out[kInconclusive] += t * Matrix::Identity(prob.dim, prob.dim);
  }
  return out;
}

struct Penalty {
  double multiplier = 0.0;
  double weight = 10.0;
};

double augmented_lagrangian(const IdProblem& prob, const Penalty& pen, const Vector& x) {
  const auto dec = decode(prob, x);
  if (!dec) return std::numeric_limits<double>::infinity();
  const double c = prob.inconclusive(dec->povm) - prob.target;
  const double gauge = dec->trace - prob.dim;
  return prob.joint_error(dec->povm) + pen.multiplier * c + 0.5 * pen.weight * c * c + gauge * gauge;
}

template <typename F>
Vector numeric_gradient(const F& f, const Vector& x) {
  constexpr double h = 1e-6;
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Quasi-Newton descent with backtracking line search.
template <typename F>
Vector bfgs(const F& f, Vector x, int max_iterations = 500) {
  const Eigen::Index n = x.size();
  Matrix h_inv = Matrix::Identity(n, n);
  double fx = f(x);
  Vector g = numeric_gradient(f, x);
  for (int it = 0; it < max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-11) break;
    Vector dir = -h_inv * g;
    if (dir.dot(g) >= 0.0) {
      h_inv.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    Vector next;
    double fnext = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      next = x + step * dir;
      fnext = f(next);
      if (std::isfinite(fnext) && fnext <= fx + 1e-4 * step * g.dot(dir)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Vector gnext = numeric_gradient(f, next);
    const Vector s = next - x;
    const Vector y = gnext - g;
    const double sy = s.dot(y);
    const double decrease = fx - fnext;
    x = next;
    fx = fnext;
    g = gnext;
    if (sy > 1e-18) {
      const double rho = 1.0 / sy;
      const Matrix id = Matrix::Identity(n, n);
      h_inv = (id - rho * s * y.transpose()) * h_inv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (decrease >= 0.0 && decrease < 1e-17 && s.lpNorm<Eigen::Infinity>() < 1e-12) break;
  }
  return x;
}

struct StartResult {
  Vector params;
  Povm povm;
  double p_err = std::numeric_limits<double>::infinity();
};

double conditional_error(const IdProblem& prob, const Povm& p) {
  return prob.joint_error(p) / (1.0 - prob.target);
}

StartResult run_start(const IdProblem& prob, const Povm& helstrom, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(prob.parameter_count());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = normal(rng);

  Penalty pen;
  double previous = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 60; ++outer) {
    x = bfgs([&](const Vector& v) { return augmented_lagrangian(prob, pen, v); }, x);
    const auto dec = decode(prob, x);
    if (!dec) break;
    const double c = prob.inconclusive(dec->povm) - prob.target;
    if (std::abs(c) < 1e-13) break;
    pen.multiplier += pen.weight * c;
    if (std::abs(c) > 0.25 * previous) pen.weight = std::min(pen.weight * 4.0, 1e8);
    previous = std::abs(c);
  }

  StartResult r;
  r.params = x;
  if (const auto dec = decode(prob, x)) {
    r.povm = restore_feasibility(prob, dec->povm, helstrom);
    r.p_err = conditional_error(prob, r.povm);
  }
  return r;
}

bool certify(const IdProblem& prob, const Povm& helstrom, const StartResult& best, const IdOracleOptions& opt) {
  std::mt19937_64 rng(mix_seed(opt.seed, 0xce47));
  std::uniform_real_distribution<double> jitter(-opt.certification_step, opt.certification_step);
  for (int s = 0; s < opt.certification_samples; ++s) {
    Vector x = best.params;
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += jitter(rng);
    const auto dec = decode(prob, x);
    if (!dec) continue;
    const double p = conditional_error(prob, restore_feasibility(prob, dec->povm, helstrom));
    if (p < best.p_err - opt.certification_slack) return false;
  }
  return true;
}

}  // namespace

double gaussian_a(double squeezing, double squeezing_phase) {
  require(squeezing >= 0.0, "gaussian_a: squeezing must be >= 0");
  const double c = std::cosh(2.0 * squeezing);
  const double s = std::sinh(2.0 * squeezing);
  if (!std::isfinite(c)) {
    // r -> inf: a -> (1 + cos phi) / 2
    return 0.5 * (1.0 + std::cos(squeezing_phase));
  }
  return (1.0 + c + s * std::cos(squeezing_phase)) / (2.0 * (c + 1.0));
}

DiscriminationResult gaussian_receiver_rates_for_weight(const SignalEnsemble& ensemble, double a,
                                                        double likelihood_threshold) {
  ensemble.validate();
  require(a >= 0.0 && a <= 1.0, "Gaussian weight a must lie in [0,1]");
  require(likelihood_threshold >= 1.0, "likelihood threshold must be >= 1");
  require(ensemble.alpha > 0.0 || likelihood_threshold == 1.0,
          "alpha must be > 0 for a likelihood threshold above 1");

  const double alpha = ensemble.alpha;
  const double core = std::sqrt(2.0 * a) * alpha;
  const double ln_lambda = std::log(likelihood_threshold);
  double ln_prior = 0.0;
  if (ensemble.prior_minus != ensemble.prior_plus) {
    ln_prior = std::log(ensemble.prior_minus) - std::log(ensemble.prior_plus);
  }

  // p_e^(+-) and p_s^(+-) exactly as in the closed form; p_s is the
  // probability of not guessing the prepared state.
  const double err_plus = 0.5 * std::erfc(core + shift(ln_lambda - ln_prior, alpha));
  const double err_minus = 0.5 * std::erfc(core + shift(ln_lambda + ln_prior, alpha));
  const double miss_plus_arg = core - shift(ln_lambda + ln_prior, alpha);
  const double miss_minus_arg = core - shift(ln_lambda - ln_prior, alpha);

  OutcomeProbabilities given_minus;
  given_minus.guess_plus = err_minus;
  given_minus.guess_minus = 0.5 * std::erfc(-miss_minus_arg);
  given_minus.inconclusive = std::max(0.0, 0.5 * std::erfc(miss_minus_arg) - err_minus);

  OutcomeProbabilities given_plus;
  given_plus.guess_minus = err_plus;
  given_plus.guess_plus = 0.5 * std::erfc(-miss_plus_arg);
  given_plus.inconclusive = std::max(0.0, 0.5 * std::erfc(miss_plus_arg) - err_plus);

  return assemble_result(ensemble, given_minus, given_plus);
}

DiscriminationResult gaussian_receiver_rates(const SignalEnsemble& ensemble,
                                             const GaussianMeasurementParams& params) {
  return gaussian_receiver_rates_for_weight(ensemble, gaussian_a(params.squeezing, params.squeezing_phase),
                                            params.likelihood_threshold);
}

double helstrom_bound(const SignalEnsemble& ensemble) {
  ensemble.validate();
  const double overlap = coherent_overlap(ensemble.alpha);
  const double disc = 1.0 - 4.0 * ensemble.prior_minus * ensemble.prior_plus * overlap * overlap;
  return 0.5 * (1.0 - std::sqrt(std::max(0.0, disc)));
}

UsdPoint usd_bound(const SignalEnsemble& ensemble) {
  ensemble.validate();
  require(std::abs(ensemble.prior_minus - ensemble.prior_plus) <= kPriorTolerance,
          "usd_bound supports equal priors only");
  return {coherent_overlap(ensemble.alpha), 0.0};
}

double unambiguous_min_inconclusive(const SignalEnsemble& ensemble) {
  ensemble.validate();
  const double s = coherent_overlap(ensemble.alpha);
  const double lo = std::min(ensemble.prior_minus, ensemble.prior_plus);
  const double hi = std::max(ensemble.prior_minus, ensemble.prior_plus);
  if (lo == 0.0) return hi == 1.0 ? 0.0 : 1.0;
  if (s <= std::sqrt(lo / hi)) return 2.0 * std::sqrt(lo * hi) * s;
  return hi + lo * s * s;
}

std::array<Eigen::VectorXd, 2> span_basis_states(const SignalEnsemble& ensemble, int dimension) {
  require(dimension >= 2, "span basis needs at least two dimensions");
  const double o = coherent_overlap(ensemble.alpha);
  Vector plus = Vector::Zero(dimension);
  Vector minus = Vector::Zero(dimension);
  plus[0] = 1.0;
  minus[0] = o;
  minus[1] = std::sqrt(std::max(0.0, 1.0 - o * o));
  return {minus, plus};
}

IdBoundPoint optimal_id_bound(const SignalEnsemble& ensemble, double p_inc_target, const IdOracleOptions& opt) {
  ensemble.validate();
  require(opt.dimension >= 2 && opt.dimension <= 4, "oracle dimension must be 2..4");
  require(opt.starts >= 1, "oracle needs at least one start");
  require(p_inc_target >= 0.0 && p_inc_target <= 1.0, "inconclusive target outside [0,1]");
  const double usd = unambiguous_min_inconclusive(ensemble);
  if (p_inc_target > usd + 1e-12) {
    throw std::domain_error("inconclusive target exceeds the unambiguous-discrimination rate");
  }

  IdProblem prob;
  const auto states = span_basis_states(ensemble, opt.dimension);
  prob.minus = states[0];
  prob.plus = states[1];
  prob.p1 = ensemble.prior_minus;
  prob.p2 = ensemble.prior_plus;
  prob.target = std::min(p_inc_target, usd);
  prob.dim = opt.dimension;

  IdBoundPoint out;
  out.p_inc = prob.target;
  const Matrix id = Matrix::Identity(prob.dim, prob.dim);
  if (prob.target >= 1.0) {
    out.povm = {Matrix::Zero(prob.dim, prob.dim), Matrix::Zero(prob.dim, prob.dim), id};
    out.p_err_min = std::numeric_limits<double>::quiet_NaN();
    out.error_defined = false;
    out.certified = true;
    return out;
  }

  const Povm helstrom = helstrom_povm(prob);
  std::vector<StartResult> results(static_cast<std::size_t>(opt.starts));
  if (opt.parallel) {
    std::vector<std::future<StartResult>> jobs;
    for (int k = 0; k < opt.starts; ++k) {
      jobs.push_back(std::async(std::launch::async, run_start, std::cref(prob), std::cref(helstrom),
                                mix_seed(opt.seed, static_cast<std::uint64_t>(k))));
    }
    for (std::size_t k = 0; k < jobs.size(); ++k) results[k] = jobs[k].get();
  } else {
    for (int k = 0; k < opt.starts; ++k) {
      results[static_cast<std::size_t>(k)] = run_start(prob, helstrom, mix_seed(opt.seed, static_cast<std::uint64_t>(k)));
    }
  }

  // Lowest error wins; the earliest start breaks ties so the answer does not
  // depend on scheduling.
  const auto best = std::min_element(results.begin(), results.end(),
                                     [](const StartResult& a, const StartResult& b) { return a.p_err < b.p_err; });
  if (!std::isfinite(best->p_err)) throw std::runtime_error("optimal_id_bound: every start diverged");

  out.povm = best->povm;
  out.p_err_min = std::clamp(best->p_err, 0.0, 1.0);
  out.certified = certify(prob, helstrom, *best, opt);
  return out;
}

}  // namespace cohdisc
