// Fundamental discrimination limits: the generalized-Gaussian receiver
// family, the Helstrom (minimum error) and unambiguous endpoints, and a
// numerical oracle for the optimal intermediate measurement.
#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "cohdisc/signal.hpp"

namespace cohdisc {

/// Displaced-squeezed-state POVM with squeezing r e^{i phi}, followed by a
/// Bayesian decision with likelihood threshold Lambda_B.
struct GaussianMeasurementParams {
  double squeezing = 0.0;
  double squeezing_phase = 0.0;
  double likelihood_threshold = 1.0;
};

/// Effective signal weight of the Gaussian POVM:
/// (1 + cosh 2r + sinh 2r cos phi) / (2 (cosh 2r + 1)).
/// Equals 1/2 without squeezing and tends to 1 (x-quadrature homodyne) as r -> inf at phi = 0.
double gaussian_a(double squeezing, double squeezing_phase);

DiscriminationResult gaussian_receiver_rates(const SignalEnsemble& ensemble,
                                             const GaussianMeasurementParams& params);

/// Same family, addressed directly by the weight a in [0, 1].
DiscriminationResult gaussian_receiver_rates_for_weight(const SignalEnsemble& ensemble, double a,
                                                        double likelihood_threshold);

/// Minimum average error over all two-outcome measurements.
double helstrom_bound(const SignalEnsemble& ensemble);

struct UsdPoint {
  double p_inc = 1.0;
  double p_err = 0.0;
};

/// Optimal unambiguous discrimination; equal priors only.
UsdPoint usd_bound(const SignalEnsemble& ensemble);

struct IdOracleOptions {
  /// Hilbert-space dimension the POVM lives in; 2 is the span of the two
  /// signals, 3 adds one orthogonal direction.
  int dimension = 2;
  int starts = 16;
  std::uint64_t seed = 0x5eed'c0de'2010ULL;
  int certification_samples = 256;
  double certification_step = 1e-4;
  double certification_slack = 1e-7;
  bool parallel = true;
};

/// Optimal error for a prescribed inconclusive rate, with the POVM that attains it.
struct IdBoundPoint {
  double p_inc = 0.0;
  double p_err_min = 0.0;
  /// Elements in the order {guess minus, guess plus, inconclusive}, expressed
  /// in the orthonormal basis e1 = |+alpha>, e2 = (|-alpha> - o|+alpha>)/sqrt(1 - o^2).
  std::array<Eigen::MatrixXd, 3> povm;
  bool certified = false;
  bool error_defined = true;
};

/// Signal vectors (minus, plus) in the basis used by IdBoundPoint::povm,
/// zero-padded to `dimension`.
std::array<Eigen::VectorXd, 2> span_basis_states(const SignalEnsemble& ensemble, int dimension = 2);

/// Smallest inconclusive rate compatible with zero error, for any priors.
double unambiguous_min_inconclusive(const SignalEnsemble& ensemble);

/// Minimizes the conditional error over all three-outcome POVMs whose
/// inconclusive probability equals p_inc_target. Throws std::domain_error
/// when the target exceeds the unambiguous-discrimination rate.
IdBoundPoint optimal_id_bound(const SignalEnsemble& ensemble, double p_inc_target,
                              const IdOracleOptions& options = {});

}  // namespace cohdisc
