#pragma once

#include <cstdint>
#include <vector>

#include "lagmmse/rng.hpp"
#include "lagmmse/types.hpp"

namespace lagmmse::sim {

struct McConfig {
  std::uint64_t seed = 1;
  std::size_t paths = 1000;
  double step = 1e-3;          // discretization step of the oracle
  double target_stderr = 0.0;  // 0 disables the budget check
  std::size_t sample_cap = 0;  // 0 = derived from paths
};

struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// Exact AR(1) discretization of the OU law plus the integrated observation
// increment z_k = obs_gain x_k + N(0, obs_noise). Left-endpoint integration
// of the observation is the O(step) error source of the oracle.
struct DiscreteKalmanModel {
  double ar_coeff = 0.0;    // exp(-alpha step)
  double proc_noise = 0.0;  // beta^2 (1 - exp(-2 alpha step)) / (2 alpha)
  double obs_gain = 0.0;    // sqrt(snr) step
  double obs_noise = 0.0;   // step
};

DiscreteKalmanModel discretize(const OuParams& params, double snr, double step);

struct OuPath {
  double step = 0.0;
  std::vector<double> x;  // signal
  std::vector<double> y;  // observation increments
};

// Stationary-start exact simulation; observations at the path's snr.
OuPath simulate_ou(const OuParams& params, double snr, double step, std::size_t steps,
                   PhiloxStream& rng);

// Deterministic error-variance recursions of the discrete model (the
// matched Kalman variance is data independent).
double filter_variance_steady(const DiscreteKalmanModel& model);
double fixed_lag_variance(const DiscreteKalmanModel& model, std::size_t lag_steps);

// Squared fixed-lag smoother errors along one path, sampled every `stride`
// steps after `burn` steps. `model` may differ from the model that
// generated the path (mismatched estimation).
std::vector<double> kalman_fixed_lag_errors(const DiscreteKalmanModel& model,
                                            const OuPath& path, std::size_t lag_steps,
                                            std::size_t burn, std::size_t stride);

// Monte Carlo fixed-lag MSE across mc.paths independent paths; the
// estimator's model is `assumed` while paths follow `truth`. d = +inf is
// realized as a lag long enough for the smoother to have converged.
// Throws McBudgetExceeded if target_stderr is set and unmet at the cap.
McEstimate fixed_lag_mse(const OuParams& truth, const OuParams& assumed, double snr,
                         double d, const McConfig& mc);

// One squared error sample per path of Var(X_d | Y_(-inf)^(d+l)) under the
// SNR-jump channel (level snr_past for t <= 0, gamma_future after).
McEstimate jump_error_mc(const OuParams& params, double snr_past, double gamma_future,
                         double d, double l, const McConfig& mc);

// Same observation model, but the input is an OU mixture: a component is
// drawn per path and the estimator runs a Bayesian filter bank over the
// components.
McEstimate jump_error_mc_mixture(const MixingMeasure& mix, double snr_past,
                                 double gamma_future, double d, double l,
                                 const McConfig& mc);

}  // namespace lagmmse::sim
