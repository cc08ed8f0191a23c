#pragma once

#include <vector>

#include "lagmmse/sim.hpp"
#include "lagmmse/types.hpp"

namespace lagmmse::markov {

// Stationary distribution by power iteration to a 1e-12 fixed point.
// Throws ReducibleChain if the chain is not irreducible.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition);

// Attaches (or refreshes) the stationary field.
Dtmc with_stationary(Dtmc chain);

// Time reversal: P^R[i][j] = mu[j] P[j][i] / mu[i]. Same stationary law.
Dtmc reverse(const Dtmc& chain);

// One-step prediction variance sum_x mu(x) Var[P(. | x)].
double prediction_variance(const Dtmc& chain);

// Same with the k-step transition matrix; k = 0 gives 0.
double k_step_prediction_variance(const Dtmc& chain, int k);

// Closed-form lmmse at infinite SNR for the shifted piecewise-constant
// process: 0 for d >= 0, and for d < 0 the shift-probability mix of
// adjacent k-step prediction variances.
double lmmse_infinite_snr(const Dtmc& chain, double d);

// Integrated observation of one symbol sub-interval: given the symbol x,
// value ~ N(exposure * sqrt(snr) * x, exposure). exposure = 0 carries no
// information.
struct SymbolObservation {
  double exposure = 0.0;
  double snr = 1.0;
  double value = 0.0;
};

struct Posterior {
  std::vector<double> probs;
  double mean = 0.0;
  double variance = 0.0;
};

// Forward-backward posterior of the symbol at target_index given one
// observation list per window position. The window starts from the
// stationary law.
Posterior posterior_at(const Dtmc& chain,
                       const std::vector<std::vector<SymbolObservation>>& observations,
                       std::size_t target_index);

// Monte Carlo estimate of
//   h(g1, g2) = Var(X_0 | Y_(-hist)^(-1) fully exposed, Y_0(g1), Y_1(g2))
// with the target shifted by target_offset (0 estimates the current
// symbol, +1 the next). Defaults to posterior-variance averaging; the
// squared-residual estimator is kept behind a flag.
sim::McEstimate hmm_window_variance(const Dtmc& chain, double gamma1, double gamma2,
                                    int hist_len, const sim::McConfig& mc,
                                    double snr = 1.0, int target_offset = 0,
                                    bool squared_residual = false,
                                    std::uint64_t stream_salt = 0);

// lmmse(d) for d in (-1, 1) through the shift decomposition: Gauss-
// Legendre quadrature (16 nodes per segment) over the window-variance
// integrand, with Monte Carlo errors propagated through the weights.
sim::McEstimate lmmse_shifted(const Dtmc& chain, double d, int hist_len,
                              const sim::McConfig& mc, double snr = 1.0,
                              bool squared_residual = false);

// Empirical f(snr, gamma, d, l) for the shifted Markov process under the
// SNR-jump channel; exposures are split at the jump time.
sim::McEstimate jump_window_variance(const Dtmc& chain, double snr_past,
                                     double gamma_future, double d, double l,
                                     int hist_len, const sim::McConfig& mc);

struct Theorem2Row {
  double d = 0.0;
  double fwd = 0.0, fwd_se = 0.0;
  double rev = 0.0, rev_se = 0.0;
  double fwd_inf_snr = 0.0, rev_inf_snr = 0.0;
  bool significant = false;  // |fwd - rev| > 3 combined stderr
};

struct Theorem2Report {
  std::vector<Theorem2Row> rows;
  double var0 = 0.0;      // stationary variance, shared by construction
  double cmmse_fwd = 0.0, cmmse_fwd_se = 0.0;
  double cmmse_rev = 0.0, cmmse_rev_se = 0.0;
};

Theorem2Report theorem2_report(const Dtmc& chain, const std::vector<double>& d_grid,
                               int hist_len, const sim::McConfig& mc, double snr = 1.0);

}  // namespace lagmmse::markov
