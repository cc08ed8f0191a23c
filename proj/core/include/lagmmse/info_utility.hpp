#pragma once

#include <vector>

#include "lagmmse/types.hpp"

namespace lagmmse::info {

// Var(X_t | Y_0^t, X_0): the Riccati flow started from 0 instead of the
// stationary variance. Equals riccati_error(params, gamma, 0, t).
double e_hat_ou(const OuParams& params, double gamma, double t);

// Information utility U(tau) = I(X_0; Y_0^tau | Y_-inf^0) in nats,
// closed form. tau = +inf gives (1/2) log(cmmse/mmse).
double utility_ou(const OuParams& params, double snr, double tau);

// Same quantity through the integral route
//   U(tau) = (snr/2) [tau cmmse - int_0^tau e_hat ds]
// by adaptive quadrature; used to cross-check the closed form.
double utility_ou_integral(const OuParams& params, double snr, double tau,
                           double abs_tol = 1e-10);

// U'(tau) = (snr/2) (cmmse - e_hat(tau)).
double utility_prime(const OuParams& params, double snr, double tau);

// cmmse * exp(-2 U(d)); reproduces the d >= 0 branch of the lookahead
// closed form.
double lmmse_from_utility(const OuParams& params, double snr, double d);

struct InfoUtilityCurve {
  std::vector<double> tau_grid;
  std::vector<double> u_values;        // nats
  std::vector<double> u_prime;         // nats per unit time
  double u_prime0 = 0.0;               // (snr/2) cmmse
  double mutual_info_rate = 0.0;       // I(snr) = snr cmmse / 2
};

InfoUtilityCurve utility_curve(const OuParams& params, double snr,
                               const std::vector<double>& tau_grid);

// Pointwise check of lmmse(d) >= N exp(-2 U(d)) on the curve's own grid,
// with U(d) = (1/2) log(cmmse / lmmse(d)) taken from the curve. For a
// Gaussian input and N = cmmse both sides coincide.
bool entropy_power_check(const LmmseCurve& curve, double n_x0_given_past,
                         double tol = 1e-9);

}  // namespace lagmmse::info
