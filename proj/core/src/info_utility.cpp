#include "lagmmse/info_utility.hpp"

#include <cmath>

#include "lagmmse/errors.hpp"
#include "lagmmse/numerics.hpp"
#include "lagmmse/ou_analytic.hpp"

namespace lagmmse::info {

using numerics::clamped_exp;

double e_hat_ou(const OuParams& params, double gamma, double t) {
  return ou::riccati_error(params, gamma, 0.0, t);
}

double utility_ou(const OuParams& params, double snr, double tau) {
  if (!(tau >= 0.0)) throw InvalidParameter("tau", "must be >= 0");
  const double rate = std::sqrt(params.alpha * params.alpha + snr * params.beta * params.beta);
  const double ratio = (rate + params.alpha) / (2.0 * rate);  // mmse/cmmse
  if (tau == kInf) return -0.5 * std::log(ratio);
  const double e = clamped_exp(-2.0 * rate * tau);
  return -0.5 * std::log(e + (1.0 - e) * ratio);
}

double utility_ou_integral(const OuParams& params, double snr, double tau, double abs_tol) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw InvalidParameter("tau", "integral route needs finite tau >= 0");
  }
  const double cm = ou::cmmse_ou(params, snr);
  const auto sol = ou::riccati_solution(params, snr, 0.0);
  const double integral = numerics::integrate(
      [&sol](double s) { return sol.error_at(s); }, 0.0, tau, abs_tol);
  return 0.5 * snr * (tau * cm - integral);
}

double utility_prime(const OuParams& params, double snr, double tau) {
  if (!(tau >= 0.0)) throw InvalidParameter("tau", "must be >= 0");
  const double cm = ou::cmmse_ou(params, snr);
  if (tau == kInf) return 0.0;
  return 0.5 * snr * (cm - e_hat_ou(params, snr, tau));
}

double lmmse_from_utility(const OuParams& params, double snr, double d) {
  if (!(d >= 0.0)) throw InvalidParameter("d", "must be >= 0");
  return ou::cmmse_ou(params, snr) * clamped_exp(-2.0 * utility_ou(params, snr, d));
}

InfoUtilityCurve utility_curve(const OuParams& params, double snr,
                               const std::vector<double>& tau_grid) {
  InfoUtilityCurve curve;
  curve.tau_grid = tau_grid;
  curve.u_values.reserve(tau_grid.size());
  curve.u_prime.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    curve.u_values.push_back(utility_ou(params, snr, tau));
    curve.u_prime.push_back(utility_prime(params, snr, tau));
  }
  const double cm = ou::cmmse_ou(params, snr);
  curve.u_prime0 = 0.5 * snr * cm;
  curve.mutual_info_rate = 0.5 * snr * cm;
  return curve;
}

bool entropy_power_check(const LmmseCurve& curve, double n_x0_given_past, double tol) {
  for (const auto& [d, value] : curve.points) {
    if (d < 0.0) continue;  // the utility bound is stated for lookahead
    if (!(value > 0.0)) return false;
    const double u = 0.5 * std::log(curve.cmmse / value);
    const double bound = n_x0_given_past * clamped_exp(-2.0 * u);
    if (value < bound - tol * std::max(1.0, std::abs(bound))) return false;
  }
  return true;
}

}  // namespace lagmmse::info
