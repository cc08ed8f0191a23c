#include "lagmmse/ou_analytic.hpp"

#include <cmath>

#include "lagmmse/errors.hpp"
#include "lagmmse/numerics.hpp"

namespace lagmmse::ou {

using numerics::clamped_exp;

namespace {

void require_ou(const OuParams& p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) {
    throw InvalidParameter("alpha", "must be finite and > 0");
  }
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    throw InvalidParameter("beta", "must be finite and > 0");
  }
}

void require_snr(double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw InvalidParameter("snr", "must be finite and > 0");
  }
}

double var0_of(const OuParams& p) { return p.beta * p.beta / (2.0 * p.alpha); }

}  // namespace

double RiccatiSolution::error_at(double t) const {
  if (t == kInf) return e_plus;
  const double w = (rho == kInf) ? 0.0 : 1.0 / rho;
  const double decay = clamped_exp(-2.0 * tau_rate * t);
  const double we = w * decay;
  return (e_plus - e_minus * we) / (1.0 - we);
}

double RiccatiSolution::lambda_at(double t) const {
  const double grow = clamped_exp(2.0 * tau_rate * t);
  return (grow * rho + 1.0) / (grow * rho - 1.0);
}

RiccatiSolution riccati_solution(const OuParams& params, double gamma, double e0) {
  require_ou(params);
  require_snr(gamma);
  if (!(e0 >= 0.0) || !std::isfinite(e0)) {
    throw InvalidParameter("e0", "must be finite and >= 0");
  }
  RiccatiSolution sol;
  sol.e0 = e0;
  sol.gamma = gamma;
  const double b2 = params.beta * params.beta;
  sol.tau_rate = std::sqrt(params.alpha * params.alpha + gamma * b2);
  // Rationalized so that gamma -> 0 stays well conditioned.
  sol.e_plus = b2 / (sol.tau_rate + params.alpha);
  sol.e_minus = -(sol.tau_rate + params.alpha) / gamma;
  const double w = (e0 - sol.e_plus) / (e0 - sol.e_minus);
  sol.rho = (w == 0.0) ? kInf : 1.0 / w;
  return sol;
}

double riccati_error(const OuParams& params, double gamma, double e0, double t) {
  if (!(t >= 0.0)) throw InvalidParameter("t", "must be >= 0");
  return riccati_solution(params, gamma, e0).error_at(t);
}

double fuse_errors(double e_a, double e_b, double var0) {
  return e_a * e_b * var0 / (var0 * (e_a + e_b) - e_a * e_b);
}

double finite_window_error(const OuParams& params, double l, double d, double gamma) {
  require_ou(params);
  require_snr(gamma);
  if (!(l >= 0.0) || !(d >= 0.0)) throw InvalidParameter("l", "window lengths must be >= 0");
  const double var0 = var0_of(params);
  const RiccatiSolution from_prior = riccati_solution(params, gamma, var0);
  const double e_l = from_prior.error_at(l);
  const double e_d = from_prior.error_at(d);
  return fuse_errors(e_l, e_d, var0);
}

double cmmse_ou(const OuParams& params, double snr) {
  require_ou(params);
  require_snr(snr);
  const double b2 = params.beta * params.beta;
  const double tau = std::sqrt(params.alpha * params.alpha + snr * b2);
  return b2 / (tau + params.alpha);  // == (tau - alpha)/snr
}

double mmse_ou(const OuParams& params, double snr) {
  require_ou(params);
  require_snr(snr);
  const double b2 = params.beta * params.beta;
  return b2 / (2.0 * std::sqrt(params.alpha * params.alpha + snr * b2));
}

double lmmse_ou(const OuParams& params, double snr, double d) {
  require_ou(params);
  require_snr(snr);
  const double var0 = var0_of(params);
  if (d == kInf) return mmse_ou(params, snr);
  if (d == -kInf) return var0;
  if (d >= 0.0) {
    const double tau = std::sqrt(params.alpha * params.alpha + snr * params.beta * params.beta);
    const double e = clamped_exp(-2.0 * d * tau);
    return (1.0 - e) * mmse_ou(params, snr) + e * cmmse_ou(params, snr);
  }
  const double e = clamped_exp(-2.0 * params.alpha * std::abs(d));
  return e * cmmse_ou(params, snr) + var0 * (1.0 - e);
}

double pd_ratio(const OuParams& params, double snr, double d) {
  require_ou(params);
  require_snr(snr);
  if (!(d >= 0.0)) throw InvalidParameter("d", "must be >= 0");
  const double cm = cmmse_ou(params, snr);
  const double mm = mmse_ou(params, snr);
  if (cm <= mm) throw DegenerateCase("pd_ratio: cmmse equals mmse");
  const double tau = std::sqrt(params.alpha * params.alpha + snr * params.beta * params.beta);
  return clamped_exp(-2.0 * d * tau);
}

TradeoffResult tradeoff(const OuParams& params, double snr, double d) {
  require_ou(params);
  require_snr(snr);
  TradeoffResult out;
  const double target = cmmse_ou(params, snr);
  const double var0 = var0_of(params);
  const double b2 = params.beta * params.beta;

  // mmse(gamma_inf) = cmmse(snr) solved in closed form.
  out.gamma_inf = (b2 * b2 / (4.0 * target * target) - params.alpha * params.alpha) / b2;

  // Var(X_0 | X_{d*}) = cmmse(snr) pins the prediction asymptote.
  out.d_star = std::log(1.0 - target / var0) / (2.0 * params.alpha);

  if (d == 0.0) {
    out.gamma_star = snr;
    return out;
  }
  auto residual = [&](double gamma) { return lmmse_ou(params, gamma, d) - target; };
  if (d > 0.0) {
    const double lo = out.gamma_inf * (1.0 + 1e-14) + 1e-300;
    out.gamma_star = numerics::bisect(residual, lo, snr);
    return out;
  }
  if (d <= out.d_star) {
    throw NoSolution("tradeoff: no gamma matches cmmse at or beyond the asymptote d*");
  }
  double hi = snr;
  for (int i = 0; i < 400 && residual(hi) > 0.0; ++i) hi *= 2.0;
  out.gamma_star = numerics::bisect(residual, snr, hi);
  return out;
}

double scaled_process_lmmse(const OuParams& params, double a, double snr, double d) {
  require_ou(params);
  require_snr(snr);
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidParameter("a", "must be finite and > 0");
  const OuParams scaled{params.alpha * a, params.beta * std::sqrt(a), 0.0};
  const double direct = lmmse_ou(scaled, snr, d);
  const double via_identity = lmmse_ou(params, snr / a, a * d);
  const double scale = std::max({1.0, std::abs(direct), std::abs(via_identity)});
  if (std::abs(direct - via_identity) > 1e-10 * scale) {
    throw NumericalFailure("scaled_process_lmmse: scaling identity violated");
  }
  return direct;
}

LmmseCurve sample_curve(const OuParams& params, double snr, double d_min, double d_max,
                        int steps) {
  if (steps < 1) throw InvalidParameter("steps", "must be >= 1");
  LmmseCurve curve;
  curve.cmmse = cmmse_ou(params, snr);
  curve.mmse = mmse_ou(params, snr);
  curve.var0 = var0_of(params);
  curve.points.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double d = d_min + (d_max - d_min) * i / steps;
    curve.points.emplace_back(d, lmmse_ou(params, snr, d));
  }
  return curve;
}

}  // namespace lagmmse::ou
