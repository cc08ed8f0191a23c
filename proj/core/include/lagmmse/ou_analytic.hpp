#pragma once

#include "lagmmse/types.hpp"

namespace lagmmse::ou {

// Solution of the scalar filtering Riccati flow
//   de/dt = -2 alpha e - gamma e^2 + beta^2
// started from an arbitrary error e0 >= 0. Internally parameterized by
//   e_plus  = (tau - alpha)/gamma   (stable fixed point, the filtering error)
//   e_minus = -(tau + alpha)/gamma
//   w       = (e0 - e_plus)/(e0 - e_minus),  |w| < 1
// which is the signed generalization of the textbook constant rho = 1/w:
// rho > 1 when e0 starts above the fixed point, rho < -1 when below.
struct RiccatiSolution {
  double e0 = 0.0;
  double gamma = 0.0;
  double tau_rate = 0.0;  // sqrt(alpha^2 + gamma beta^2)
  double rho = 0.0;       // 1/w, signed

  double error_at(double t) const;   // e_t; t = +inf gives the fixed point
  double lambda_at(double t) const;  // (exp(2 t tau) rho + 1)/(exp(2 t tau) rho - 1)

  // kept for error_at; derived from the fields above at construction
  double e_plus = 0.0;
  double e_minus = 0.0;
};

RiccatiSolution riccati_solution(const OuParams& params, double gamma, double e0);

// e_t from e0 after time t; with e0 = beta^2/(2 alpha) this is the
// finite-window one-sided error e_d.
double riccati_error(const OuParams& params, double gamma, double e0, double t);

// Gauss-Markov fusion of two one-sided errors against the prior variance:
// 1/nu = 1/e_a + 1/e_b - 1/var0.
double fuse_errors(double e_a, double e_b, double var0);

// nu(l, d, gamma): error of estimating X_0 from observations on [-l, d].
// l and d may be +inf.
double finite_window_error(const OuParams& params, double l, double d, double gamma);

double cmmse_ou(const OuParams& params, double snr);
double mmse_ou(const OuParams& params, double snr);

// Finite-lookahead error, d an extended real (+-inf admitted).
double lmmse_ou(const OuParams& params, double snr, double d);

// Normalized convergence ratio p_d = (lmmse - mmse)/(cmmse - mmse)
// = exp(-2 d sqrt(alpha^2 + snr beta^2)) for d >= 0.
double pd_ratio(const OuParams& params, double snr, double d);

struct TradeoffResult {
  double gamma_star = 0.0;  // SNR matching cmmse(snr) at lookahead d
  double gamma_inf = 0.0;   // d -> inf limit
  double d_star = 0.0;      // vertical asymptote (negative)
};

// Solves lmmse(d, gamma_star) = cmmse(snr) by bracketed bisection.
// Throws NoSolution when d <= d_star.
TradeoffResult tradeoff(const OuParams& params, double snr, double d);

// lmmse of the time-scaled process X_{at}, computed directly as the lmmse
// of OU(a*alpha, sqrt(a)*beta) and cross-checked against
// lmmse_X(a d, snr/a); throws NumericalFailure if the two disagree.
double scaled_process_lmmse(const OuParams& params, double a, double snr, double d);

// Curve sampling helper shared by the CLI and tests.
LmmseCurve sample_curve(const OuParams& params, double snr, double d_min, double d_max,
                        int steps);

}  // namespace lagmmse::ou
