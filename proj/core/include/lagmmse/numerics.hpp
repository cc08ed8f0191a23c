#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace lagmmse::numerics {

// exp with the argument clamped to +-700 so curve evaluations at extreme
// lookahead never overflow; beyond the clamp the true value is 0 or inf
// to double precision anyway.
inline double clamped_exp(double x) {
  if (x > 700.0) x = 700.0;
  if (x < -700.0) x = -700.0;
  return std::exp(x);
}

// Bisection on [lo, hi]; f(lo) and f(hi) must bracket a sign change.
// Stops when |f(mid)| <= residual_tol or after max_iter halvings.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double residual_tol = 1e-12, int max_iter = 200);

struct GaussLegendreRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // sum to 2
};

// n-point Gauss-Legendre rule; nodes by Newton iteration on P_n.
const GaussLegendreRule& gauss_legendre(int n);

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

// Adaptive Gauss-Kronrod (G7/K15) to absolute tolerance abs_tol.
// Throws QuadratureFailure if the interval budget is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, int max_intervals = 4000);

// Integral over the whole real line via the substitution w = t/(1-t^2).
double integrate_real_line(const std::function<double(double)>& f,
                           double abs_tol = 1e-10);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;  // sum of squared residuals
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct Mean {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

// Sample mean and standard error of the mean.
Mean mean_stderr(std::span<const double> samples);

}  // namespace lagmmse::numerics
