#include "lagmmse/numerics.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>

#include "lagmmse/errors.hpp"

namespace lagmmse::numerics {

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double residual_tol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw RootFindingFailure("bisect: endpoints do not bracket a sign change");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < max_iter; ++i) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= residual_tol) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return mid;
}

namespace {

GaussLegendreRule compute_gl(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Roots of P_n via Newton from the Chebyshev-based initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw InvalidParameter("n", "Gauss-Legendre order must be >= 1");
  static std::mutex mu;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const auto& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

namespace {

// Kronrod 15-point nodes/weights with the embedded Gauss 7 rule.
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Segment {
  double a, b, value, error;
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double fc = f(mid);
  double resk = kKronrodWeights[7] * fc;
  double resg = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double fsum = f(mid - dx) + f(mid + dx);
    resk += kKronrodWeights[i] * fsum;
    if (i % 2 == 1) resg += kGaussWeights[i / 2] * fsum;  // Gauss-7 subset
  }
  Segment s;
  s.a = a;
  s.b = b;
  s.value = resk * half;
  s.error = std::abs((resk - resg) * half);
  return s;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_intervals) {
  if (a == b) return 0.0;
  std::vector<Segment> segs{gk15(f, a, b)};
  for (int iter = 0; iter < max_intervals; ++iter) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].value;
      err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    if (err <= abs_tol) return total;
    const Segment w = segs[worst];
    const double m = 0.5 * (w.a + w.b);
    if (m == w.a || m == w.b) {
      throw QuadratureFailure("integrate: interval collapsed before reaching tolerance");
    }
    segs[worst] = gk15(f, w.a, m);
    segs.push_back(gk15(f, m, w.b));
  }
  throw QuadratureFailure("integrate: interval budget exhausted");
}

double integrate_real_line(const std::function<double(double)>& f, double abs_tol) {
  // w = t/(1-t^2) maps (-1,1) onto the real line; dw = (1+t^2)/(1-t^2)^2 dt.
  auto g = [&f](double t) {
    const double om = 1.0 - t * t;
    const double w = t / om;
    const double jac = (1.0 + t * t) / (om * om);
    return f(w) * jac;
  };
  // Stay eps inside the endpoints; the transformed integrand of an
  // integrable spectrum tends to a finite limit there.
  const double eps = 1e-12;
  return integrate(g, -1.0 + eps, 1.0 - eps, abs_tol);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InsufficientData("fit_line: need at least two points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InsufficientData("fit_line: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.sse += r * r;
  }
  return fit;
}

Mean mean_stderr(std::span<const double> samples) {
  Mean m;
  m.count = samples.size();
  if (samples.empty()) return m;
  double acc = 0.0;
  for (double s : samples) acc += s;
  m.value = acc / static_cast<double>(samples.size());
  if (samples.size() < 2) return m;
  double ss = 0.0;
  for (double s : samples) {
    const double d = s - m.value;
    ss += d * d;
  }
  const auto n = static_cast<double>(samples.size());
  m.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  return m;
}

}  // namespace lagmmse::numerics
