#include "lagmmse/types.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "lagmmse/errors.hpp"
#include "lagmmse/markov.hpp"
#include "lagmmse/numerics.hpp"
#include "lagmmse/spectral.hpp"

namespace lagmmse {

namespace {

void require_finite_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidParameter(name, "must be finite and > 0");
  }
}

void check(const OuParams& p) {
  require_finite_positive(p.alpha, "alpha");
  require_finite_positive(p.beta, "beta");
  if (p.mu != 0.0) throw InvalidParameter("mu", "process mean is fixed at 0");
}

void check(const MixingMeasure& m) {
  if (m.alphas.empty()) throw InvalidParameter("alphas", "mixture must be non-empty");
  if (m.alphas.size() != m.weights.size()) {
    throw InvalidParameter("weights", "must match alphas in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m.alphas.size(); ++i) {
    require_finite_positive(m.alphas[i], "alphas");
    require_finite_positive(m.weights[i], "weights");
    for (std::size_t j = 0; j < i; ++j) {
      if (m.alphas[i] == m.alphas[j]) {
        throw InvalidParameter("alphas", "components must be distinct");
      }
    }
    total += m.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidParameter("weights", "must sum to 1 within 1e-12");
  }
}

void check(const RationalSpectrum& r) {
  if (r.num_coeffs.empty() || r.den_coeffs.empty()) {
    throw InvalidParameter("num_coeffs", "polynomials must be non-empty");
  }
  if (r.num_coeffs.size() >= r.den_coeffs.size()) {
    throw InvalidParameter("num_coeffs", "numerator degree must be below denominator degree");
  }
  require_finite_positive(r.gain, "gain");
  // Non-negativity and pole placement are checked on a frequency grid;
  // root-level checks happen inside factorize_rational.
  for (int i = 0; i <= 512; ++i) {
    const double w = -50.0 + 100.0 * i / 512.0;
    const double den = spectral::eval_poly(r.den_coeffs, -w * w);
    if (den == 0.0) throw InvalidParameter("den_coeffs", "denominator vanishes on the real axis");
    const double s = r.gain * spectral::eval_poly(r.num_coeffs, -w * w) / den;
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw InvalidParameter("num_coeffs", "spectrum must be non-negative on the real axis");
    }
  }
}

void check(const TabulatedSpectrum& t) {
  if (t.omega_grid.size() != t.s_values.size() || t.omega_grid.size() < 4) {
    throw InvalidParameter("omega_grid", "need matching grids with at least 4 samples");
  }
  const double step = t.omega_grid[1] - t.omega_grid[0];
  if (step <= 0.0) throw InvalidParameter("omega_grid", "must be strictly increasing");
  for (std::size_t i = 1; i < t.omega_grid.size(); ++i) {
    const double d = t.omega_grid[i] - t.omega_grid[i - 1];
    if (std::abs(d - step) > 1e-9 * std::abs(step)) {
      throw InvalidParameter("omega_grid", "must be uniform");
    }
  }
  for (double v : t.s_values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidParameter("s_values", "spectrum samples must be non-negative");
    }
  }
}

void check_rows(const Dtmc& c) {
  const std::size_t n = c.values.size();
  if (n < 2) throw InvalidParameter("values", "alphabet needs at least 2 symbols");
  if (c.transition.size() != n) {
    throw InvalidParameter("transition", "must be square and match the alphabet");
  }
  for (const auto& row : c.transition) {
    if (row.size() != n) throw InvalidParameter("transition", "must be square");
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InvalidParameter("transition", "entries must be non-negative");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw InvalidParameter("transition", "rows must sum to 1 within 1e-12");
    }
  }
}

}  // namespace

ValidatedSpec validate(ProcessSpec spec) {
  std::visit([](auto& v) {
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, Dtmc>) {
      check_rows(v);
    } else {
      check(v);
    }
  }, spec);
  // Markov specs get their stationary distribution attached here so later
  // consumers can rely on it being present and consistent.
  if (auto* chain = std::get_if<Dtmc>(&spec)) {
    chain->stationary = markov::stationary_distribution(chain->transition);
  }
  return ValidatedSpec(std::move(spec));
}

double stationary_variance(const ValidatedSpec& spec) {
  const ProcessSpec& s = spec.get();
  if (const auto* ou = std::get_if<OuParams>(&s)) {
    return ou->beta * ou->beta / (2.0 * ou->alpha);
  }
  if (const auto* mix = std::get_if<MixingMeasure>(&s)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mix->alphas.size(); ++i) {
      acc += mix->weights[i] / (2.0 * mix->alphas[i]);
    }
    return acc;
  }
  if (const auto* rat = std::get_if<RationalSpectrum>(&s)) {
    return spectral::spectrum_integral(*rat);
  }
  if (const auto* tab = std::get_if<TabulatedSpectrum>(&s)) {
    return spectral::spectrum_integral(*tab);
  }
  const auto& chain = std::get<Dtmc>(s);
  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < chain.values.size(); ++i) {
    mean += chain.stationary[i] * chain.values[i];
    second += chain.stationary[i] * chain.values[i] * chain.values[i];
  }
  return second - mean * mean;
}

bool curve_is_consistent(const LmmseCurve& curve, double tol) {
  double prev = kInf;
  for (const auto& [d, v] : curve.points) {
    if (v > prev + tol) return false;
    if (v < curve.mmse - tol || v > curve.var0 + tol) return false;
    prev = v;
  }
  return true;
}

}  // namespace lagmmse
