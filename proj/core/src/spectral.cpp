#include "lagmmse/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "lagmmse/errors.hpp"
#include "lagmmse/numerics.hpp"

namespace lagmmse::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(z) with the real part clamped; avoids overflow at extreme lookahead.
Complex cexp_clamped(Complex z) {
  double re = z.real();
  if (re > 700.0) re = 700.0;
  if (re < -700.0) return {0.0, 0.0};
  return std::exp(Complex{re, z.imag()});
}

std::span<const double> trimmed(std::span<const double> coeffs) {
  std::size_t n = coeffs.size();
  while (n > 1 && coeffs[n - 1] == 0.0) --n;
  return coeffs.subspan(0, n);
}

}  // namespace

double eval_poly(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

Complex eval_poly(std::span<const double> coeffs, Complex x) {
  Complex acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

std::vector<Complex> poly_roots(std::span<const double> coeffs_in) {
  const auto coeffs = trimmed(coeffs_in);
  const std::size_t deg = coeffs.size() - 1;
  if (deg == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<long>(deg),
                                                    static_cast<long>(deg));
  const double lead = coeffs[deg];
  for (std::size_t i = 0; i < deg; ++i) {
    companion(static_cast<long>(i), static_cast<long>(deg) - 1) = -coeffs[i] / lead;
    if (i + 1 < deg) companion(static_cast<long>(i) + 1, static_cast<long>(i)) = 1.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  std::vector<Complex> roots;
  roots.reserve(deg);
  double scale = 0.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  for (long i = 0; i < static_cast<long>(deg); ++i) {
    Complex r{solver.eigenvalues()(i).real(), solver.eigenvalues()(i).imag()};
    // One Newton step against the original polynomial.
    for (int it = 0; it < 2; ++it) {
      Complex f = 0.0, fp = 0.0;
      for (std::size_t k = coeffs.size(); k-- > 0;) {
        fp = fp * r + f;
        f = f * r + coeffs[k];
      }
      if (std::abs(fp) == 0.0) break;
      r -= f / fp;
    }
    const double residual = std::abs(eval_poly(coeffs, r));
    const double local_scale = scale * std::max(1.0, std::pow(std::abs(r), double(deg)));
    if (residual > 1e-9 * local_scale) {
      throw RootFindingFailure("poly_roots: Newton polish left a large residual");
    }
    roots.push_back(r);
  }
  return roots;
}

double eval_rational(const RationalSpectrum& sx, double omega) {
  const double x = -omega * omega;
  return sx.gain * eval_poly(sx.num_coeffs, x) / eval_poly(sx.den_coeffs, x);
}

double eval_tabulated(const TabulatedSpectrum& sx, double omega) {
  const auto& grid = sx.omega_grid;
  if (omega < grid.front() || omega > grid.back()) return 0.0;
  const double step = grid[1] - grid[0];
  const auto idx = static_cast<std::size_t>((omega - grid.front()) / step);
  if (idx + 1 >= grid.size()) return sx.s_values.back();
  const double frac = (omega - grid[idx]) / step;
  return sx.s_values[idx] * (1.0 - frac) + sx.s_values[idx + 1] * frac;
}

double spectrum_integral(const RationalSpectrum& sx) {
  return numerics::integrate_real_line(
      [&sx](double w) { return eval_rational(sx, w); }, 1e-10) / kTwoPi;
}

double spectrum_integral(const TabulatedSpectrum& sx) {
  double peak = 0.0;
  for (double v : sx.s_values) peak = std::max(peak, v);
  if (peak > 0.0 &&
      std::max(sx.s_values.front(), sx.s_values.back()) > 0.05 * peak) {
    throw NumericalFailure(
        "spectrum_integral: tabulated spectrum has not decayed at the grid edge");
  }
  const double step = sx.omega_grid[1] - sx.omega_grid[0];
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < sx.s_values.size(); ++i) {
    acc += 0.5 * (sx.s_values[i] + sx.s_values[i + 1]) * step;
  }
  return acc / kTwoPi;
}

Complex FactoredSpectrum::eval_plus(Complex s) const {
  Complex acc{gain, 0.0};
  for (const Complex& z : plus_zeros) acc *= (s - z);
  for (const Complex& p : plus_poles) acc /= (s - p);
  return acc;
}

namespace {

// Square roots of the x-roots of a polynomial in x = s^2, taken with
// positive real part. Rejects roots near the imaginary axis.
std::vector<Complex> half_plane_roots(std::span<const double> coeffs, const char* what) {
  std::vector<Complex> out;
  for (const Complex& x : poly_roots(coeffs)) {
    Complex p = std::sqrt(x);
    if (p.real() < 0.0) p = -p;
    const double scale = std::max(1.0, std::abs(p));
    if (std::abs(p.real()) < 1e-9 * scale) {
      throw MarginalRoot(std::string("factorize_rational: ") + what +
                         " root lies on the imaginary axis");
    }
    out.push_back(p);
  }
  return out;
}

std::vector<double> scaled(std::span<const double> coeffs, double factor) {
  std::vector<double> out(coeffs.begin(), coeffs.end());
  for (double& c : out) c *= factor;
  return out;
}

std::vector<double> added(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

double leading(std::span<const double> coeffs) {
  const auto t = trimmed(coeffs);
  return t[t.size() - 1];
}

}  // namespace

FactoredSpectrum factorize_rational(const RationalSpectrum& sx, double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw InvalidParameter("snr", "must be finite and > 0");
  }
  // S_Y = (den + snr*gain*num) / den, everything a polynomial in x = s^2.
  const std::vector<double> sy_num =
      added(sx.den_coeffs, scaled(sx.num_coeffs, snr * sx.gain));

  FactoredSpectrum fact;
  for (const Complex& p : half_plane_roots(sy_num, "numerator")) {
    fact.plus_zeros.push_back(-p);
  }
  for (const Complex& q : half_plane_roots(sx.den_coeffs, "denominator")) {
    fact.plus_poles.push_back(-q);
  }
  const double ratio = leading(sy_num) / leading(sx.den_coeffs);
  if (!(ratio > 0.0)) {
    throw RootFindingFailure("factorize_rational: leading coefficient ratio not positive");
  }
  fact.gain = std::sqrt(ratio);

  // Verify |S_Y+(jw)|^2 == S_Y(jw) on a grid spanning the pole/zero scales.
  double span = 1.0;
  for (const Complex& z : fact.plus_zeros) span = std::max(span, std::abs(z));
  for (const Complex& p : fact.plus_poles) span = std::max(span, std::abs(p));
  const double wmax = 8.0 * span;
  for (int i = 0; i <= 1024; ++i) {
    const double w = -wmax + 2.0 * wmax * i / 1024.0;
    const double sy = 1.0 + snr * eval_rational(sx, w);
    const double rebuilt = std::norm(fact.eval_plus(Complex{0.0, w}));
    if (std::abs(rebuilt - sy) > 1e-9 * std::max(1.0, std::abs(sy))) {
      throw RootFindingFailure("factorize_rational: |S_Y+|^2 does not reproduce S_Y");
    }
  }
  return fact;
}

Complex PartialFractionExpansion::eval(Complex s) const {
  Complex acc = 0.0;
  for (const PfeTerm& t : anticausal_terms) acc += t.residue / (s - t.pole);
  for (const PfeTerm& t : causal_terms) acc += t.residue / (s - t.pole);
  return acc;
}

namespace {

// Sum over ordered pairs of residue products against pole sums:
//   sum_{i,k} r_i r_k exp(sgn*(p_i+p_k)*d) / (p_i + p_k).
// With d = 0 this is the tail energy of the corresponding half of h.
double pair_energy(const std::vector<PfeTerm>& terms, double d, double sgn) {
  Complex acc = 0.0;
  for (const PfeTerm& a : terms) {
    for (const PfeTerm& b : terms) {
      const Complex psum = a.pole + b.pole;
      acc += a.residue * b.residue / psum * cexp_clamped(sgn * psum * d);
    }
  }
  return acc.real();
}

}  // namespace

PartialFractionExpansion wiener_transfer(const RationalSpectrum& sx,
                                         const FactoredSpectrum& fact, double snr) {
  // H(s) = A P(s^2) / [ prod_i (s - p_i) prod_j (s - pi_j) ] with
  // p_i the right-half-plane mirrors of the stored zeros, pi_j the stored
  // poles, and A = sqrt(snr) gain_x / (c_den * fact.gain).
  std::vector<Complex> all_poles;
  for (const Complex& z : fact.plus_zeros) all_poles.push_back(-z);  // Re > 0
  for (const Complex& p : fact.plus_poles) all_poles.push_back(p);   // Re < 0

  double scale = 0.0;
  for (const Complex& p : all_poles) scale = std::max(scale, std::abs(p));
  for (std::size_t i = 0; i < all_poles.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(all_poles[i] - all_poles[j]) < 1e-9 * std::max(1.0, scale)) {
        throw RepeatedPole("wiener_transfer: repeated pole in H(s)");
      }
    }
  }

  const double amp = std::sqrt(snr) * sx.gain / (leading(sx.den_coeffs) * fact.gain);
  PartialFractionExpansion pfe;
  const std::size_t n_anti = fact.plus_zeros.size();
  for (std::size_t i = 0; i < all_poles.size(); ++i) {
    const Complex pole = all_poles[i];
    Complex denom = 1.0;
    for (std::size_t j = 0; j < all_poles.size(); ++j) {
      if (j != i) denom *= (pole - all_poles[j]);
    }
    const PfeTerm term{pole, amp * eval_poly(sx.num_coeffs, pole * pole) / denom};
    if (i < n_anti) {
      pfe.anticausal_terms.push_back(term);
    } else {
      pfe.causal_terms.push_back(term);
    }
  }

  pfe.anticausal_energy = pair_energy(pfe.anticausal_terms, 0.0, 1.0);
  pfe.constant_c = pfe.anticausal_energy + pair_energy(pfe.causal_terms, 0.0, 1.0);

  // Residue reassembly must reproduce H on a grid.
  for (int i = 0; i <= 64; ++i) {
    const double w = -4.0 * std::max(1.0, scale) + 8.0 * std::max(1.0, scale) * i / 64.0;
    const Complex s{0.0, w};
    Complex direct{amp * eval_poly(sx.num_coeffs, s * s), 0.0};
    for (const Complex& p : all_poles) direct /= (s - p);
    if (std::abs(direct - pfe.eval(s)) > 1e-9 * std::max(1.0, std::abs(direct))) {
      throw NumericalFailure("wiener_transfer: partial fractions do not reassemble H");
    }
  }
  return pfe;
}

double lmmse_rational(const PartialFractionExpansion& pfe, double mmse, double d) {
  if (d == kInf) return mmse;
  if (d >= 0.0) {
    // Anticausal tail only: sum u_i u_k exp(-(p_i+p_k) d) / (p_i+p_k).
    return mmse + pair_energy(pfe.anticausal_terms, d, -1.0);
  }
  // d < 0 (including -inf): the full anticausal energy plus the causal
  // energy not yet uncovered. Causal poles have Re < 0, so the decaying
  // factor is exp(+(q_j+q_m) |d|) written through the stored poles.
  const double shrinking =
      (d == -kInf) ? 0.0 : pair_energy(pfe.causal_terms, std::abs(d), 1.0);
  return mmse + pfe.constant_c - shrinking;
}

double wiener_mmse(const RationalSpectrum& sx, double snr, double abs_tol) {
  return numerics::integrate_real_line(
             [&](double w) {
               const double s = eval_rational(sx, w);
               return s / (1.0 + snr * s);
             },
             abs_tol) /
         kTwoPi;
}

double wiener_mmse(const TabulatedSpectrum& sx, double snr) {
  const double step = sx.omega_grid[1] - sx.omega_grid[0];
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < sx.s_values.size(); ++i) {
    const double f0 = sx.s_values[i] / (1.0 + snr * sx.s_values[i]);
    const double f1 = sx.s_values[i + 1] / (1.0 + snr * sx.s_values[i + 1]);
    acc += 0.5 * (f0 + f1) * step;
  }
  return acc / kTwoPi;
}

double two_ou_closed_form(double alpha1, double alpha2, double snr, double d) {
  if (alpha1 == alpha2) throw InvalidParameter("alpha2", "components must be distinct");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) {
    throw InvalidParameter("alpha1", "components must be positive");
  }
  const double a1 = alpha1 * alpha1, a2 = alpha2 * alpha2;
  const double sum = a1 + a2;
  // k(x) = x^2 - (a1 + a2 + snr) x + snr*(a1+a2)/2 + a1 a2, roots by the
  // quadratic formula (independent of the companion-matrix path).
  const double b = sum + snr;
  const double c = 0.5 * snr * sum + a1 * a2;
  const double disc = std::sqrt(b * b - 4.0 * c);
  const double p1 = std::sqrt(0.5 * (b + disc));
  const double p2 = std::sqrt(0.5 * (b - disc));

  const double root_snr = std::sqrt(snr);
  auto numerator = [&](double s) { return root_snr * (0.5 * sum - s * s); };
  const double u1 = numerator(p1) / ((p1 - p2) * (p1 + alpha1) * (p1 + alpha2));
  const double u2 = numerator(p2) / ((p2 - p1) * (p2 + alpha1) * (p2 + alpha2));
  const double v1 = numerator(-alpha1) / ((-alpha1 - p1) * (-alpha1 - p2) * (alpha2 - alpha1));
  const double v2 = numerator(-alpha2) / ((-alpha2 - p1) * (-alpha2 - p2) * (alpha1 - alpha2));

  const double mm = numerics::integrate_real_line(
                        [&](double w) {
                          const double s =
                              0.5 / (a1 + w * w) + 0.5 / (a2 + w * w);
                          return s / (1.0 + snr * s);
                        },
                        1e-11) /
                    kTwoPi;

  const double ea = u1 * u1 / (2.0 * p1) + u2 * u2 / (2.0 * p2) +
                    2.0 * u1 * u2 / (p1 + p2);
  const double ec = v1 * v1 / (2.0 * alpha1) + v2 * v2 / (2.0 * alpha2) +
                    2.0 * v1 * v2 / (alpha1 + alpha2);
  if (d == kInf) return mm;
  if (d >= 0.0) {
    using numerics::clamped_exp;
    return mm + u1 * u1 / (2.0 * p1) * clamped_exp(-2.0 * p1 * d) +
           u2 * u2 / (2.0 * p2) * clamped_exp(-2.0 * p2 * d) +
           2.0 * u1 * u2 / (p1 + p2) * clamped_exp(-(p1 + p2) * d);
  }
  if (d == -kInf) return mm + ea + ec;
  using numerics::clamped_exp;
  const double uncovered = v1 * v1 / (2.0 * alpha1) * clamped_exp(2.0 * alpha1 * d) +
                           v2 * v2 / (2.0 * alpha2) * clamped_exp(2.0 * alpha2 * d) +
                           2.0 * v1 * v2 / (alpha1 + alpha2) *
                               clamped_exp((alpha1 + alpha2) * d);
  return mm + ea + ec - uncovered;
}

namespace {

std::mutex& fftw_mutex() {
  static std::mutex mu;
  return mu;
}

// In-place complex DFT through FFTW. sign = FFTW_FORWARD applies
// exp(-2 pi i k n / N); the inverse here includes the 1/N factor.
void dft(std::vector<Complex>& data, int sign) {
  const auto n = static_cast<int>(data.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(data.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  if (sign == FFTW_BACKWARD) {
    for (Complex& c : data) c /= static_cast<double>(n);
  }
}

}  // namespace

NumericFactorization factorize_numeric(const TabulatedSpectrum& sx, double snr,
                                       const NumericGrid& grid) {
  if (grid.log2_size < 8 || grid.log2_size > 24) {
    throw InvalidParameter("log2_size", "must be in [8, 24]");
  }
  if (!(grid.omega_max > 0.0)) throw InvalidParameter("omega_max", "must be > 0");
  const std::size_t n = std::size_t{1} << grid.log2_size;
  const double dw = 2.0 * grid.omega_max / static_cast<double>(n);
  const double dt = std::numbers::pi / grid.omega_max;

  // S_Y on the DFT-ordered frequency grid.
  std::vector<double> sx_grid(n), sy(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = ((k < n / 2) ? static_cast<double>(k)
                                  : static_cast<double>(k) - static_cast<double>(n)) * dw;
    sx_grid[k] = eval_tabulated(sx, w);
    sy[k] = 1.0 + snr * sx_grid[k];
  }

  // Cepstral minimum-phase construction: keep the causal half of the
  // cepstrum of log S_Y, transform back, exponentiate.
  std::vector<Complex> work(n);
  for (std::size_t k = 0; k < n; ++k) work[k] = std::log(sy[k]);
  dft(work, FFTW_BACKWARD);
  work[0] *= 0.5;
  work[n / 2] *= 0.5;
  for (std::size_t k = n / 2 + 1; k < n; ++k) work[k] = 0.0;
  dft(work, FFTW_FORWARD);
  std::vector<Complex> sy_plus(n);
  for (std::size_t k = 0; k < n; ++k) sy_plus[k] = std::exp(work[k]);

  NumericFactorization out;
  out.dt = dt;
  double rms = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double diff = std::norm(sy_plus[k]) - sy[k];
    rms += diff * diff;
  }
  out.reconstruction_rms = std::sqrt(rms / static_cast<double>(n));
  if (out.reconstruction_rms > 1e-4) {
    throw GridResolutionError(
        "factorize_numeric: |S_Y+|^2 deviates from S_Y beyond 1e-4 RMS");
  }

  // H = sqrt(snr) S_X / conj(S_Y+) on the axis, back to the time domain.
  const double root_snr = std::sqrt(snr);
  for (std::size_t k = 0; k < n; ++k) {
    work[k] = root_snr * sx_grid[k] / std::conj(sy_plus[k]);
  }
  dft(work, FFTW_BACKWARD);
  out.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.h[k] = work[k].real() / dt;
  return out;
}

double tail_energy(const NumericFactorization& nf, double d) {
  const std::size_t n = nf.h.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = ((k < n / 2) ? static_cast<double>(k)
                                  : static_cast<double>(k) - static_cast<double>(n)) *
                     nf.dt;
    if (t < -d - 1e-12) {
      acc += nf.h[k] * nf.h[k];
    } else if (std::abs(t + d) <= 1e-12) {
      acc += 0.5 * nf.h[k] * nf.h[k];  // boundary sample gets half a cell
    }
  }
  return acc * nf.dt;
}

double lmmse_numeric(const NumericFactorization& nf, double mmse, double d) {
  if (d == kInf) return mmse;
  return mmse + tail_energy(nf, d);
}

DecayReport decay_rate(const LmmseCurve& curve) {
  std::vector<double> ds, logp, logd;
  const double denom = curve.cmmse - curve.mmse;
  if (!(denom > 0.0)) throw InsufficientData("decay_rate: degenerate curve anchors");
  for (const auto& [d, v] : curve.points) {
    if (d <= 0.0) continue;
    if (v <= curve.mmse + 1e-12) continue;
    ds.push_back(d);
    logp.push_back(std::log((v - curve.mmse) / denom));
    logd.push_back(std::log(d));
  }
  if (ds.size() < 8) {
    throw InsufficientData("decay_rate: need at least 8 usable points");
  }
  const auto exp_fit = numerics::fit_line(ds, logp);
  const auto poly_fit = numerics::fit_line(logd, logp);
  DecayReport report;
  if (exp_fit.sse <= poly_fit.sse) {
    report.kind = DecayReport::Kind::exponential;
    report.exponent = -exp_fit.slope;
  } else {
    report.kind = DecayReport::Kind::polynomial;
    report.exponent = poly_fit.slope;
  }
  return report;
}

}  // namespace lagmmse::spectral
