#pragma once

#include <limits>
#include <utility>
#include <variant>
#include <vector>

namespace lagmmse {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Additive white Gaussian noise channel dY = sqrt(snr) X dt + dW.
// snr is a per-unit-time intensity.
struct ChannelSpec {
  double snr = 1.0;
};

// Ornstein-Uhlenbeck law dX = alpha (mu - X) dt + beta dB. The process
// mean mu is fixed at 0; beta defaults to 1 but stays a free parameter so
// the beta-general closed forms can be exercised.
struct OuParams {
  double alpha = 1.0;
  double beta = 1.0;
  double mu = 0.0;
};

// Discrete mixing measure over OU rate parameters. Continuous measures are
// represented by quadrature nodes and weights (see gauss_legendre_measure).
struct MixingMeasure {
  std::vector<double> alphas;
  std::vector<double> weights;
};

// Even rational power spectrum S(s) = gain * num(s^2) / den(s^2), with
// polynomial coefficients stored in ascending powers of x = s^2.
// On the physical axis s = j*omega, so x = -omega^2.
struct RationalSpectrum {
  std::vector<double> num_coeffs;
  std::vector<double> den_coeffs;
  double gain = 1.0;
};

// Sampled spectrum on a uniform symmetric frequency grid.
struct TabulatedSpectrum {
  std::vector<double> omega_grid;
  std::vector<double> s_values;
};

// Finite-alphabet discrete-time Markov chain. `stationary` is filled by
// validate() (and by dtmc_stationary); transition is row-stochastic.
struct Dtmc {
  std::vector<double> values;
  std::vector<std::vector<double>> transition;
  std::vector<double> stationary;
};

// The union of supported input-process laws.
using ProcessSpec =
    std::variant<OuParams, MixingMeasure, RationalSpectrum, TabulatedSpectrum, Dtmc>;

class ValidatedSpec {
 public:
  const ProcessSpec& get() const noexcept { return spec_; }

 private:
  explicit ValidatedSpec(ProcessSpec spec) : spec_(std::move(spec)) {}
  friend ValidatedSpec validate(ProcessSpec spec);
  ProcessSpec spec_;
};

// Checks every variant invariant (positivity, stochasticity, measure
// normalization) and returns the spec wrapped as validated.
// Throws InvalidParameter with the offending field name.
ValidatedSpec validate(ProcessSpec spec);

// R_X(0) of the validated process: beta^2/(2 alpha) for OU, the weighted
// component average for mixtures, (1/2pi) integral of S for spectra, and
// the stationary variance of the value alphabet for Markov specs.
double stationary_variance(const ValidatedSpec& spec);

// Sampled lmmse curve with its three anchors. Lookahead d is an extended
// real: +-infinity select the smoothing and stationary-variance anchors.
struct LmmseCurve {
  std::vector<std::pair<double, double>> points;  // (d, error value)
  double cmmse = 0.0;
  double mmse = 0.0;
  double var0 = 0.0;
};

// Checks monotone non-increase in d and mmse <= value <= var0 on every
// point, within tol. Returns false rather than throwing, so it can be used
// both as a test assertion and a runtime guard on Monte Carlo curves.
bool curve_is_consistent(const LmmseCurve& curve, double tol);

}  // namespace lagmmse
