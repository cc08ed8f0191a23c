#pragma once

#include <complex>
#include <span>
#include <vector>

#include "lagmmse/types.hpp"

namespace lagmmse::spectral {

using Complex = std::complex<double>;

// Polynomial with coefficients in ascending powers.
double eval_poly(std::span<const double> coeffs, double x);
Complex eval_poly(std::span<const double> coeffs, Complex x);

// All complex roots via the companion matrix, each polished by one Newton
// step. Throws RootFindingFailure if the polished residual stays large.
std::vector<Complex> poly_roots(std::span<const double> coeffs);

// Spectrum values on the physical axis s = j omega (x = -omega^2).
double eval_rational(const RationalSpectrum& sx, double omega);
// Linear interpolation on the tabulated grid; zero outside its range.
double eval_tabulated(const TabulatedSpectrum& sx, double omega);

// R_X(0) = (1/2pi) * integral of S over the real line.
double spectrum_integral(const RationalSpectrum& sx);
double spectrum_integral(const TabulatedSpectrum& sx);

// Wiener-Hopf split of S_Y = 1 + snr S_X. The stored zeros and poles are
// the left-half-plane halves; S_Y+(s) = gain PROD(s - z_i) / PROD(s - q_j)
// and S_Y-(s) = S_Y+(-s).
struct FactoredSpectrum {
  std::vector<Complex> plus_zeros;  // Re < 0
  std::vector<Complex> plus_poles;  // Re < 0
  double gain = 1.0;

  Complex eval_plus(Complex s) const;
};

FactoredSpectrum factorize_rational(const RationalSpectrum& sx, double snr);

// H(s) = sqrt(snr) S_X(s) / S_Y-(s) expanded into simple-pole terms.
// Anticausal poles sit in the right half plane, causal in the left.
struct PfeTerm {
  Complex pole;
  Complex residue;
};

struct PartialFractionExpansion {
  std::vector<PfeTerm> anticausal_terms;  // Re(pole) > 0
  std::vector<PfeTerm> causal_terms;      // Re(pole) < 0
  double constant_c = 0.0;                // total impulse-response energy
  double anticausal_energy = 0.0;         // integral of h^2 over t < 0

  Complex eval(Complex s) const;
};

PartialFractionExpansion wiener_transfer(const RationalSpectrum& sx,
                                         const FactoredSpectrum& fact, double snr);

// lmmse(d) = mmse + tail energy of h beyond -d, in closed form from the
// expansion's residues. d is an extended real.
double lmmse_rational(const PartialFractionExpansion& pfe, double mmse, double d);

// Smoothing error by adaptive quadrature of S/(1 + snr S) / (2 pi).
double wiener_mmse(const RationalSpectrum& sx, double snr, double abs_tol = 1e-9);
double wiener_mmse(const TabulatedSpectrum& sx, double snr);

// Direct evaluation of the equal-mixture two-component closed form;
// independent of the generic pipeline (quadratic-formula roots, explicit
// residues), used as its golden path.
double two_ou_closed_form(double alpha1, double alpha2, double snr, double d);

// FFT-based cepstral factorization for tabulated spectra.
struct NumericGrid {
  int log2_size = 16;       // power-of-two transform length
  double omega_max = 64.0;  // grid covers [-omega_max, omega_max)
};

struct NumericFactorization {
  double dt = 0.0;              // time step of the h samples
  std::vector<double> h;        // DFT layout: index n -> t = n*dt (n < N/2), (n-N)*dt otherwise
  double reconstruction_rms = 0.0;  // RMS of |S_Y+|^2 - S_Y over the grid
};

NumericFactorization factorize_numeric(const TabulatedSpectrum& sx, double snr,
                                       const NumericGrid& grid = {});

// Riemann tail energy: integral of h^2 over t <= -d.
double tail_energy(const NumericFactorization& nf, double d);

// lmmse(d) = mmse + tail_energy(d); the numeric pipeline's p_d uses its
// own lmmse(0) as the cmmse anchor so shared grid bias cancels.
double lmmse_numeric(const NumericFactorization& nf, double mmse, double d);

struct DecayReport {
  enum class Kind { exponential, polynomial };
  Kind kind = Kind::exponential;
  double exponent = 0.0;  // decay rate for exponential, log-log slope for polynomial
};

// Fits log p_d against d and against log d over the curve's positive-d
// points and reports the better model by residual.
DecayReport decay_rate(const LmmseCurve& curve);

}  // namespace lagmmse::spectral
