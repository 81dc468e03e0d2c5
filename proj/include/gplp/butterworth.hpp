#ifndef GPLP_BUTTERWORTH_HPP
#define GPLP_BUTTERWORTH_HPP

#include <complex>
#include <span>
#include <vector>

namespace gplp {

struct ButterworthSpec {
  int order = 10;
  double cutoff_hz = 0.0;
  double sample_rate_hz = 0.0;

  /// Throws std::domain_error unless order >= 1 and 0 < cutoff < Nyquist.
  void validate() const;
};

/// One second-order section, a0 normalised to 1:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
/// A first-order section has b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct SosFilter {
  ButterworthSpec spec;
  std::vector<Biquad> sections;
};

/// Digital Butterworth low-pass: analog prototype, prewarped bilinear
/// transform, conjugate pole pairs grouped into sections. Every section has
/// unit DC gain.
SosFilter design_butterworth(const ButterworthSpec& spec);

std::complex<double> frequency_response(const SosFilter& filter, double freq_hz);

/// Poles of every section in the z-plane.
std::vector<std::complex<double>> poles(const SosFilter& filter);

/// Single forward pass from a zero state.
std::vector<double> sosfilt(const SosFilter& filter, std::span<const double> x);

/// Number of samples of odd reflection added at each end by filtfilt.
std::size_t filtfilt_padding(const SosFilter& filter);

/// Zero-phase forward-backward filtering with odd-reflection padding and
/// steady-state initial conditions. Throws std::domain_error if x is not
/// longer than the padding.
std::vector<double> filtfilt(std::span<const double> x, const SosFilter& filter);

}  // namespace gplp

#endif  // GPLP_BUTTERWORTH_HPP
