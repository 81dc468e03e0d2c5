#ifndef GPLP_SIGNALS_HPP
#define GPLP_SIGNALS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gplp/gp.hpp"

namespace gplp {

/// Sum of unit-amplitude cosines at two disjoint frequency sets, sampled on
/// an even grid.
struct LineSpectraSpec {
  std::vector<double> freqs_low;
  std::vector<double> freqs_high;
  double t_start = -100.0;
  double t_end = 100.0;
  int n_points = 5000;

  /// Throws std::invalid_argument unless max(freqs_low) < min(freqs_high),
  /// n_points >= 2 and t_start < t_end.
  void validate() const;

  /// Low {0.31, 0.38, 0.48} Hz, high {0.51, 0.64, 0.75} Hz, 5000 points on
  /// [-100, 100] s.
  static LineSpectraSpec reference();
};

/// n evenly spaced points from start to end inclusive.
std::vector<double> uniform_grid(double start, double end, std::size_t n);

/// sum_f cos(2 pi f t) at each t.
std::vector<double> cosine_sum(std::span<const double> freqs, std::span<const double> times);

TimeSeries synth_line_spectra(const LineSpectraSpec& spec);

/// The low-frequency part of synth_line_spectra (freqs_low only) on the
/// same grid; the reference for filtering error.
TimeSeries synth_low_component(const LineSpectraSpec& spec);

enum class SubsampleMode { Even, Random };

/// Even: every k-th sample with k = round(1 / fraction). Random: floor(fraction n)
/// samples drawn without replacement, kept in time order.
TimeSeries subsample(const TimeSeries& ts, double fraction, SubsampleMode mode,
                     std::uint64_t seed);

/// Adds i.i.d. N(0, sigma^2) noise.
TimeSeries add_noise(const TimeSeries& ts, double sigma, std::uint64_t seed);

struct SpectrumEstimate {
  std::vector<double> freqs;      // Hz, 0 .. Nyquist
  std::vector<double> magnitude;  // one-sided amplitude, a unit cosine on a bin reads 1
  std::vector<double> power;      // one-sided density, sum(power) * df = mean square

  double bin_width() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
};

enum class Window { None, Hann };

/// True when every gap is within 1e-9 (relative) of the mean gap.
bool is_uniform(std::span<const double> times);

/// One-sided FFT spectrum of a uniformly sampled series. Throws
/// std::domain_error for uneven sampling.
SpectrumEstimate fft_spectrum(const TimeSeries& ts, Window window = Window::None);

struct BandEnergy {
  double ratio = 1.0;
  double low_power = 0.0;
  double total_power = 0.0;
  /// Set when the mean-removed signal has no energy; ratio is then 1.
  bool degenerate = false;
};

/// Fraction of spectral power at f <= cutoff after removing the mean. The
/// DC bin counts as low band.
BandEnergy band_energy(const TimeSeries& ts, double cutoff_hz);

double band_energy_ratio(const TimeSeries& ts, double cutoff_hz);

/// Mean squared difference; throws std::domain_error on length mismatch.
double mse(std::span<const double> a, std::span<const double> b);

}  // namespace gplp

#endif  // GPLP_SIGNALS_HPP
