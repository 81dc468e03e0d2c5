#include "gplp/signals.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fftw3.h>

namespace gplp {

namespace {

using std::numbers::pi;

// fftw's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>> real_fft(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const int bins = n / 2 + 1;
  double* in = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(bins));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  std::copy(x.begin(), x.end(), in);
  fftw_execute(plan);
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    spectrum[static_cast<std::size_t>(k)] = {out[k][0], out[k][1]};
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return spectrum;
}

}  // namespace

void LineSpectraSpec::validate() const {
  if (n_points < 2) {
    throw std::invalid_argument("line spectra: n_points must be >= 2");
  }
  if (!(t_start < t_end)) {
    throw std::invalid_argument("line spectra: t_start must be below t_end");
  }
  if (!freqs_low.empty() && !freqs_high.empty() &&
      !(*std::max_element(freqs_low.begin(), freqs_low.end()) <
        *std::min_element(freqs_high.begin(), freqs_high.end()))) {
    throw std::invalid_argument("line spectra: every low frequency must be below every high one");
  }
}

LineSpectraSpec LineSpectraSpec::reference() {
  return {{0.31, 0.38, 0.48}, {0.51, 0.64, 0.75}, -100.0, 100.0, 5000};
}

std::vector<double> uniform_grid(double start, double end, std::size_t n) {
  if (n == 0) {
    return {};
  }
  if (n == 1) {
    return {start};
  }
  std::vector<double> t(n);
  const double step = (end - start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = start + static_cast<double>(i) * step;
  }
  t.back() = end;
  return t;
}

std::vector<double> cosine_sum(std::span<const double> freqs, std::span<const double> times) {
  std::vector<double> v(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (double f : freqs) {
      v[i] += std::cos(2.0 * pi * f * times[i]);
    }
  }
  return v;
}

TimeSeries synth_line_spectra(const LineSpectraSpec& spec) {
  spec.validate();
  TimeSeries ts;
  ts.times = uniform_grid(spec.t_start, spec.t_end, static_cast<std::size_t>(spec.n_points));
  std::vector<double> all = spec.freqs_low;
  all.insert(all.end(), spec.freqs_high.begin(), spec.freqs_high.end());
  ts.values = cosine_sum(all, ts.times);
  return ts;
}

TimeSeries synth_low_component(const LineSpectraSpec& spec) {
  spec.validate();
  TimeSeries ts;
  ts.times = uniform_grid(spec.t_start, spec.t_end, static_cast<std::size_t>(spec.n_points));
  ts.values = cosine_sum(spec.freqs_low, ts.times);
  return ts;
}

TimeSeries subsample(const TimeSeries& ts, double fraction, SubsampleMode mode,
                     std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::domain_error("subsample: fraction must lie in (0, 1]");
  }
  const std::size_t n = ts.size();
  std::vector<std::size_t> keep;
  if (mode == SubsampleMode::Even) {
    const auto step = static_cast<std::size_t>(std::llround(1.0 / fraction));
    for (std::size_t i = 0; i < n; i += std::max<std::size_t>(step, 1)) {
      keep.push_back(i);
    }
  } else {
    const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    keep.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(keep.begin(), keep.end());
  }
  if (keep.empty()) {
    throw std::domain_error("subsample: result would be empty");
  }
  TimeSeries out;
  out.times.reserve(keep.size());
  out.values.reserve(keep.size());
  for (std::size_t i : keep) {
    out.times.push_back(ts.times[i]);
    out.values.push_back(ts.values[i]);
  }
  return out;
}

TimeSeries add_noise(const TimeSeries& ts, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw std::domain_error("add_noise: sigma must be non-negative");
  }
  TimeSeries out = ts;
  if (sigma == 0.0) {
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.values) {
    v += noise(rng);
  }
  return out;
}

bool is_uniform(std::span<const double> times) {
  if (times.size() < 3) {
    return times.size() == 2 ? times[1] > times[0] : true;
  }
  const double mean_gap = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(mean_gap > 0.0)) {
    return false;
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - mean_gap) > 1e-9 * mean_gap) {
      return false;
    }
  }
  return true;
}

SpectrumEstimate fft_spectrum(const TimeSeries& ts, Window window) {
  ts.validate();
  if (ts.size() < 2) {
    throw std::domain_error("fft_spectrum: need at least 2 samples");
  }
  if (!is_uniform(ts.times)) {
    throw std::domain_error(
        "fft_spectrum: samples are not evenly spaced; evaluate the posterior mean on a uniform "
        "grid (gplp filter) and take the spectrum of that");
  }
  const std::size_t n = ts.size();
  const double dt = (ts.times.back() - ts.times.front()) / static_cast<double>(n - 1);
  const double df = 1.0 / (static_cast<double>(n) * dt);

  std::vector<double> x = ts.values;
  double window_power = 1.0;  // mean of w^2
  if (window == Window::Hann) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) /
                                            static_cast<double>(n));
      x[i] *= w;
      acc += w * w;
    }
    window_power = acc / static_cast<double>(n);
  }

  const auto spectrum = real_fft(x);
  SpectrumEstimate est;
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    const double fold = edge ? 1.0 : 2.0;
    const double abs2 = std::norm(spectrum[k]);
    est.freqs.push_back(static_cast<double>(k) * df);
    est.magnitude.push_back(fold * std::sqrt(abs2) / nn / std::sqrt(window_power));
    est.power.push_back(fold * abs2 / (nn * nn * df) / window_power);
  }
  return est;
}

BandEnergy band_energy(const TimeSeries& ts, double cutoff_hz) {
  TimeSeries centred = ts;
  const double mean = std::accumulate(ts.values.begin(), ts.values.end(), 0.0) /
                      static_cast<double>(ts.values.size());
  for (double& v : centred.values) {
    v -= mean;
  }
  const SpectrumEstimate est = fft_spectrum(centred);
  BandEnergy out;
  for (std::size_t k = 0; k < est.freqs.size(); ++k) {
    out.total_power += est.power[k];
    if (est.freqs[k] <= cutoff_hz) {
      out.low_power += est.power[k];
    }
  }
  // Tolerate the rounding residue a constant leaves behind after centring.
  double scale = 0.0;
  for (double v : ts.values) {
    scale = std::max(scale, std::abs(v));
  }
  const double df = est.bin_width();
  if (out.total_power * df <= 1e-24 * std::max(scale * scale, 1e-300)) {
    out.degenerate = true;
    out.ratio = 1.0;
    return out;
  }
  out.ratio = std::clamp(out.low_power / out.total_power, 0.0, 1.0);
  return out;
}

double band_energy_ratio(const TimeSeries& ts, double cutoff_hz) {
  return band_energy(ts, cutoff_hz).ratio;
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::domain_error("mse: length mismatch (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  if (a.empty()) {
    throw std::domain_error("mse: empty input");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace gplp
