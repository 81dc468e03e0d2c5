#include "gplp/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gplp {

namespace {

using Complex = std::complex<double>;
using std::numbers::pi;

// Transposed direct form II state of one section.
struct SectionState {
  double z1 = 0.0;
  double z2 = 0.0;
};

// State that makes a section sit at rest on a constant input u
// (its output is then u, since each section has unit DC gain).
SectionState steady_state(const Biquad& s, double u) {
  const double y = u * (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  return {(s.b1 + s.b2) * u - (s.a1 + s.a2) * y, s.b2 * u - s.a2 * y};
}

void run(const SosFilter& filter, std::vector<double>& x, bool steady_start) {
  if (x.empty()) {
    return;
  }
  for (const Biquad& s : filter.sections) {
    SectionState st = steady_start ? steady_state(s, x.front()) : SectionState{};
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + st.z1;
      st.z1 = s.b1 * in - s.a1 * out + st.z2;
      st.z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

void ButterworthSpec::validate() const {
  if (order < 1) {
    throw std::domain_error("butterworth: order must be >= 1");
  }
  if (!(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0)) {
    throw std::domain_error("butterworth: sample rate must be positive");
  }
  if (!(std::isfinite(cutoff_hz) && cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_rate_hz)) {
    throw std::domain_error("butterworth: cutoff " + std::to_string(cutoff_hz) +
                            " Hz must lie in (0, " + std::to_string(0.5 * sample_rate_hz) + ")");
  }
}

SosFilter design_butterworth(const ButterworthSpec& spec) {
  spec.validate();
  const int n = spec.order;
  const double fs2 = 2.0 * spec.sample_rate_hz;
  // Prewarped analog cutoff so the digital -3 dB point lands on cutoff_hz.
  const double wc = fs2 * std::tan(pi * spec.cutoff_hz / spec.sample_rate_hz);

  SosFilter filter{spec, {}};
  auto bilinear = [fs2](Complex p) { return (fs2 + p) / (fs2 - p); };

  for (int k = 0; k < n / 2; ++k) {
    const double theta = pi * (2.0 * k + n + 1) / (2.0 * n);
    const Complex zp = bilinear(wc * std::polar(1.0, theta));
    Biquad s;
    s.a1 = -2.0 * zp.real();
    s.a2 = std::norm(zp);
    const double g = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = g;
    s.b1 = 2.0 * g;
    s.b2 = g;
    filter.sections.push_back(s);
  }
  if (n % 2 == 1) {
    const double zp = bilinear(Complex{-wc, 0.0}).real();
    Biquad s;
    s.a1 = -zp;
    const double g = (1.0 + s.a1) / 2.0;
    s.b0 = g;
    s.b1 = g;
    filter.sections.push_back(s);
  }
  return filter;
}

std::complex<double> frequency_response(const SosFilter& filter, double freq_hz) {
  const double w = 2.0 * pi * freq_hz / filter.spec.sample_rate_hz;
  const Complex z1 = std::polar(1.0, -w);
  const Complex z2 = z1 * z1;
  Complex h{1.0, 0.0};
  for (const Biquad& s : filter.sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

std::vector<std::complex<double>> poles(const SosFilter& filter) {
  std::vector<Complex> out;
  for (const Biquad& s : filter.sections) {
    if (s.a2 == 0.0) {
      out.emplace_back(-s.a1, 0.0);
      continue;
    }
    // roots of z^2 + a1 z + a2
    const Complex disc = std::sqrt(Complex{s.a1 * s.a1 - 4.0 * s.a2, 0.0});
    out.push_back((-s.a1 + disc) / 2.0);
    out.push_back((-s.a1 - disc) / 2.0);
  }
  return out;
}

std::vector<double> sosfilt(const SosFilter& filter, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run(filter, y, false);
  return y;
}

std::size_t filtfilt_padding(const SosFilter& filter) {
  return 3 * (static_cast<std::size_t>(filter.spec.order) + 1);
}

std::vector<double> filtfilt(std::span<const double> x, const SosFilter& filter) {
  const std::size_t pad = filtfilt_padding(filter);
  const std::size_t n = x.size();
  if (n <= pad) {
    throw std::domain_error("filtfilt: input of length " + std::to_string(n) +
                            " is too short for padding " + std::to_string(pad));
  }

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) {
    ext.push_back(2.0 * x[0] - x[i]);
  }
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) {
    ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);
  }

  run(filter, ext, true);
  std::reverse(ext.begin(), ext.end());
  run(filter, ext, true);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace gplp
