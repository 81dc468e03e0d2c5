#include "gplp/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gplp/special_fn.hpp"

namespace gplp {

namespace {

using std::numbers::pi;

// Arguments of erf(a - ic) in the closed form of the low-pass kernel.
struct ErfArgs {
  double a;
  double c;
};

ErfArgs erf_args(double t, const BandLimitedKernelSpec& spec) {
  const double l = spec.se.lengthscale;
  return {std::numbers::sqrt2 * pi * spec.cutoff_b * l, t / (std::numbers::sqrt2 * l)};
}

}  // namespace

void SEHyperparams::validate() const {
  if (!(std::isfinite(sigma2) && sigma2 > 0.0)) {
    throw std::invalid_argument("sigma2 must be positive, got " + std::to_string(sigma2));
  }
  if (!(std::isfinite(lengthscale) && lengthscale > 0.0)) {
    throw std::invalid_argument("lengthscale must be positive, got " + std::to_string(lengthscale));
  }
  if (!(std::isfinite(noise_var) && noise_var >= 0.0)) {
    throw std::invalid_argument("noise_var must be non-negative, got " + std::to_string(noise_var));
  }
}

void BandLimitedKernelSpec::validate() const {
  se.validate();
  if (!(std::isfinite(cutoff_b) && cutoff_b > 0.0)) {
    throw std::invalid_argument("cutoff_b must be positive, got " + std::to_string(cutoff_b));
  }
}

double se_kernel(double tau, const SEHyperparams& p) {
  const double r = tau / p.lengthscale;
  return p.sigma2 * std::exp(-0.5 * r * r);
}

double se_psd(double xi, const SEHyperparams& p) {
  const double l = p.lengthscale;
  return p.sigma2 * std::sqrt(2.0 * pi * l * l) * std::exp(-2.0 * pi * pi * l * l * xi * xi);
}

double lowpass_psd(double xi, const BandLimitedKernelSpec& spec) {
  return std::abs(xi) < spec.cutoff_b ? se_psd(xi, spec.se) : 0.0;
}

double highpass_psd(double xi, const BandLimitedKernelSpec& spec) {
  return std::abs(xi) < spec.cutoff_b ? 0.0 : se_psd(xi, spec.se);
}

double lowpass_kernel(double t, const BandLimitedKernelSpec& spec) {
  const auto [a, c] = erf_args(t, spec);
  return spec.se.sigma2 * damped_re_erf(a, c);
}

double highpass_kernel(double t, const BandLimitedKernelSpec& spec) {
  // se_kernel - lowpass_kernel, written as the Faddeeva term alone so the
  // difference never cancels.
  const auto [a, c] = erf_args(t, spec);
  const double decay = std::exp(-a * a);
  if (decay == 0.0) {
    return 0.0;
  }
  const ComplexValue w = faddeeva({c, a});
  const double phase = 2.0 * a * c;
  return spec.se.sigma2 * decay * (std::cos(phase) * w.real() - std::sin(phase) * w.imag());
}

double kernel_value(KernelKind kind, double t, const BandLimitedKernelSpec& spec) {
  switch (kind) {
    case KernelKind::SE:
      return se_kernel(t, spec.se);
    case KernelKind::Low:
      return lowpass_kernel(t, spec);
    case KernelKind::High:
      return highpass_kernel(t, spec);
  }
  throw std::invalid_argument("unknown kernel kind");
}

Eigen::MatrixXd gram_matrix(std::span<const double> ts_a, std::span<const double> ts_b,
                            KernelKind kind, const BandLimitedKernelSpec& spec) {
  spec.validate();
  const auto rows = static_cast<Eigen::Index>(ts_a.size());
  const auto cols = static_cast<Eigen::Index>(ts_b.size());
  Eigen::MatrixXd k(rows, cols);
  const bool same = ts_a.data() == ts_b.data() && rows == cols;
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (same && i < j) {
        k(i, j) = k(j, i);
        continue;
      }
      k(i, j) = kernel_value(kind, ts_a[i] - ts_b[j], spec);
    }
  }
  return k;
}

}  // namespace gplp
