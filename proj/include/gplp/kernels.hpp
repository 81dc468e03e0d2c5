#ifndef GPLP_KERNELS_HPP
#define GPLP_KERNELS_HPP

#include <span>

#include <Eigen/Dense>

namespace gplp {

/// Hyperparameters of the square-exponential model of the full signal plus
/// observation noise. Variances are in signal units squared, the lengthscale
/// in seconds.
struct SEHyperparams {
  double sigma2 = 1.0;
  double lengthscale = 1.0;
  double noise_var = 0.0;

  /// Throws std::invalid_argument unless sigma2 > 0, lengthscale > 0 and
  /// noise_var >= 0 (all finite).
  void validate() const;
};

/// SE hyperparameters together with the low/high frequency boundary b (Hz).
struct BandLimitedKernelSpec {
  SEHyperparams se;
  double cutoff_b = 1.0;

  void validate() const;
};

enum class KernelKind { SE, Low, High };

double se_kernel(double tau, const SEHyperparams& p);

/// Fourier transform of se_kernel, frequency in Hz.
double se_psd(double xi, const SEHyperparams& p);

/// se_psd restricted to |xi| < b.
double lowpass_psd(double xi, const BandLimitedKernelSpec& spec);

/// se_psd restricted to |xi| >= b.
double highpass_psd(double xi, const BandLimitedKernelSpec& spec);

/// Covariance of the low-frequency component: the inverse Fourier transform
/// of se_psd on [-b, b],
///   K_l(t) = sigma2 exp(-t^2 / 2l^2) Re erf(sqrt(2) pi b l - i t / (sqrt(2) l)).
double lowpass_kernel(double t, const BandLimitedKernelSpec& spec);

/// Covariance of the high-frequency component, se_kernel - lowpass_kernel.
double highpass_kernel(double t, const BandLimitedKernelSpec& spec);

double kernel_value(KernelKind kind, double t, const BandLimitedKernelSpec& spec);

/// Matrix of kernel(a[i] - b[j]).
Eigen::MatrixXd gram_matrix(std::span<const double> ts_a, std::span<const double> ts_b,
                            KernelKind kind, const BandLimitedKernelSpec& spec);

}  // namespace gplp

#endif  // GPLP_KERNELS_HPP
