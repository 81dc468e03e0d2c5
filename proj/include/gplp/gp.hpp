#ifndef GPLP_GP_HPP
#define GPLP_GP_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gplp/kernels.hpp"

namespace gplp {

/// Samples of a signal at strictly increasing times (seconds).
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }

  /// Throws std::invalid_argument unless lengths agree, n >= 1, every entry
  /// is finite and times are strictly increasing.
  void validate() const;
};

/// Raised when Sigma_y cannot be factorised even after jitter escalation.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when no restart of the optimiser produced a finite NLL.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<std::string> diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

// Diagonal jitter, relative to sigma2: starts at 1e-8 and escalates by 10x
// on each Cholesky failure up to 1e-4.
inline constexpr double kJitterStart = 1e-8;
inline constexpr double kJitterMax = 1e-4;

/// Cholesky factor of the observation covariance together with the jitter
/// (relative to sigma2) that was needed to obtain it.
struct ObservationFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = kJitterStart;
};

ObservationFactor factorize_observation_cov(std::span<const double> ts, const SEHyperparams& p);

/// SE Gram matrix + noise_var I + jitter sigma2 I, with the jitter that
/// factorize_observation_cov settles on.
Eigen::MatrixXd observation_cov(std::span<const double> ts, const SEHyperparams& p);

/// Gaussian negative log marginal likelihood of the values under a zero-mean
/// model:  0.5 log|S| + 0.5 y' S^-1 y + 0.5 n log(2 pi).
double nll(const TimeSeries& ts, const SEHyperparams& p);

struct FitConfig {
  int restarts = 8;
  /// Restarts stop once the simplex NLL spread is below
  /// screening_tolerance * (1 + |NLL|); the best one is then refined until
  /// the spread is below tolerance * (1 + |NLL|).
  double tolerance = 1e-8;
  double screening_tolerance = 1e-3;
  int max_iterations = 400;
  /// Offsets the quasi-random start sequence; equal seeds give equal fits.
  std::uint64_t seed = 0;
};

struct RestartReport {
  SEHyperparams start;
  double start_nll = 0.0;
  SEHyperparams end;
  double end_nll = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
};

struct FitResult {
  SEHyperparams params;
  double nll = 0.0;
  int restarts_tried = 0;
  bool converged = false;
  /// Empirical mean removed from the values before fitting.
  double data_mean = 0.0;
  /// Index of the winning restart; ties go to the lowest index.
  int best_restart = -1;
  std::vector<RestartReport> restarts;
  /// Best NLL after each simplex iteration of the winning restart.
  std::vector<double> best_nll_trace;
};

/// Maximum-likelihood SE hyperparameters. The values are centred on their
/// empirical mean first; the cutoff frequency plays no part in training.
/// Requires n >= 3. Throws FitError if every restart fails.
FitResult fit(const TimeSeries& ts, const FitConfig& config = {});

enum class Component { Low, High, Full };

struct PosteriorOptions {
  bool full_covariance = false;
  /// Centre the values before conditioning and add the mean back to the
  /// Low and Full components.
  bool subtract_mean = true;
};

struct PosteriorEstimate {
  std::vector<double> query_times;
  std::vector<double> mean;
  std::vector<double> variance;
  std::optional<Eigen::MatrixXd> full_cov;
  Component component = Component::Low;
  /// Value added back to the mean (zero for the High component).
  double mean_offset = 0.0;
  double jitter = kJitterStart;

  std::vector<double> stddev() const;
};

/// Posterior of one latent component given the observations:
///   mean = K_c(q, t) S^-1 y,  cov = K_c(q, q) - K_c(q, t) S^-1 K_c(t, q)
/// with K_c the low-pass, high-pass or full SE kernel and S the observation
/// covariance under spec.se.
PosteriorEstimate posterior(const TimeSeries& ts, std::span<const double> query,
                            const BandLimitedKernelSpec& spec, Component component,
                            const PosteriorOptions& options = {});

const char* component_name(Component component);

}  // namespace gplp

#endif  // GPLP_GP_HPP
