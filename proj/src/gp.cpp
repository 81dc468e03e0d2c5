#include "gplp/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <utility>

namespace gplp {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

// Box for the optimiser, relative to the data.
constexpr double kMinLengthscaleGaps = 0.1;   // x median time gap
constexpr double kMaxLengthscaleSpans = 10.0; // x observation span
constexpr double kMinNoiseRatio = 1e-8;       // noise_var / sigma2
constexpr double kMaxNoiseRatio = 1e6;
constexpr std::array<double, 3> kLengthscaleFactors = {1.0, 5.0, 25.0};
// Initial simplex edge (log units) for restarts and for the final polish.
constexpr double kInitialSimplexStep = 0.7;
constexpr double kPolishSimplexStep = 0.05;

double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

// Lower triangle of the unit-variance SE Gram matrix; the upper triangle is
// left uninitialised since only the Cholesky factor reads it.
Eigen::MatrixXd correlation_lower(std::span<const double> ts, double lengthscale) {
  constexpr double kExpUnderflow = -745.2;
  const auto n = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd r(n, n);
  const double scale = -0.5 / (lengthscale * lengthscale);
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d = ts[i] - ts[j];
      const double e = scale * d * d;
      r(i, j) = e < kExpUnderflow ? 0.0 : std::exp(e);
    }
  }
  return r;
}

// Factorises base + (ridge + jitter * scale) I, escalating jitter.
ObservationFactor factorize_with_jitter(Eigen::MatrixXd base, double ridge, double scale) {
  ObservationFactor out;
  const Eigen::VectorXd diagonal = base.diagonal();
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
    base.diagonal() = diagonal.array() + (ridge + jitter * scale);
    out.llt.compute(base);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
  }
  throw ConditioningError("observation covariance is not positive definite even with jitter " +
                          std::to_string(kJitterMax) + " * sigma2");
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

struct Centered {
  TimeSeries ts;
  double mean = 0.0;
};

Centered centre(const TimeSeries& ts) {
  Centered c{ts, 0.0};
  c.mean = std::accumulate(ts.values.begin(), ts.values.end(), 0.0) /
           static_cast<double>(ts.values.size());
  for (double& v : c.ts.values) {
    v -= c.mean;
  }
  return c;
}

// NLL with sigma2 profiled out, as a function of (log l, log noise ratio).
// Sigma_y = sigma2 (R + (ratio + jitter) I), so the optimal sigma2 for fixed
// (l, ratio) is y' (R + (ratio + jitter) I)^-1 y / n.
class ProfiledObjective {
 public:
  ProfiledObjective(const TimeSeries& ts, std::array<double, 2> lo, std::array<double, 2> hi)
      : ts_(ts),
        y_(Eigen::Map<const Eigen::VectorXd>(ts.values.data(),
                                             static_cast<Eigen::Index>(ts.values.size()))),
        lo_(lo),
        hi_(hi) {}

  struct Eval {
    double nll = std::numeric_limits<double>::infinity();
    double sigma2 = 0.0;
  };

  std::array<double, 2> clamp(std::array<double, 2> x) const {
    for (std::size_t k = 0; k < 2; ++k) {
      x[k] = std::clamp(x[k], lo_[k], hi_[k]);
    }
    return x;
  }

  Eval profiled(const std::array<double, 2>& x) const {
    try {
      const auto [quad, logdet] = quad_and_logdet(x);
      const double n = static_cast<double>(y_.size());
      Eval e;
      e.sigma2 = quad / n;
      if (!(e.sigma2 > 0.0) || !std::isfinite(e.sigma2)) {
        return {};
      }
      e.nll = 0.5 * n * std::log(e.sigma2) + 0.5 * logdet + 0.5 * n + 0.5 * n * kLog2Pi;
      return e;
    } catch (const ConditioningError&) {
      return {};
    }
  }

  // Unprofiled NLL at an explicit sigma2.
  double full(const std::array<double, 2>& x, double sigma2) const {
    try {
      const auto [quad, logdet] = quad_and_logdet(x);
      const double n = static_cast<double>(y_.size());
      return 0.5 * n * std::log(sigma2) + 0.5 * logdet + 0.5 * quad / sigma2 + 0.5 * n * kLog2Pi;
    } catch (const ConditioningError&) {
      return std::numeric_limits<double>::infinity();
    }
  }

 private:
  std::pair<double, double> quad_and_logdet(const std::array<double, 2>& x) const {
    const double l = std::exp(x[0]);
    const double ratio = std::exp(x[1]);
    const ObservationFactor f = factorize_with_jitter(correlation_lower(ts_.times, l), ratio, 1.0);
    const Eigen::VectorXd alpha = f.llt.solve(y_);
    return {y_.dot(alpha), log_det(f.llt)};
  }

  const TimeSeries& ts_;
  Eigen::Map<const Eigen::VectorXd> y_;
  std::array<double, 2> lo_;
  std::array<double, 2> hi_;
};

struct SimplexResult {
  std::array<double, 2> x{};
  double f = std::numeric_limits<double>::infinity();
  double sigma2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

// Nelder-Mead on the box-clamped 2-D profiled objective.
SimplexResult nelder_mead(const ProfiledObjective& obj, std::array<double, 2> start,
                          double initial_step, double tolerance, int max_iterations) {
  constexpr double kMinSimplexSize = 1e-7;
  const double kInitialStep = initial_step;

  struct Vertex {
    std::array<double, 2> x;
    ProfiledObjective::Eval e;
  };
  auto make = [&](std::array<double, 2> x) {
    x = obj.clamp(x);
    return Vertex{x, obj.profiled(x)};
  };

  std::array<Vertex, 3> simplex = {make(start), make({start[0] + kInitialStep, start[1]}),
                                   make({start[0], start[1] + kInitialStep})};
  // A vertex clamped onto the start collapses the simplex; step inward.
  for (std::size_t k = 1; k < 3; ++k) {
    if (simplex[k].x == simplex[0].x) {
      auto x = start;
      x[k - 1] -= kInitialStep;
      simplex[k] = make(x);
    }
  }

  SimplexResult out;
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.e.nll < b.e.nll; };
  for (int it = 0; it < max_iterations; ++it) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    out.trace.push_back(simplex[0].e.nll);
    out.iterations = it;

    const double best = simplex[0].e.nll;
    const double worst = simplex[2].e.nll;
    double size = 0.0;
    for (std::size_t k = 1; k < 3; ++k) {
      size = std::max({size, std::abs(simplex[k].x[0] - simplex[0].x[0]),
                       std::abs(simplex[k].x[1] - simplex[0].x[1])});
    }
    if (std::isfinite(best) && std::isfinite(worst) &&
        worst - best <= tolerance * (1.0 + std::abs(best)) && size < std::sqrt(tolerance)) {
      out.converged = true;
      break;
    }
    if (size < kMinSimplexSize) {
      out.converged = std::isfinite(best);
      break;
    }

    const std::array<double, 2> centroid = {0.5 * (simplex[0].x[0] + simplex[1].x[0]),
                                            0.5 * (simplex[0].x[1] + simplex[1].x[1])};
    auto along = [&](double t) {
      return make({centroid[0] + t * (simplex[2].x[0] - centroid[0]),
                   centroid[1] + t * (simplex[2].x[1] - centroid[1])});
    };

    const Vertex reflected = along(-1.0);
    if (reflected.e.nll < simplex[0].e.nll) {
      const Vertex expanded = along(-2.0);
      simplex[2] = expanded.e.nll < reflected.e.nll ? expanded : reflected;
      continue;
    }
    if (reflected.e.nll < simplex[1].e.nll) {
      simplex[2] = reflected;
      continue;
    }
    const bool outside = reflected.e.nll < simplex[2].e.nll;
    const Vertex contracted = along(outside ? -0.5 : 0.5);
    if (contracted.e.nll < (outside ? reflected.e.nll : simplex[2].e.nll)) {
      simplex[2] = contracted;
      continue;
    }
    for (std::size_t k = 1; k < 3; ++k) {
      simplex[k] = make({0.5 * (simplex[0].x[0] + simplex[k].x[0]),
                         0.5 * (simplex[0].x[1] + simplex[k].x[1])});
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_value);
  out.x = simplex[0].x;
  out.f = simplex[0].e.nll;
  out.sigma2 = simplex[0].e.sigma2;
  return out;
}

std::string describe(const SEHyperparams& p) {
  std::ostringstream os;
  os << "sigma2=" << p.sigma2 << " lengthscale=" << p.lengthscale << " noise_var=" << p.noise_var;
  return os.str();
}

}  // namespace

void TimeSeries::validate() const {
  if (times.size() != values.size()) {
    throw std::invalid_argument("time series: times and values differ in length");
  }
  if (times.empty()) {
    throw std::invalid_argument("time series: empty");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
      throw std::invalid_argument("time series: non-finite entry at index " + std::to_string(i));
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("time series: times not strictly increasing at index " +
                                  std::to_string(i));
    }
  }
}

ObservationFactor factorize_observation_cov(std::span<const double> ts, const SEHyperparams& p) {
  p.validate();
  BandLimitedKernelSpec spec{p, 1.0};
  Eigen::MatrixXd k = gram_matrix(ts, ts, KernelKind::SE, spec);
  return factorize_with_jitter(std::move(k), p.noise_var, p.sigma2);
}

Eigen::MatrixXd observation_cov(std::span<const double> ts, const SEHyperparams& p) {
  const ObservationFactor f = factorize_observation_cov(ts, p);
  BandLimitedKernelSpec spec{p, 1.0};
  Eigen::MatrixXd k = gram_matrix(ts, ts, KernelKind::SE, spec);
  k.diagonal().array() += p.noise_var + f.jitter * p.sigma2;
  return k;
}

double nll(const TimeSeries& ts, const SEHyperparams& p) {
  ts.validate();
  const ObservationFactor f = factorize_observation_cov(ts.times, p);
  const Eigen::Map<const Eigen::VectorXd> y(ts.values.data(),
                                            static_cast<Eigen::Index>(ts.values.size()));
  const Eigen::VectorXd alpha = f.llt.solve(y);
  const double n = static_cast<double>(ts.size());
  return 0.5 * log_det(f.llt) + 0.5 * y.dot(alpha) + 0.5 * n * kLog2Pi;
}

FitResult fit(const TimeSeries& ts, const FitConfig& config) {
  ts.validate();
  if (ts.size() < 3) {
    throw std::invalid_argument("fit: need at least 3 observations, got " +
                                std::to_string(ts.size()));
  }
  if (config.restarts < 1) {
    throw std::invalid_argument("fit: restarts must be >= 1");
  }

  const Centered c = centre(ts);
  const double n = static_cast<double>(ts.size());
  const double var =
      std::accumulate(c.ts.values.begin(), c.ts.values.end(), 0.0,
                      [](double acc, double v) { return acc + v * v; }) / n;
  if (!(var > 0.0)) {
    throw FitError("fit: values have zero variance", {"empirical variance is 0"});
  }

  std::vector<double> gaps(ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    gaps[i - 1] = ts.times[i] - ts.times[i - 1];
  }
  const double span = ts.times.back() - ts.times.front();
  const double median_gap = quantile(gaps, 0.5);
  const std::array<double, 2> lo = {std::log(kMinLengthscaleGaps * median_gap),
                                    std::log(kMinNoiseRatio)};
  const std::array<double, 2> hi = {std::log(kMaxLengthscaleSpans * span),
                                    std::log(kMaxNoiseRatio)};
  const ProfiledObjective objective(c.ts, lo, hi);

  FitResult result;
  result.data_mean = c.mean;
  result.nll = std::numeric_limits<double>::infinity();
  std::vector<std::string> diagnostics;
  SimplexResult best_run;

  const std::uint64_t offset = config.seed % 1000003;
  for (int k = 0; k < config.restarts; ++k) {
    const std::uint64_t index = offset + static_cast<std::uint64_t>(k) + 1;
    const double lengthscale = quantile(gaps, halton(index, 2)) *
                               kLengthscaleFactors[static_cast<std::size_t>(k) % 3];
    const double split = 0.1 + 0.8 * halton(index, 3);

    RestartReport report;
    report.start = {split * var, lengthscale, (1.0 - split) * var};
    const std::array<double, 2> x0 =
        objective.clamp({std::log(lengthscale), std::log((1.0 - split) / split)});
    report.start.lengthscale = std::exp(x0[0]);
    report.start.noise_var = report.start.sigma2 * std::exp(x0[1]);
    report.start_nll = objective.full(x0, report.start.sigma2);

    const SimplexResult run = nelder_mead(objective, x0, kInitialSimplexStep,
                                          std::max(config.screening_tolerance, config.tolerance),
                                          config.max_iterations);
    report.iterations = run.iterations;
    report.converged = run.converged;
    report.failed = !std::isfinite(run.f);
    if (!report.failed) {
      report.end = {run.sigma2, std::exp(run.x[0]), run.sigma2 * std::exp(run.x[1])};
      report.end_nll = run.f;
      if (run.f < result.nll) {
        result.nll = run.f;
        result.params = report.end;
        result.best_restart = k;
        result.converged = run.converged;
        best_run = run;
      }
    } else {
      diagnostics.push_back("restart " + std::to_string(k) + " from " + describe(report.start) +
                            ": no finite NLL");
    }
    result.restarts.push_back(report);
    ++result.restarts_tried;
  }

  if (result.best_restart < 0) {
    throw FitError("fit: every restart failed", diagnostics);
  }

  // Polish the winning restart to the full tolerance.
  SimplexResult polished = nelder_mead(objective, best_run.x, kPolishSimplexStep,
                                       config.tolerance, config.max_iterations);
  result.best_nll_trace = std::move(best_run.trace);
  if (polished.f <= best_run.f) {
    result.best_nll_trace.insert(result.best_nll_trace.end(), polished.trace.begin(),
                                 polished.trace.end());
    result.params = {polished.sigma2, std::exp(polished.x[0]),
                     polished.sigma2 * std::exp(polished.x[1])};
    result.converged = polished.converged;
    RestartReport& winner = result.restarts[static_cast<std::size_t>(result.best_restart)];
    winner.end = result.params;
    winner.end_nll = polished.f;
    winner.iterations += polished.iterations;
    winner.converged = polished.converged;
  }
  // Report the NLL exactly as nll() computes it for the returned parameters.
  result.nll = nll(c.ts, result.params);
  return result;
}

std::vector<double> PosteriorEstimate::stddev() const {
  std::vector<double> s(variance.size());
  std::transform(variance.begin(), variance.end(), s.begin(),
                 [](double v) { return std::sqrt(std::max(v, 0.0)); });
  return s;
}

PosteriorEstimate posterior(const TimeSeries& ts, std::span<const double> query,
                            const BandLimitedKernelSpec& spec, Component component,
                            const PosteriorOptions& options) {
  ts.validate();
  spec.validate();
  for (double q : query) {
    if (!std::isfinite(q)) {
      throw std::invalid_argument("posterior: non-finite query time");
    }
  }

  const KernelKind kind = component == Component::Low    ? KernelKind::Low
                          : component == Component::High ? KernelKind::High
                                                         : KernelKind::SE;
  double offset = 0.0;
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      ts.values.data(), static_cast<Eigen::Index>(ts.values.size()));
  if (options.subtract_mean) {
    offset = y.mean();
    y.array() -= offset;
  }

  const ObservationFactor f = factorize_observation_cov(ts.times, spec.se);
  const Eigen::VectorXd alpha = f.llt.solve(y);
  const Eigen::MatrixXd cross = gram_matrix(query, ts.times, kind, spec);  // m x n

  PosteriorEstimate out;
  out.component = component;
  out.jitter = f.jitter;
  out.mean_offset = component == Component::High ? 0.0 : offset;
  out.query_times.assign(query.begin(), query.end());

  const Eigen::VectorXd mean = cross * alpha;
  out.mean.resize(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    out.mean[i] = mean(static_cast<Eigen::Index>(i)) + out.mean_offset;
  }

  // V = L^-1 K(t, q); posterior covariance = K(q, q) - V' V.
  Eigen::MatrixXd v = cross.transpose();
  f.llt.matrixL().solveInPlace(v);
  const double prior_var = kernel_value(kind, 0.0, spec);
  out.variance.resize(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    const double var = prior_var - v.col(static_cast<Eigen::Index>(i)).squaredNorm();
    out.variance[i] = std::max(var, 0.0);
  }
  if (options.full_covariance) {
    Eigen::MatrixXd cov = gram_matrix(query, query, kind, spec);
    cov.noalias() -= v.transpose() * v;
    out.full_cov = std::move(cov);
  }
  return out;
}

const char* component_name(Component component) {
  switch (component) {
    case Component::Low:
      return "low";
    case Component::High:
      return "high";
    case Component::Full:
      return "full";
  }
  return "unknown";
}

}  // namespace gplp
