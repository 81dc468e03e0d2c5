#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "gplp/gp.hpp"
#include "oracles.hpp"

using gplp::BandLimitedKernelSpec;
using gplp::Component;
using gplp::SEHyperparams;
using gplp::TimeSeries;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

TimeSeries random_series(std::mt19937_64& rng, int n, double span) {
  std::uniform_real_distribution<double> u(0.0, span);
  std::normal_distribution<double> g(0.0, 1.0);
  TimeSeries ts;
  while (static_cast<int>(ts.times.size()) < n) {
    ts.times.push_back(u(rng));
    std::sort(ts.times.begin(), ts.times.end());
    ts.times.erase(std::unique(ts.times.begin(), ts.times.end()), ts.times.end());
  }
  for (int i = 0; i < n; ++i) {
    ts.values.push_back(g(rng));
  }
  return ts;
}

oracle::MatL kernel_matrix(const std::vector<double>& a, const std::vector<double>& b,
                           gplp::KernelKind kind, const BandLimitedKernelSpec& spec) {
  oracle::MatL m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          gplp::kernel_value(kind, a[i] - b[j], spec);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("observation_cov adds noise and jitter on the diagonal") {
  const std::vector<double> one = {0.0};
  const Eigen::MatrixXd s1 = gplp::observation_cov(one, {2.0, 1.0, 0.5});
  CHECK(s1(0, 0) == doctest::Approx(2.5 + gplp::kJitterStart * 2.0).epsilon(1e-15));

  const std::vector<double> two = {0.0, 1.0};
  const Eigen::MatrixXd s2 = gplp::observation_cov(two, {1.0, 1.0, 0.1});
  CHECK(s2(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(s2(1, 1) == doctest::Approx(1.1).epsilon(1e-7));
}

TEST_CASE("nll examples") {
  TimeSeries single{{0.0}, {0.0}};
  CHECK(gplp::nll(single, {3.0, 1.0, 1.0}) ==
        doctest::Approx(0.5 * std::log(4.0) + 0.5 * kLog2Pi).epsilon(1e-8));

  TimeSeries two{{0.0}, {2.0}};
  CHECK(gplp::nll(two, {1.0, 1.0, 0.0}) == doctest::Approx(0.5 * kLog2Pi + 2.0).epsilon(1e-7));

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const TimeSeries ts = random_series(rng, 3 + trial, 5.0);
    const SEHyperparams p{1.7, 0.9, 0.3};
    const double want = oracle::dense_nll(ts.times, ts.values, p.sigma2, p.lengthscale,
                                          p.noise_var, gplp::kJitterStart);
    CHECK(gplp::nll(ts, p) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("nll stays finite on a numerically singular covariance") {
  TimeSeries ts;
  for (int i = 0; i < 40; ++i) {
    ts.times.push_back(1e-3 * i);
    ts.values.push_back(std::sin(0.01 * i));
  }
  const SEHyperparams p{1.0, 100.0, 0.0};
  const gplp::ObservationFactor f = gplp::factorize_observation_cov(ts.times, p);
  CHECK(f.jitter >= gplp::kJitterStart);
  CHECK(f.jitter <= gplp::kJitterMax);
  CHECK(std::isfinite(gplp::nll(ts, p)));
}

TEST_CASE("fit rejects short or constant input") {
  CHECK_THROWS_AS(gplp::fit({{0.0, 1.0}, {1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(gplp::fit({{0.0, 1.0, 2.0}, {4.0, 4.0, 4.0}}), gplp::FitError);
  CHECK_THROWS_AS(gplp::fit({{0.0, 2.0, 1.0}, {4.0, 4.0, 4.0}}), std::invalid_argument);
}

TEST_CASE("fit on white noise attributes the variance to noise or to a vanishing lengthscale") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.5);
  TimeSeries ts;
  for (int i = 0; i < 150; ++i) {
    ts.times.push_back(i);
    ts.values.push_back(g(rng));
  }
  const gplp::FitResult r = gplp::fit(ts);
  const double explained = r.params.noise_var + r.params.sigma2;
  CHECK(explained == doctest::Approx(2.25).epsilon(0.25));
  // Either the noise carries the variance or the SE is uncorrelated at the
  // sampling interval.
  CHECK((r.params.noise_var > 0.8 * explained || r.params.lengthscale < 0.5));
}

TEST_CASE("fit on a smooth sinusoid") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.05);
  TimeSeries ts;
  for (int i = 0; i < 120; ++i) {
    const double t = 0.25 * i;
    ts.times.push_back(t);
    ts.values.push_back(2.0 + std::sin(0.4 * t) + g(rng));
  }
  const gplp::FitResult r = gplp::fit(ts);
  CHECK(r.converged);
  CHECK(r.data_mean == doctest::Approx(std::accumulate(ts.values.begin(), ts.values.end(), 0.0) /
                                       120.0));
  CHECK(r.params.lengthscale > 1.0);
  CHECK(r.params.noise_var < 0.01);
  CHECK(r.params.noise_var > 0.0005);

  SUBCASE("reported nll matches nll() on the centred data") {
    TimeSeries centred = ts;
    for (double& v : centred.values) {
      v -= r.data_mean;
    }
    CHECK(r.nll == gplp::nll(centred, r.params));
  }
  SUBCASE("optimiser bookkeeping") {
    CHECK(r.restarts_tried == 8);
    CHECK(r.restarts.size() == 8);
    for (const gplp::RestartReport& rep : r.restarts) {
      CHECK_FALSE(rep.failed);
      CHECK(rep.end_nll <= rep.start_nll + 1e-9);
      CHECK(r.nll <= rep.start_nll + 1e-9);
      CHECK(rep.end_nll >= r.nll - 1e-6 * (1.0 + std::abs(r.nll)));
    }
    REQUIRE_FALSE(r.best_nll_trace.empty());
    for (std::size_t i = 1; i < r.best_nll_trace.size(); ++i) {
      CHECK(r.best_nll_trace[i] <= r.best_nll_trace[i - 1]);
    }
  }
  SUBCASE("fits are deterministic") {
    const gplp::FitResult again = gplp::fit(ts);
    CHECK(again.params.sigma2 == r.params.sigma2);
    CHECK(again.params.lengthscale == r.params.lengthscale);
    CHECK(again.params.noise_var == r.params.noise_var);
    CHECK(again.nll == r.nll);
  }
  SUBCASE("a different seed lands on the same optimum") {
    gplp::FitConfig config;
    config.seed = 17;
    const gplp::FitResult other = gplp::fit(ts, config);
    CHECK(other.nll == doctest::Approx(r.nll).epsilon(1e-7));
  }
}

TEST_CASE("posterior with zero observations returns the prior") {
  const TimeSeries ts{{0.0, 1.0, 2.5}, {0.0, 0.0, 0.0}};
  const BandLimitedKernelSpec spec{{1.3, 0.7, 0.2}, 0.4};
  const std::vector<double> query = {-1.0, 0.5, 3.0};
  gplp::PosteriorOptions options;
  options.full_covariance = true;
  const gplp::PosteriorEstimate post = gplp::posterior(ts, query, spec, Component::Low, options);
  for (double m : post.mean) {
    CHECK(m == 0.0);
  }
  for (std::size_t i = 0; i < query.size(); ++i) {
    CHECK(post.variance[i] <= gplp::lowpass_kernel(0.0, spec) + 1e-12);
    CHECK(post.variance[i] > 0.0);
  }
  REQUIRE(post.full_cov.has_value());
  CHECK((post.full_cov->diagonal() -
         Eigen::Map<const Eigen::VectorXd>(post.variance.data(), 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("posterior matches dense joint-Gaussian conditioning") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> logu(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const TimeSeries ts = random_series(rng, n, 6.0);
    const BandLimitedKernelSpec spec{
        {std::exp(logu(rng)), std::exp(logu(rng)), 0.1 * std::exp(logu(rng))},
        0.3 * std::exp(logu(rng))};
    std::vector<double> query = {-0.5, 1.1, 2.9, 6.3};

    for (const Component c : {Component::Low, Component::High, Component::Full}) {
      const gplp::KernelKind kind = c == Component::Low    ? gplp::KernelKind::Low
                                    : c == Component::High ? gplp::KernelKind::High
                                                           : gplp::KernelKind::SE;
      gplp::PosteriorOptions options;
      options.full_covariance = true;
      options.subtract_mean = false;
      const gplp::PosteriorEstimate post = gplp::posterior(ts, query, spec, c, options);

      oracle::MatL sy = kernel_matrix(ts.times, ts.times, gplp::KernelKind::SE, spec);
      for (int i = 0; i < n; ++i) {
        sy(i, i) += spec.se.noise_var + post.jitter * spec.se.sigma2;
      }
      const oracle::Conditioned want =
          oracle::condition_joint(kernel_matrix(query, query, kind, spec),
                                  kernel_matrix(query, ts.times, kind, spec), sy, ts.values);
      for (std::size_t i = 0; i < query.size(); ++i) {
        CHECK(std::abs(post.mean[i] - want.mean[i]) <= 1e-6);
        for (std::size_t j = 0; j < query.size(); ++j) {
          CHECK(std::abs((*post.full_cov)(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)) -
                         static_cast<double>(want.cov(static_cast<Eigen::Index>(i),
                                                      static_cast<Eigen::Index>(j)))) <= 1e-6);
        }
      }
    }
  }
}

TEST_CASE("posterior components are additive and shrink the prior") {
  std::mt19937_64 rng(8);
  const TimeSeries ts = random_series(rng, 25, 10.0);
  const BandLimitedKernelSpec spec{{2.0, 0.6, 0.2}, 0.35};
  std::vector<double> query;
  for (int i = 0; i <= 40; ++i) {
    query.push_back(-1.0 + 0.3 * i);
  }
  const auto low = gplp::posterior(ts, query, spec, Component::Low);
  const auto high = gplp::posterior(ts, query, spec, Component::High);
  const auto full = gplp::posterior(ts, query, spec, Component::Full);
  CHECK(high.mean_offset == 0.0);
  CHECK(low.mean_offset == full.mean_offset);
  for (std::size_t i = 0; i < query.size(); ++i) {
    CHECK(std::abs(low.mean[i] + high.mean[i] - full.mean[i]) <= 1e-10);
    CHECK(low.variance[i] <= gplp::lowpass_kernel(0.0, spec) + 1e-12);
    CHECK(high.variance[i] <= gplp::highpass_kernel(0.0, spec) + 1e-12);
    CHECK(full.variance[i] <= spec.se.sigma2 + 1e-12);
  }
  const auto sd = low.stddev();
  CHECK(sd[3] == doctest::Approx(std::sqrt(low.variance[3])));
}

TEST_CASE("posterior does not depend on the order of query points") {
  std::mt19937_64 rng(12);
  const TimeSeries ts = random_series(rng, 15, 8.0);
  const BandLimitedKernelSpec spec{{1.0, 0.8, 0.1}, 0.3};
  std::vector<double> query = {0.1, 4.0, 2.2, 7.5, 3.3};
  const auto base = gplp::posterior(ts, query, spec, Component::Low);
  std::vector<std::size_t> order = {3, 0, 4, 2, 1};
  std::vector<double> shuffled;
  for (std::size_t k : order) {
    shuffled.push_back(query[k]);
  }
  const auto perm = gplp::posterior(ts, shuffled, spec, Component::Low);
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(perm.mean[i] == doctest::Approx(base.mean[order[i]]).epsilon(1e-13));
    CHECK(perm.variance[i] == doctest::Approx(base.variance[order[i]]).epsilon(1e-13));
  }
}

TEST_CASE("large b l recovers plain SE regression") {
  std::mt19937_64 rng(2);
  const TimeSeries ts = random_series(rng, 20, 10.0);
  const BandLimitedKernelSpec spec{{1.5, 1.0, 0.1}, 3.0};
  const std::vector<double> query = {0.0, 2.5, 5.0, 9.9};
  const auto low = gplp::posterior(ts, query, spec, Component::Low);
  const auto full = gplp::posterior(ts, query, spec, Component::Full);
  for (std::size_t i = 0; i < query.size(); ++i) {
    CHECK(std::abs(low.mean[i] - full.mean[i]) <= 1e-9);
    CHECK(std::abs(low.variance[i] - full.variance[i]) <= 1e-9);
  }
}

TEST_CASE("noise-free posterior interpolates the observations") {
  const TimeSeries ts{{0.0, 1.0, 2.0, 3.0}, {1.0, -0.5, 0.25, 2.0}};
  const BandLimitedKernelSpec spec{{1.0, 1.0, 0.0}, 10.0};
  const auto post = gplp::posterior(ts, ts.times, spec, Component::Low);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(post.mean[i] == doctest::Approx(ts.values[i]).epsilon(1e-5));
    CHECK(post.variance[i] <= 1e-6);
  }
}

TEST_CASE("posterior rejects invalid input") {
  const TimeSeries ts{{0.0, 1.0}, {1.0, 2.0}};
  const std::vector<double> q = {0.5};
  CHECK_THROWS_AS(gplp::posterior(ts, q, {{1.0, 1.0, 0.1}, 0.0}, Component::Low),
                  std::invalid_argument);
  const std::vector<double> bad = {std::nan("")};
  CHECK_THROWS_AS(gplp::posterior(ts, bad, {{1.0, 1.0, 0.1}, 0.5}, Component::Low),
                  std::invalid_argument);
  CHECK(std::string(gplp::component_name(Component::High)) == "high");
}
