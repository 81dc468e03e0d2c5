#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "gplp/butterworth.hpp"

using gplp::ButterworthSpec;

namespace {

double gain_db(const gplp::SosFilter& f, double hz) {
  return 20.0 * std::log10(std::abs(gplp::frequency_response(f, hz)));
}

std::vector<double> tone(double hz, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::cos(2.0 * M_PI * hz * static_cast<double>(i) / fs);
  }
  return x;
}

double rms(const std::vector<double>& x, std::size_t skip) {
  double acc = 0.0;
  for (std::size_t i = skip; i < x.size() - skip; ++i) {
    acc += x[i] * x[i];
  }
  return std::sqrt(acc / static_cast<double>(x.size() - 2 * skip));
}

}  // namespace

TEST_CASE("first order filter has unit DC gain and -3 dB at the cutoff") {
  const auto f = gplp::design_butterworth({1, 1.0, 10.0});
  REQUIRE(f.sections.size() == 1);
  CHECK(std::abs(gplp::frequency_response(f, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gain_db(f, 1.0) == doctest::Approx(-3.0103).epsilon(1e-4));
}

TEST_CASE("order 10 response at the reference cutoff") {
  const auto f = gplp::design_butterworth({10, 0.495, 25.0});
  CHECK(f.sections.size() == 5);
  CHECK(std::abs(gain_db(f, 0.495) + 3.0103) <= 0.1);
  CHECK(gain_db(f, 0.99) <= -60.0);
  CHECK(std::abs(gplp::frequency_response(f, 0.0)) == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& p : gplp::poles(f)) {
    CHECK(std::abs(p) < 1.0);
  }
}

TEST_CASE("odd orders and a range of cutoffs keep the -3 dB point") {
  for (int order : {2, 3, 5, 7, 10}) {
    for (double fc : {0.01, 0.2, 2.0, 11.0}) {
      const auto f = gplp::design_butterworth({order, fc, 25.0});
      CHECK(std::abs(gain_db(f, fc) + 3.0103) <= 0.01);
      CHECK(gain_db(f, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("filtfilt passes constants exactly") {
  const auto f = gplp::design_butterworth({10, 0.495, 25.0});
  const std::vector<double> x(400, 3.7);
  const auto y = gplp::filtfilt(x, f);
  REQUIRE(y.size() == x.size());
  for (double v : y) {
    CHECK(std::abs(v - 3.7) <= 1e-9);
  }
}

TEST_CASE("filtfilt passes low tones and rejects high tones") {
  const double fs = 25.0;
  const auto f = gplp::design_butterworth({10, 0.495, fs});
  const std::size_t n = 4000;
  const auto low = tone(0.2 * 0.495, fs, n);
  const auto high = tone(2.0 * 0.495, fs, n);
  const auto yl = gplp::filtfilt(low, f);
  const auto yh = gplp::filtfilt(high, f);
  CHECK(rms(yl, 500) == doctest::Approx(rms(low, 500)).epsilon(0.01));
  CHECK(20.0 * std::log10(rms(yh, 500) / rms(high, 500)) <= -60.0);
}

TEST_CASE("filtfilt is linear and zero phase") {
  const double fs = 25.0;
  const auto f = gplp::design_butterworth({6, 1.0, fs});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> a(600), b(600), sum(600);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
    sum[i] = 2.0 * a[i] - 0.5 * b[i];
  }
  const auto ya = gplp::filtfilt(a, f);
  const auto yb = gplp::filtfilt(b, f);
  const auto ys = gplp::filtfilt(sum, f);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CHECK(std::abs(ys[i] - (2.0 * ya[i] - 0.5 * yb[i])) <= 1e-10);
  }

  // A slow tone comes back with its peaks in place.
  const auto x = tone(0.25, fs, 1000);
  const auto y = gplp::filtfilt(x, f);
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -20; lag <= 20; ++lag) {
    double acc = 0.0;
    for (int i = 100; i < 900; ++i) {
      acc += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + lag)];
    }
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("sosfilt of an impulse decays") {
  const auto f = gplp::design_butterworth({4, 1.0, 25.0});
  std::vector<double> x(2000, 0.0);
  x[0] = 1.0;
  const auto y = gplp::sosfilt(f, x);
  double sum = 0.0;
  for (double v : y) {
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(y.back()) < 1e-12);
}

TEST_CASE("invalid designs and inputs are rejected") {
  CHECK_THROWS_AS(gplp::design_butterworth({10, 12.5, 25.0}), std::domain_error);
  CHECK_THROWS_AS(gplp::design_butterworth({10, 0.0, 25.0}), std::domain_error);
  CHECK_THROWS_AS(gplp::design_butterworth({0, 1.0, 25.0}), std::domain_error);
  const auto f = gplp::design_butterworth({10, 0.495, 25.0});
  CHECK(gplp::filtfilt_padding(f) == 33);
  const std::vector<double> short_input(33, 1.0);
  CHECK_THROWS_AS(gplp::filtfilt(short_input, f), std::domain_error);
  const std::vector<double> ok(34, 1.0);
  CHECK_NOTHROW(gplp::filtfilt(ok, f));
}
