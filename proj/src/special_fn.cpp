#include "gplp/special_fn.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gplp {

namespace {

using std::numbers::pi;

// Trapezoidal step for the Faddeeva integral. The discretisation error is
// O(exp(-pi^2 / h^2)) ~ 7e-18 for h = 0.5.
constexpr double kStep = 0.5;
// Nodes t = (n + offset) * h for n in [-kHalfNodes, kHalfNodes]; exp(-t^2) at
// the outermost node is below 1e-24.
constexpr int kHalfNodes = 15;
constexpr int kNodes = 2 * kHalfNodes + 1;
// Below this |z| the Maclaurin series is used for erf, which keeps relative
// accuracy near the origin where 1 - exp(-z^2) w(iz) cancels.
constexpr double kSeriesRadius = 0.5;
// exp(x) overflows a double for x above ~709.78.
constexpr double kMaxExpArg = 709.0;

struct NodeTable {
  std::array<double, kNodes> t{};
  std::array<double, kNodes> weight{};  // h / pi * exp(-t^2)
};

NodeTable make_nodes(double offset) {
  NodeTable table;
  for (int k = 0; k < kNodes; ++k) {
    const double t = (k - kHalfNodes + offset) * kStep;
    table.t[k] = t;
    table.weight[k] = kStep / pi * std::exp(-t * t);
  }
  return table;
}

const NodeTable& integer_nodes() {
  static const NodeTable table = make_nodes(0.0);
  return table;
}

const NodeTable& half_nodes() {
  static const NodeTable table = make_nodes(0.5);
  return table;
}

// exp(-z^2) without forming z^2 as a complex number, so the modulus is
// computed first and an underflowing factor never meets an infinite phase.
ComplexValue exp_minus_square(ComplexValue z) {
  const double x = z.real();
  const double y = z.imag();
  const double log_mod = (y - x) * (y + x);
  if (log_mod < -745.0) {
    return {0.0, 0.0};
  }
  const double mod = std::exp(log_mod);
  const double phase = -2.0 * x * y;
  return {mod * std::cos(phase), mod * std::sin(phase)};
}

void require_finite(ComplexValue z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::domain_error("complex_erf: non-finite argument");
  }
}

ComplexValue erf_series(ComplexValue z) {
  const ComplexValue z2 = z * z;
  ComplexValue term = z;  // (-1)^n z^(2n+1) / n!
  ComplexValue sum = z;
  for (int n = 1; n < 60; ++n) {
    term *= -z2 / static_cast<double>(n);
    const ComplexValue contrib = term / static_cast<double>(2 * n + 1);
    sum += contrib;
    if (std::abs(contrib) <= 1e-17 * std::abs(sum)) {
      break;
    }
  }
  return 2.0 / std::sqrt(pi) * sum;
}

// erf for Re z >= 0 and |z| >= kSeriesRadius.
ComplexValue erf_right_half(ComplexValue z) {
  const double x = z.real();
  const double y = z.imag();
  const double log_mod = (y - x) * (y + x);
  if (log_mod > kMaxExpArg) {
    throw std::range_error("complex_erf: result overflows");
  }
  const ComplexValue e = exp_minus_square(z);
  if (e == ComplexValue{0.0, 0.0}) {
    return {1.0, 0.0};
  }
  ComplexValue r = 1.0 - e * faddeeva({-y, x});
  // erf maps the real and imaginary axes onto themselves.
  if (y == 0.0) {
    r.imag(0.0);
  }
  if (x == 0.0) {
    r.real(0.0);
  }
  return r;
}

}  // namespace

ComplexValue faddeeva(ComplexValue z) {
  const double x = z.real();
  const double y = z.imag();
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw std::domain_error("faddeeva: non-finite argument");
  }
  if (y < 0.0) {
    throw std::domain_error("faddeeva: requires Im z >= 0");
  }

  // Use the node set whose points stay at least h/4 away from Re z; this
  // keeps both the sum and the pole correction well conditioned on and near
  // the real axis.
  const double u = x / kStep;
  const double dist_to_integer = std::abs(u - std::nearbyint(u));
  const bool shifted = dist_to_integer < 0.25;
  const NodeTable& nodes = shifted ? half_nodes() : integer_nodes();

  ComplexValue sum{0.0, 0.0};
  for (int k = 0; k < kNodes; ++k) {
    sum += nodes.weight[k] / (z - nodes.t[k]);
  }
  ComplexValue w = ComplexValue{0.0, 1.0} * sum;

  // Residue of the pole at t = z, only needed while z is inside the strip
  // used by the error estimate.
  if (y < pi / kStep) {
    const ComplexValue e = exp_minus_square(z);
    if (e != ComplexValue{0.0, 0.0}) {
      const double q_mod = std::exp(2.0 * pi * y / kStep);
      const double q_phase = -2.0 * pi * x / kStep;
      const ComplexValue q{q_mod * std::cos(q_phase), q_mod * std::sin(q_phase)};
      w += 2.0 * e / (shifted ? 1.0 + q : 1.0 - q);
    }
  }
  return w;
}

ComplexValue complex_erf(ComplexValue z) {
  require_finite(z);
  if (z.real() < 0.0) {
    return -complex_erf(-z);
  }
  if (std::abs(z) < kSeriesRadius) {
    return erf_series(z);
  }
  // conj symmetry: compute on Im z >= 0 only
  if (z.imag() < 0.0) {
    return std::conj(erf_right_half(std::conj(z)));
  }
  return erf_right_half(z);
}

double damped_re_erf(double a, double c) {
  if (!std::isfinite(a) || !std::isfinite(c)) {
    throw std::domain_error("damped_re_erf: non-finite argument");
  }
  if (a < 0.0) {
    return -damped_re_erf(-a, c);
  }
  // exp(-c^2) erf(a - ic) = exp(-c^2) - exp(-a^2) exp(2iac) w(c + ia)
  const double envelope = std::exp(-c * c);
  const double decay = std::exp(-a * a);
  if (decay == 0.0) {
    return envelope;
  }
  const ComplexValue w = faddeeva({c, a});
  const double phase = 2.0 * a * c;
  const double re_rotated = std::cos(phase) * w.real() - std::sin(phase) * w.imag();
  return envelope - decay * re_rotated;
}

double re_erf_scaled(double a, double c) {
  if (!std::isfinite(a) || !std::isfinite(c)) {
    throw std::domain_error("re_erf_scaled: non-finite argument");
  }
  if (a < 0.0) {
    return -re_erf_scaled(-a, c);
  }
  if (a == 0.0) {
    return 0.0;  // erf of a purely imaginary argument is purely imaginary
  }
  // Re erf(a - ic) = 1 - exp(c^2 - a^2) Re(exp(2iac) w(c + ia))
  const double log_scale = (c - a) * (c + a);
  const ComplexValue w = faddeeva({c, a});
  const double phase = 2.0 * a * c;
  const double re_rotated = std::cos(phase) * w.real() - std::sin(phase) * w.imag();
  if (log_scale > kMaxExpArg) {
    if (re_rotated == 0.0) {
      return 1.0;
    }
    const double log_mag = log_scale + std::log(std::abs(re_rotated));
    if (log_mag > kMaxExpArg) {
      throw std::range_error("re_erf_scaled: result overflows");
    }
    return 1.0 - std::copysign(std::exp(log_mag), re_rotated);
  }
  return 1.0 - std::exp(log_scale) * re_rotated;
}

}  // namespace gplp
