#ifndef GPLP_SPECIAL_FN_HPP
#define GPLP_SPECIAL_FN_HPP

#include <complex>

namespace gplp {

using ComplexValue = std::complex<double>;

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
///
/// Evaluated with the pole-corrected trapezoidal rule on the integral
/// representation w(z) = (i/pi) int exp(-t^2) / (z - t) dt, which is accurate
/// to a few ulps over the whole closed upper half plane. Throws
/// std::domain_error for non-finite input or Im z < 0.
ComplexValue faddeeva(ComplexValue z);

/// Error function of a complex argument.
///
/// Small |z| uses the Maclaurin series; elsewhere erf(z) = 1 - exp(-z^2) w(iz)
/// on the right half plane, with oddness covering Re z < 0. Both symmetries
/// erf(-z) = -erf(z) and erf(conj z) = conj(erf z) hold exactly.
/// Throws std::domain_error on non-finite input and std::range_error when the
/// result is not representable (|Im z| much larger than |Re z|, beyond ~26).
ComplexValue complex_erf(ComplexValue z);

/// Re(erf(a - i c)).
///
/// Goes through the Faddeeva function so that no intermediate exp(c^2)
/// is formed unless the result itself is that large. Throws std::range_error
/// if the result overflows a double.
double re_erf_scaled(double a, double c);

/// exp(-c^2) * Re(erf(a - i c)).
///
/// Bounded by 1 in magnitude for every finite (a, c); this is the form the
/// band-limited kernel needs, where exp(-c^2) is the SE envelope.
double damped_re_erf(double a, double c);

}  // namespace gplp

#endif  // GPLP_SPECIAL_FN_HPP
