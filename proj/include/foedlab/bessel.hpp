#pragma once

namespace foedlab {

// Modified Bessel function of the first kind I_nu(x) for real order and
// x >= 0. Power series below x = 15, large-argument asymptotic expansion
// (truncated at its smallest term) above. Relative accuracy about 1e-13 for
// the moderate orders used here (|nu| up to ~5); see notes in bessel.cpp.
double bessel_i(double nu, double x);

// log I_nu(x) for x > 0, usable far past the overflow point of the linear
// form. Needed for ratios I_nu(b)/I_nu(c) with large arguments.
double log_bessel_i(double nu, double x);

}  // namespace foedlab
