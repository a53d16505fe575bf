#include "foedlab/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace foedlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSeriesAsymptoticSwitch = 15.0;

bool is_negative_integer(double nu) {
  return nu < 0.0 && nu == std::floor(nu);
}

// Ascending power series sum_k (x/2)^{nu+2k} / (k! Gamma(nu+k+1)). All terms
// are positive for nu > -1; for lower non-integer orders the sign pattern of
// the leading terms is carried by the Gamma recurrence.
double series_i(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= q / ((k + 1.0) * (nu + k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// log of the large-argument expansion
//   I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k,
// truncated at the smallest term. Adequate (~1e-12 relative) for the
// moderate orders this library needs once x is past the switch point.
double log_asymptotic_i(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double odd = 2.0 * k + 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * x * (k + 1.0));
    if (std::abs(next) >= std::abs(term)) break;
    sum += next;
    term = next;
    if (std::abs(next) < 1e-18 * std::abs(sum)) break;
  }
  return x - 0.5 * std::log(2.0 * kPi * x) + std::log(sum);
}

}  // namespace

double bessel_i(double nu, double x) {
  if (x < 0.0) throw std::invalid_argument("bessel_i: x must be >= 0");
  if (is_negative_integer(nu)) nu = -nu;  // I_{-n} = I_n
  if (x == 0.0) {
    if (nu == 0.0) return 1.0;
    if (nu > 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  if (x <= kSeriesAsymptoticSwitch) return series_i(nu, x);
  return std::exp(log_asymptotic_i(nu, x));
}

double log_bessel_i(double nu, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("log_bessel_i: x must be > 0");
  if (is_negative_integer(nu)) nu = -nu;
  if (x <= kSeriesAsymptoticSwitch) {
    const double value = series_i(nu, x);
    if (!(value > 0.0)) {
      throw std::domain_error("log_bessel_i: I_nu(x) <= 0 at this order");
    }
    return std::log(value);
  }
  return log_asymptotic_i(nu, x);
}

}  // namespace foedlab
