#pragma once

#include <functional>

#include "foedlab/functions.hpp"
#include "foedlab/model.hpp"
#include "foedlab/quadrature.hpp"
#include "foedlab/report.hpp"

namespace foedlab {

enum class FoedMode {
    closed_form,  // use the model's closed form; error if absent
    quadrature,   // always integrate the transition density against the
                  // initial density, even when a closed form exists
};

// Exponential functional E(t, x): the ratio phi(t, x) / g(x) where
// phi(t, x) = integral of p_t(z, x) g(z) dz over source points z and
// g is the initial density.  E(t, x) multiplies g pointwise to give the
// time-t marginal density, and log E(t, x) integrates the rate F in t.
//
// Throws std::domain_error when g(x) is not strictly positive.
double foed_exponent(const ProcessModel& model, double t, double x,
                     FoedMode mode = FoedMode::closed_form,
                     const QuadratureConfig& cfg = {});

// Rate F(t, x) = d/dt log E(t, x), computed by central finite differences
// on log E with one Richardson extrapolation step.  Near t = 0 a forward
// stencil is used so the exponent is never evaluated at negative times.
double foed_rate(const ProcessModel& model, double t, double x,
                 FoedMode mode = FoedMode::closed_form,
                 const QuadratureConfig& cfg = {});

// Marginal density of the process at time t: g(x) E(t, x).
double marginal_density(const ProcessModel& model, double t, double x,
                        FoedMode mode = FoedMode::closed_form,
                        const QuadratureConfig& cfg = {});

// Ratio E(t, z) / E(s, z) for 0 <= s <= t, used to check the semiflow
// property of the exponent family.
double foed_exponent_from(const ProcessModel& model, double s, double t, double z,
                          FoedMode mode = FoedMode::closed_form,
                          const QuadratureConfig& cfg = {});

// Iterated rate ladder L^n F evaluated at (t, x):
//   L^0 = 1,  L^1 = F,  L^{m+1} = d/dt L^m + F * L^m.
// Supported for n in {0, 1, 2, 3}.  Differentiation is by central finite
// differences with step sizes widened per order and one Richardson step.
double ln_f(const ProcessModel& model, int n, double t, double x,
            FoedMode mode = FoedMode::closed_form,
            const QuadratureConfig& cfg = {});

// Checks E f(X_t) = E[ f(X_0) + A f(X_0) * integral_0^t E(s, X_0) ds ]
// for a smooth test function f with derivatives supplied.  The left side
// is integrated against the time-t marginal; the right side against the
// initial density.  Requires the model to expose a generator.
IdentityReport check_generator_identity(const ProcessModel& model,
                                        const SmoothFunction& f, double t,
                                        double tolerance,
                                        const QuadratureConfig& cfg = {});

// Checks E A^n f(X_t) = E[ f(X_0) L^n F(t, X_0) E(t, X_0) ], i.e.
//   integral A^n f(x) g(x) E(t, x) dx = integral f(x) L^n F(t, x) g(x) E(t, x) dx,
// the n-th time derivative of the exponential representation matched against
// the n-th generator moment.  Supported for n in {1, 2}.
IdentityReport check_an_identity(const ProcessModel& model,
                                 const SmoothFunction& f, int n, double t,
                                 double tolerance,
                                 const QuadratureConfig& cfg = {});

}  // namespace foedlab
