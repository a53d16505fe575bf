#pragma once

#include <vector>

#include "foedlab/model.hpp"
#include "foedlab/quadrature.hpp"

namespace foedlab {

// Kolmogorov distance between the law of X_t and the law of B_t, where B is
// a Brownian motion started from the model's own initial law. The comparator
// always inherits the initial law; there is no way to ask for a mismatched
// pair.

struct KolmogorovReport {
    double distance_foed = 0.0;   // max |psi| over the critical points found
    double distance_grid = 0.0;   // grid-scan oracle value
    std::vector<double> critical_points;
    std::vector<double> psi_at_critical;
    double agreement_gap = 0.0;   // |distance_foed - distance_grid|
    double split_form_gap = 0.0;  // consistency of the split evaluation of psi
                                  // at the arg-max critical point
    // Set when the critical-point route missed the grid supremum (tangential
    // stationary points are invisible to sign-change root finding, and an
    // identically-zero residual yields no roots). The grid value is then the
    // authoritative distance.
    bool foed_incomplete = false;
};

// psi(x) = P(X_t <= x) - P(B_t <= x)
//        = int_{-inf}^{x} E(t, z) g(z) dz - int Phi((x - z)/sqrt(t)) g(z) dz.
double psi_fn(const ProcessModel& model, double t, double x,
              const QuadratureConfig& cfg = {});

// Stationary-point residual of psi:
//   g(x) E(t, x) - E[ 1_{G <= 0} (g(x - sqrt(t) G) + g(x + sqrt(t) G)) ]
// with G standard normal, i.e. the difference of the two marginal densities
// at x. Roots are the candidate critical points of psi.
double xocon_residual(const ProcessModel& model, double t, double x,
                      const QuadratureConfig& cfg = {});

// Same residual with the folded expectation simplified by the symmetry of G
// to g(x) E(t, x) - E g(x + sqrt(t) G); agrees with xocon_residual to
// quadrature tolerance and exists as a cross-check.
double xocon_residual_symmetric(const ProcessModel& model, double t, double x,
                                const QuadratureConfig& cfg = {});

// Critical-point route: root-scan of xocon_residual over the bracket
// initial-mean +- 12 max(initial, time-t) standard deviations, |psi| at each
// root, plus the grid oracle and their agreement gap. Also re-evaluates psi
// at the arg-max root in the split form
//   int_{-inf}^{x0} (E(t,z) - Phi((x0-z)/sqrt(t))) g(z) dz
//     - int_{x0}^{inf} Phi((x0-z)/sqrt(t)) g(z) dz
// and records the deviation as split_form_gap.
//
// The scan argument contributes x_tol, max_iter, and scan_points; its bracket
// fields are ignored because the bracket is always derived from the model.
KolmogorovReport kolmogorov_distance_foed(const ProcessModel& model, double t,
                                          const QuadratureConfig& cfg = {},
                                          const RootFindConfig& scan = {});

// Grid oracle: sup of |psi| over 4096 base points spanning the same bracket,
// with two refinement passes around the running arg-max candidates.
double kolmogorov_distance_grid(const ProcessModel& model, double t,
                                const QuadratureConfig& cfg = {});

}  // namespace foedlab
