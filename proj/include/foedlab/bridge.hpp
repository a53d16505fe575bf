#pragma once

#include <string>
#include <vector>

#include "foedlab/foed.hpp"
#include "foedlab/functions.hpp"
#include "foedlab/model.hpp"
#include "foedlab/quadrature.hpp"
#include "foedlab/report.hpp"

namespace foedlab {

struct FddResult {
    double value = 0.0;
    // one of: backward_nested, backward_bivariate, degenerate_xindi,
    // forward, monte_carlo
    std::string method;
    double error_estimate = 0.0;
};

// Backward bridge operator:
//   (Lambda_t f)(z) = integral f(v) p_t(v, z) g(v) dv / (g(z) E(t, z)).
// Equals the conditional expectation E[ f(X_0) | X_t = z ]. The denominator
// is the time-t marginal density at z; its underflow is a domain error.
double bridge_apply(const ProcessModel& model, double t, const TestFunction& f,
                    double z, const QuadratureConfig& cfg = {});

// The component of f orthogonal to the bridge projection, as a lazily
// evaluated function: z -> f(z) - (Lambda_t f)(z). Jump metadata is
// inherited from f (Lambda_t f itself is smooth in z).
TestFunction orthogonal_component(const ProcessModel& model, double t,
                                  const TestFunction& f,
                                  const QuadratureConfig& cfg = {});

// Xi functional: prod_i f_i(z) E(t_i - t_{i-1}, z) over i = 1..n with
// t_0 = 0. fs must have exactly grid.size() entries.
double xi(const ProcessModel& model, const std::vector<TestFunction>& fs,
          const TimeGrid& grid, double z, const QuadratureConfig& cfg = {});

// E[ f_0(X_0) f_1(X_{t_1}) ... f_n(X_{t_n}) ] via the nested backward
// factorization: the expectation under the initial law of
//   H_n,  H_i = f_i * E(dt_i, .) * Lambda_{dt_i} H_{i-1},  H_0 = f_0,
// with dt_i = t_i - t_{i-1}. fs = (f_0, ..., f_n), so fs.size() must be
// grid.size() + 1. Each nesting level multiplies quadrature cost, so only
// n <= 2 is supported; use fdd_bivariate or the forward oracle beyond that.
FddResult fdd_backward_nested(const ProcessModel& model,
                              const std::vector<TestFunction>& fs,
                              const TimeGrid& grid,
                              const QuadratureConfig& cfg = {});

// E[ f_1(X_{t_1}) ... f_n(X_{t_n}) ] as the two-dimensional integral
//   int int f_n(x) W_{n-1}(v) p_{t_n - t_{n-1}}(v, x) g(v) dv dx
// (an independent initial copy carries the weight). W_{n-1} is the exact
// backward chain through the first n-1 epochs: W_1 = f_1 E(t_1, .) and
// W_k = f_k E(dt_k, .) Lambda_{dt_k} W_{k-1}, so for n = 2 the weight is
// the closed single-state product and deeper grids pay one bridge layer per
// extra epoch. The outer integral stays two-dimensional for every n >= 2.
// fs = (f_1, ..., f_n) with fs.size() == grid.size().
FddResult fdd_bivariate(const ProcessModel& model,
                        const std::vector<TestFunction>& fs, const TimeGrid& grid,
                        const QuadratureConfig& cfg = {});

struct XindiResult {
    FddResult result;            // the single-integral evaluation
    double reference_value = 0.0;  // fdd_bivariate (n >= 2) or the direct
                                   // single-epoch expectation (n = 1)
    double discrepancy = 0.0;
};

// Single-integral candidate formula int Xi^{(n)}(t_1..t_n; z) g(z) dz for the
// same expectation as fdd_bivariate. This formula does not hold in general
// (for f == 1 on gauss_gauss a=2, grid (1,2) it yields 2/sqrt(3), not 1), so
// the result always carries the discrepancy against the two-dimensional
// route. The exponent product can fail to be integrable against g; a tail
// growth probe runs first and refusal is a domain error with diagnostics.
XindiResult fdd_degenerate_xindi(const ProcessModel& model,
                                 const std::vector<TestFunction>& fs,
                                 const TimeGrid& grid,
                                 const QuadratureConfig& cfg = {});

// Grid evidence that trial functions are not annihilated by Lambda_t: for
// each trial h, one row with sup_z |Lambda_t h(z)| over a probe grid and one
// row with max_lambda |E h(X_0) e^{lambda X_0}| over a small lambda grid.
// A value above the reporting threshold certifies h is outside the kernel;
// probes can only certify non-membership, never triviality itself.
std::vector<IdentityReport> kernel_triviality_probe(
    const ProcessModel& model, double t, const std::vector<TestFunction>& trials,
    const QuadratureConfig& cfg = {});

}  // namespace foedlab
