#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace foedlab {

// One-dimensional integration interval. Endpoints may be +-infinity; the
// engine maps infinite ends through a rational substitution. Callers that
// know the integrand's support (Gaussian tails etc.) should pass a finite
// window instead, which is both faster and more robust for narrow bumps.
struct Interval {
  double lo;
  double hi;
};

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  // Tail mass a caller-side truncation window is allowed to discard. The
  // engine does not truncate by itself; the field documents the contract
  // under which model-supplied windows were chosen (see model.hpp).
  double truncation_mass = 1e-12;
  int gauss_nodes = 64;
};

struct RootFindConfig {
  double bracket_lo = -1.0;
  double bracket_hi = 1.0;
  double x_tol = 1e-10;
  int max_iter = 200;
  int scan_points = 512;
};

// Raised when the subdivision budget is exhausted. Carries the best
// available estimate so callers may still inspect it.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double best, double err)
      : std::runtime_error(msg), best_estimate(best), error_estimate(err) {}
  double best_estimate;
  double error_estimate;
};

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
// computed once per n and cached.
const std::vector<double>& gauss_legendre_nodes(int n);
const std::vector<double>& gauss_legendre_weights(int n);

// Adaptive panel integration. Panels are bisected greedily (largest error
// estimate first, leftmost on ties) until the summed error estimate drops
// below max(abs_tol, rel_tol*|result|). split_points seed panel boundaries,
// e.g. at indicator jumps, so refinement is not wasted hunting them.
// Deterministic: identical inputs give bit-identical results.
double integrate_1d(const std::function<double(double)>& f, Interval domain,
                    const QuadratureConfig& cfg = {},
                    const std::vector<double>& split_points = {});

// Iterated integral, outer interval first: the outer integrand is an inner
// integrate_1d at each outer node. Tolerances are split sqrt-wise between
// the two levels.
double integrate_2d(const std::function<double(double, double)>& f,
                    Interval ix, Interval iy, const QuadratureConfig& cfg = {},
                    const std::vector<double>& splits_x = {},
                    const std::vector<double>& splits_y = {});

// Recursively nested adaptive quadrature, 1 <= n <= 4. Cost grows
// exponentially with n; n = 1 delegates to integrate_1d unchanged.
// split_points, when given, must have one (possibly empty) list per
// dimension.
double integrate_nd(const std::function<double(const std::vector<double>&)>& f,
                    const std::vector<Interval>& domain,
                    const QuadratureConfig& cfg = {},
                    const std::vector<std::vector<double>>& split_points = {});

// Scan scan_points equispaced points over the bracket, bisect every sign
// change down to x_tol. Returns sorted roots. Tangential roots (touching
// zero without a sign change) are not detected.
std::vector<double> find_roots(const std::function<double(double)>& f,
                               const RootFindConfig& cfg);

// Central finite differences, order 1 or 2. h = 0 picks the default step
// max(1e-5, 1e-5*|x|).
double derivative_fd(const std::function<double(double)>& f, double x,
                     int order = 1, double h = 0.0);

// One-sided (forward) stencils for points at a domain boundary, e.g. time
// derivatives at t = 0.
double derivative_fd_forward(const std::function<double(double)>& f, double x,
                             int order = 1, double h = 0.0);

}  // namespace foedlab
