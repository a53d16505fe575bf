#pragma once

#include <Eigen/Dense>
#include <vector>

#include "foedlab/functions.hpp"
#include "foedlab/model.hpp"
#include "foedlab/quadrature.hpp"

namespace foedlab {

// Forward-route oracles. These never touch the exponent machinery: they
// price finite-dimensional expectations straight off the transition chain,
// by simulation, or by Gaussian linear algebra, so backward-route results
// can be checked against an independent computation.

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
    unsigned long long seed = 0;
};

struct GaussianVector {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

// E[ f_0(X_0) f_1(X_{t_1}) ... f_n(X_{t_n}) ] by nested quadrature over the
// chain density g(z_0) prod p_{t_i - t_{i-1}}(z_{i-1}, z_i). fs must have
// grid.size() + 1 entries (f_0 acts on the initial state) and the total
// dimension n + 1 must be at most 4.
double fdd_forward(const ProcessModel& model, const TimeGrid& grid,
                   const std::vector<TestFunction>& fs,
                   const QuadratureConfig& cfg = {});

// Same expectation by Monte Carlo over sampled paths. Each path uses its own
// counter substream, so the estimate is independent of evaluation order and
// reproducible from (seed, n_paths) alone.
MCEstimate fdd_monte_carlo(const ProcessModel& model, const TimeGrid& grid,
                           const std::vector<TestFunction>& fs, long n_paths,
                           unsigned long long seed);

// Joint law of (X_{s_1}, ..., X_{s_k}) for the Gaussian zoo members
// (gauss_gauss and ou_shift). Epochs may include 0 and repeats, in any
// order. Other models are rejected.
GaussianVector gaussian_joint(const ProcessModel& model,
                              const std::vector<double>& epochs);

// Conditions a Gaussian vector on exact observations: returns the law of
// the unobserved coordinates (in their original relative order) given
// component observed_idx[j] = observed_values[j]. Uses a Cholesky
// factorization of the observed block without pivoting; a non-positive
// observed block is an error, never silently repaired.
GaussianVector gaussian_condition(const GaussianVector& joint,
                                  const std::vector<int>& observed_idx,
                                  const std::vector<double>& observed_values);

// P(Z_1 > 0, Z_2 > 0) for standard bivariate normal with correlation rho.
double bivariate_normal_orthant(double rho);

}  // namespace foedlab
