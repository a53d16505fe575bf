#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "foedlab/quadrature.hpp"
#include "foedlab/rng.hpp"

namespace foedlab {

// Grid of observation epochs 0 < t_1 < ... < t_n. The anchor epoch t_0 = 0
// is implicit and always refers to the initial state.
struct TimeGrid {
  std::vector<double> epochs;

  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> e);  // validates on construction

  std::size_t size() const { return epochs.size(); }
};

// Closed-form action of the infinitesimal generator on a smooth function,
// given the values of f and its derivatives at x. All zoo members are
// one-dimensional diffusions, so this shape is enough; apply_squared is the
// analytically iterated A^2 used by the order-two identity checks.
struct Generator {
  std::function<double(double x, double f, double d1, double d2)> apply;
  std::function<double(double x, double f, double d1, double d2, double d3,
                       double d4)>
      apply_squared;
};

// A time-homogeneous Markov process with an absolutely continuous initial
// law g and transition densities p_t(x, y) (x = source, y = target).
// Everything is immutable after construction and safe to share.
//
// The window members are quadrature support hints: outside the returned
// interval the corresponding density carries less mass than the engine's
// truncation_mass contract (Gaussian tails at 12 standard deviations; the
// squared-Bessel windows add padding for their slower exponential tail).
struct ProcessModel {
  std::string name;
  std::map<std::string, double> params;
  Interval domain;

  std::function<double(double z)> initial_density;      // g
  std::function<double(double z)> log_initial_density;  // log g
  std::function<double(double t, double x, double y)> transition_density;
  std::function<double(double t, double x, double y)> log_transition_density;

  // e^{int_0^t F(u, z) du} in closed form, when the model has one. All three
  // zoo members do; the quadrature fallback in the foed module covers the
  // general contract.
  std::function<double(double t, double z)> closed_form_foed;
  std::function<double(double t, double z)> log_closed_form_foed;

  Generator generator;

  // One transition step X_{t} ~ p_t(x, .) and a draw from g.
  std::function<double(CounterRng&, double t, double x)> sample_step;
  std::function<double(CounterRng&)> sample_initial;

  std::function<double(double t)> marginal_mean;
  std::function<double(double t)> marginal_sd;
  std::function<Interval(double t)> marginal_window;  // support of mu_t
  std::function<Interval(double t, double x)> transition_window;  // p_t(x, .)
  std::function<Interval(double t, double x)> source_window;      // p_t(., x)

  bool has_closed_form() const { return static_cast<bool>(closed_form_foed); }
  bool has_generator() const { return static_cast<bool>(generator.apply); }
  bool has_sampler() const { return static_cast<bool>(sample_step); }
};

// Brownian motion with initial time shift a > 0: X_t = B_{t+a}, so the
// initial law is N(0, a) and p_t(x, .) = N(x, t).
ProcessModel make_gauss_gauss(double a);

// Ornstein-Uhlenbeck started at y0, shifted by a: X_t = Y_{t+a} where
// dY = -lambda Y dt + dB, Y_0 = y0. lambda = 0 with y0 = 0 degenerates to
// the Gauss-Gauss model.
ProcessModel make_ou_shift(double a, double lambda, double y0);

// Squared Bessel process of dimension delta started at y0 > 0, shifted by
// a: X_t = Y_{t+a} with dY = 2 sqrt(Y) dB + delta dt. The transition density
// ratio in the closed-form exponent divides by I_nu(sqrt(y0 z)/a), which is
// why y0 = 0 is rejected. delta = 0 is rejected as well: it puts an atom at
// the absorbing origin that the free density form cannot represent.
// Quadrature batteries use delta >= 2 to stay clear of the origin
// singularity of p_t for delta < 2.
ProcessModel make_besq_shift(double a, double delta, double y0);

// Catalog lookup used by the CLI: name in {gauss_gauss, ou_shift,
// besq_shift}; unknown names or parameter keys are rejected. Defaults:
// a = 1 everywhere, lambda = 0.5, y0 = 0 (ou_shift) / 1 (besq_shift),
// delta = 2.
ProcessModel make_model(const std::string& name,
                        const std::map<std::string, double>& params);

// (x_0, x_1, ..., x_n) with x_0 ~ g and x_i ~ p_{t_i - t_{i-1}}(x_{i-1}, .).
// Deterministic given the generator state.
std::vector<double> sample_path(const ProcessModel& model,
                                const TimeGrid& grid, CounterRng& rng);

}  // namespace foedlab
