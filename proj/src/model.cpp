#include "foedlab/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "foedlab/bessel.hpp"

namespace foedlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kWindowSigmas = 12.0;

double log_normal_density(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * kPi * var) - 0.5 * d * d / var;
}

// (1 - e^{-2 lambda t}) / (2 lambda), continuous at lambda = 0.
double ou_variance(double lambda, double t) {
  if (lambda == 0.0) return t;
  return -std::expm1(-2.0 * lambda * t) / (2.0 * lambda);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> e) : epochs(std::move(e)) {
  double prev = 0.0;
  for (double t : epochs) {
    if (!(t > prev) || !std::isfinite(t)) {
      throw std::invalid_argument(
          "TimeGrid: epochs must be finite and strictly increasing from 0");
    }
    prev = t;
  }
}

ProcessModel make_gauss_gauss(double a) {
  require(a > 0.0, "gauss_gauss: a must be > 0");
  ProcessModel m;
  m.name = "gauss_gauss";
  m.params = {{"a", a}};
  const double inf = std::numeric_limits<double>::infinity();
  m.domain = {-inf, inf};

  m.log_initial_density = [a](double z) { return log_normal_density(z, 0.0, a); };
  m.initial_density = [a](double z) {
    return std::exp(log_normal_density(z, 0.0, a));
  };
  m.log_transition_density = [](double t, double x, double y) {
    return log_normal_density(y, x, t);
  };
  m.transition_density = [](double t, double x, double y) {
    return std::exp(log_normal_density(y, x, t));
  };
  m.log_closed_form_foed = [a](double t, double z) {
    return 0.5 * std::log(a / (a + t)) + z * z * t / (2.0 * a * (a + t));
  };
  m.closed_form_foed = [m_log = m.log_closed_form_foed](double t, double z) {
    return std::exp(m_log(t, z));
  };

  m.generator.apply = [](double, double, double, double d2) {
    return 0.5 * d2;
  };
  m.generator.apply_squared = [](double, double, double, double, double,
                                 double d4) { return 0.25 * d4; };

  m.sample_step = [](CounterRng& rng, double t, double x) {
    return x + std::sqrt(t) * rng.next_normal();
  };
  m.sample_initial = [a](CounterRng& rng) {
    return std::sqrt(a) * rng.next_normal();
  };

  m.marginal_mean = [](double) { return 0.0; };
  m.marginal_sd = [a](double t) { return std::sqrt(a + t); };
  m.marginal_window = [a](double t) {
    const double w = kWindowSigmas * std::sqrt(a + t);
    return Interval{-w, w};
  };
  m.transition_window = [](double t, double x) {
    const double w = kWindowSigmas * std::sqrt(t);
    return Interval{x - w, x + w};
  };
  m.source_window = m.transition_window;
  return m;
}

ProcessModel make_ou_shift(double a, double lambda, double y0) {
  require(a > 0.0, "ou_shift: a must be > 0");
  require(lambda >= 0.0, "ou_shift: lambda must be >= 0");
  ProcessModel m;
  m.name = "ou_shift";
  m.params = {{"a", a}, {"lambda", lambda}, {"y0", y0}};
  const double inf = std::numeric_limits<double>::infinity();
  m.domain = {-inf, inf};

  auto nu = [lambda, y0](double t) { return y0 * std::exp(-lambda * t); };
  const double var_a = ou_variance(lambda, a);
  const double nu_a = nu(a);

  m.log_initial_density = [nu_a, var_a](double z) {
    return log_normal_density(z, nu_a, var_a);
  };
  m.initial_density = [nu_a, var_a](double z) {
    return std::exp(log_normal_density(z, nu_a, var_a));
  };
  m.log_transition_density = [lambda](double t, double x, double y) {
    return log_normal_density(y, x * std::exp(-lambda * t),
                              ou_variance(lambda, t));
  };
  m.transition_density = [lt = m.log_transition_density](double t, double x,
                                                         double y) {
    return std::exp(lt(t, x, y));
  };
  m.log_closed_form_foed = [lambda, a, nu, nu_a, var_a](double t, double z) {
    const double var_ta = ou_variance(lambda, t + a);
    const double da = z - nu_a;
    const double dta = z - nu(t + a);
    return 0.5 * std::log(var_a / var_ta) - dta * dta / (2.0 * var_ta) +
           da * da / (2.0 * var_a);
  };
  m.closed_form_foed = [m_log = m.log_closed_form_foed](double t, double z) {
    return std::exp(m_log(t, z));
  };

  m.generator.apply = [lambda](double x, double, double d1, double d2) {
    return 0.5 * d2 - lambda * x * d1;
  };
  m.generator.apply_squared = [lambda](double x, double, double d1, double d2,
                                       double d3, double d4) {
    return 0.25 * d4 - lambda * x * d3 + (lambda * lambda * x * x - lambda) * d2 +
           lambda * lambda * x * d1;
  };

  m.sample_step = [lambda](CounterRng& rng, double t, double x) {
    return x * std::exp(-lambda * t) +
           std::sqrt(ou_variance(lambda, t)) * rng.next_normal();
  };
  m.sample_initial = [nu_a, var_a](CounterRng& rng) {
    return nu_a + std::sqrt(var_a) * rng.next_normal();
  };

  m.marginal_mean = [nu, a](double t) { return nu(t + a); };
  m.marginal_sd = [lambda, a](double t) {
    return std::sqrt(ou_variance(lambda, t + a));
  };
  m.marginal_window = [mm = m.marginal_mean, ms = m.marginal_sd](double t) {
    const double c = mm(t);
    const double w = kWindowSigmas * ms(t);
    return Interval{c - w, c + w};
  };
  m.transition_window = [lambda](double t, double x) {
    const double c = x * std::exp(-lambda * t);
    const double w = kWindowSigmas * std::sqrt(ou_variance(lambda, t));
    return Interval{c - w, c + w};
  };
  m.source_window = [lambda](double t, double x) {
    // p_t(z, x) as a function of z is a Gaussian in x centered at
    // z e^{-lambda t}; invert the centering map.
    const double scale = std::exp(lambda * t);
    const double w = kWindowSigmas * std::sqrt(ou_variance(lambda, t));
    return Interval{(x - w) * scale, (x + w) * scale};
  };
  return m;
}

ProcessModel make_besq_shift(double a, double delta, double y0) {
  require(a > 0.0, "besq_shift: a must be > 0");
  // delta = 0 puts an atom at the absorbing boundary that the free density
  // form cannot represent.
  require(delta > 0.0, "besq_shift: delta must be > 0");
  require(y0 > 0.0,
          "besq_shift: y0 must be > 0 (the closed-form exponent divides by "
          "I_nu(sqrt(y0 z)/a))");
  ProcessModel m;
  m.name = "besq_shift";
  m.params = {{"a", a}, {"delta", delta}, {"y0", y0}};
  m.domain = {0.0, std::numeric_limits<double>::infinity()};
  const double nu = 0.5 * delta - 1.0;

  auto log_p = [nu](double t, double x, double y) {
    if (!(t > 0.0) || !(x > 0.0)) {
      throw std::domain_error("besq transition needs t > 0, x > 0");
    }
    if (y <= 0.0) return -std::numeric_limits<double>::infinity();
    return -std::log(2.0 * t) + 0.5 * nu * (std::log(y) - std::log(x)) -
           (x + y) / (2.0 * t) + log_bessel_i(nu, std::sqrt(x * y) / t);
  };
  m.log_transition_density = log_p;
  m.transition_density = [log_p](double t, double x, double y) {
    return std::exp(log_p(t, x, y));
  };
  m.log_initial_density = [log_p, a, y0](double z) { return log_p(a, y0, z); };
  m.initial_density = [li = m.log_initial_density](double z) {
    return std::exp(li(z));
  };
  m.log_closed_form_foed = [a, y0, nu](double t, double z) {
    if (!(z > 0.0)) throw std::domain_error("besq exponent needs z > 0");
    if (t == 0.0) return 0.0;
    const double r = std::sqrt(y0 * z);
    return std::log(a / (a + t)) + (y0 + z) * t / (2.0 * a * (a + t)) +
           log_bessel_i(nu, r / (t + a)) - log_bessel_i(nu, r / a);
  };
  m.closed_form_foed = [m_log = m.log_closed_form_foed](double t, double z) {
    return std::exp(m_log(t, z));
  };

  m.generator.apply = [delta](double x, double, double d1, double d2) {
    return 2.0 * x * d2 + delta * d1;
  };
  m.generator.apply_squared = [delta](double x, double, double, double d2,
                                      double d3, double d4) {
    return 4.0 * x * x * d4 + (8.0 * x + 4.0 * delta * x) * d3 +
           delta * (2.0 + delta) * d2;
  };

  // Y_t / t given Y_0 = x is noncentral chi-square with delta degrees of
  // freedom and noncentrality x/t: a Poisson(x/(2t)) mixture of gammas.
  m.sample_step = [delta](CounterRng& rng, double t, double x) {
    const auto n = rng.next_poisson(x / (2.0 * t));
    const double shape = 0.5 * delta + static_cast<double>(n);
    if (shape == 0.0) return 0.0;
    return 2.0 * t * rng.next_gamma(shape);
  };
  m.sample_initial = [step = m.sample_step, a, y0](CounterRng& rng) {
    return step(rng, a, y0);
  };

  auto mean_after = [delta](double tau, double from) {
    return from + delta * tau;
  };
  auto sd_after = [delta](double tau, double from) {
    return std::sqrt(4.0 * from * tau + 2.0 * delta * tau * tau);
  };
  m.marginal_mean = [mean_after, a, y0](double t) {
    return mean_after(t + a, y0);
  };
  m.marginal_sd = [sd_after, a, y0](double t) { return sd_after(t + a, y0); };
  // The chi-square right tail decays like e^{-z/(2 tau)}, slower than a
  // Gaussian, so the upper edge gets 80 tau of extra room on top of the
  // 12-sigma rule.
  m.marginal_window = [mean_after, sd_after, a, y0](double t) {
    const double tau = t + a;
    const double hi = mean_after(tau, y0) + kWindowSigmas * sd_after(tau, y0) +
                      80.0 * tau;
    return Interval{0.0, hi};
  };
  m.transition_window = [mean_after, sd_after](double t, double x) {
    const double hi =
        mean_after(t, x) + kWindowSigmas * sd_after(t, x) + 80.0 * t;
    return Interval{0.0, hi};
  };
  m.source_window = [](double t, double x) {
    // In z, p_t(z, x) concentrates where sqrt(z) is within O(sqrt(t)) of
    // sqrt(x); pad the square generously plus the exponential tail room.
    const double r = std::sqrt(x) + kWindowSigmas * std::sqrt(t);
    return Interval{0.0, r * r + 80.0 * t};
  };
  return m;
}

ProcessModel make_model(const std::string& name,
                        const std::map<std::string, double>& params) {
  auto get = [&params](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto check_keys = [&params, &name](std::initializer_list<const char*> known) {
    for (const auto& kv : params) {
      bool ok = false;
      for (const char* k : known) {
        if (kv.first == k) ok = true;
      }
      if (!ok) {
        throw std::invalid_argument("model '" + name +
                                    "': unknown parameter '" + kv.first + "'");
      }
    }
  };
  if (name == "gauss_gauss") {
    check_keys({"a"});
    return make_gauss_gauss(get("a", 1.0));
  }
  if (name == "ou_shift") {
    check_keys({"a", "lambda", "y0"});
    return make_ou_shift(get("a", 1.0), get("lambda", 0.5), get("y0", 0.0));
  }
  if (name == "besq_shift") {
    check_keys({"a", "delta", "y0"});
    return make_besq_shift(get("a", 1.0), get("delta", 2.0), get("y0", 1.0));
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::vector<double> sample_path(const ProcessModel& model,
                                const TimeGrid& grid, CounterRng& rng) {
  if (!model.has_sampler()) {
    throw std::logic_error("sample_path: model has no sampler");
  }
  std::vector<double> path;
  path.reserve(grid.size() + 1);
  double x = model.sample_initial(rng);
  path.push_back(x);
  double prev = 0.0;
  for (double t : grid.epochs) {
    x = model.sample_step(rng, t - prev, x);
    path.push_back(x);
    prev = t;
  }
  return path;
}

}  // namespace foedlab
