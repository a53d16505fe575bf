#include "foedlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>

namespace foedlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Legendre nodes by Newton iteration on P_n, starting from the Chebyshev-like
// guesses cos(pi*(i + 0.75)/(n + 0.5)). Weights w = 2/((1 - x^2) P_n'(x)^2).
GaussRule build_gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

const GaussRule& cached_gauss_rule(int n) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_rule(n)).first;
  return it->second;
}

double gauss_sum(const std::function<double(double)>& f, double lo, double hi,
                 const GaussRule& rule) {
  const double c = 0.5 * (lo + hi);
  const double s = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = c + s * rule.nodes[i];
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      std::ostringstream msg;
      msg << "integrand evaluated to a non-finite value at x = " << x;
      throw QuadratureError(msg.str(), std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::infinity());
    }
    acc += rule.weights[i] * fx;
  }
  return s * acc;
}

struct Panel {
  double lo;
  double hi;
  double whole;  // single Gauss estimate over [lo, hi]
  double value;  // refined estimate: sum of the two half-panel rules
  double err;    // |whole - value|
};

Panel make_panel(const std::function<double(double)>& f, double lo, double hi,
                 double whole, const GaussRule& rule) {
  const double mid = 0.5 * (lo + hi);
  const double left = gauss_sum(f, lo, mid, rule);
  const double right = gauss_sum(f, mid, hi, rule);
  Panel p;
  p.lo = lo;
  p.hi = hi;
  p.whole = whole;
  p.value = left + right;
  p.err = std::abs(whole - p.value);
  return p;
}

double adaptive_finite(const std::function<double(double)>& f, double lo,
                       double hi, const QuadratureConfig& cfg,
                       const std::vector<double>& split_points) {
  const GaussRule& rule = cached_gauss_rule(cfg.gauss_nodes);

  std::vector<double> bounds;
  bounds.push_back(lo);
  for (double s : split_points) {
    if (s > lo && s < hi) bounds.push_back(s);
  }
  bounds.push_back(hi);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double a = bounds[i];
    const double b = bounds[i + 1];
    panels.push_back(make_panel(f, a, b, gauss_sum(f, a, b, rule), rule));
  }

  while (true) {
    double total = 0.0;
    double total_err = 0.0;
    for (const Panel& p : panels) {
      total += p.value;
      total_err += p.err;
    }
    const double goal = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total));
    if (total_err <= goal) return total;
    if (static_cast<int>(panels.size()) >= cfg.max_subdivisions) {
      std::ostringstream msg;
      msg << "integrate_1d: subdivision budget " << cfg.max_subdivisions
          << " exhausted; best estimate " << total << " with error bound "
          << total_err;
      throw QuadratureError(msg.str(), total, total_err);
    }

    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i) {
      if (panels[i].err > panels[worst].err) worst = i;
    }
    const Panel p = panels[worst];
    const double mid = 0.5 * (p.lo + p.hi);
    // The half-panel rules of the parent are recomputed inside make_panel for
    // each child's own halves; the parent's refined halves seed the children's
    // whole-panel estimates, so a subdivision costs 4 half-rules, not 6.
    const double left_whole = gauss_sum(f, p.lo, mid, rule);
    const double right_whole = p.value - left_whole;
    panels[worst] = make_panel(f, p.lo, mid, left_whole, rule);
    panels.push_back(make_panel(f, mid, p.hi, right_whole, rule));
  }
}

// Rational substitutions for infinite endpoints. Each maps the problem onto
// a finite u-interval; Gauss nodes never touch the endpoints themselves.
double map_split_full_line(double x) {
  // inverse of x = u/(1 - u^2) on (-1, 1)
  if (x == 0.0) return 0.0;
  return (-1.0 + std::sqrt(1.0 + 4.0 * x * x)) / (2.0 * x);
}

}  // namespace

const std::vector<double>& gauss_legendre_nodes(int n) {
  return cached_gauss_rule(n).nodes;
}

const std::vector<double>& gauss_legendre_weights(int n) {
  return cached_gauss_rule(n).weights;
}

double integrate_1d(const std::function<double(double)>& f, Interval domain,
                    const QuadratureConfig& cfg,
                    const std::vector<double>& split_points) {
  if (cfg.gauss_nodes < 2) throw std::invalid_argument("gauss_nodes < 2");
  const bool lo_inf = std::isinf(domain.lo);
  const bool hi_inf = std::isinf(domain.hi);

  if (!lo_inf && !hi_inf) {
    if (!(domain.lo < domain.hi)) {
      if (domain.lo == domain.hi) return 0.0;
      throw std::invalid_argument("integrate_1d: empty interval");
    }
    return adaptive_finite(f, domain.lo, domain.hi, cfg, split_points);
  }

  if (lo_inf && hi_inf) {
    auto sub = [&f](double u) {
      const double d = 1.0 - u * u;
      const double x = u / d;
      return f(x) * (1.0 + u * u) / (d * d);
    };
    std::vector<double> splits;
    splits.reserve(split_points.size());
    for (double s : split_points) splits.push_back(map_split_full_line(s));
    return adaptive_finite(sub, -1.0, 1.0, cfg, splits);
  }

  if (hi_inf) {
    const double lo = domain.lo;
    auto sub = [&f, lo](double u) {
      const double d = 1.0 - u;
      return f(lo + u / d) / (d * d);
    };
    std::vector<double> splits;
    for (double s : split_points) {
      if (s > lo) splits.push_back((s - lo) / (1.0 + (s - lo)));
    }
    return adaptive_finite(sub, 0.0, 1.0, cfg, splits);
  }

  const double hi = domain.hi;
  auto sub = [&f, hi](double u) {
    const double d = 1.0 - u;
    return f(hi - u / d) / (d * d);
  };
  std::vector<double> splits;
  for (double s : split_points) {
    if (s < hi) splits.push_back((hi - s) / (1.0 + (hi - s)));
  }
  return adaptive_finite(sub, 0.0, 1.0, cfg, splits);
}

double integrate_2d(const std::function<double(double, double)>& f,
                    Interval ix, Interval iy, const QuadratureConfig& cfg,
                    const std::vector<double>& splits_x,
                    const std::vector<double>& splits_y) {
  QuadratureConfig level = cfg;
  level.abs_tol = cfg.abs_tol / std::sqrt(2.0);
  level.rel_tol = cfg.rel_tol / std::sqrt(2.0);
  auto outer = [&](double x) {
    auto inner = [&f, x](double y) { return f(x, y); };
    return integrate_1d(inner, iy, level, splits_y);
  };
  return integrate_1d(outer, ix, level, splits_x);
}

namespace {

double integrate_nd_level(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<Interval>& domain, const QuadratureConfig& cfg,
    const std::vector<std::vector<double>>& split_points, std::size_t dim,
    std::vector<double>& coords) {
  const std::vector<double> no_splits;
  const std::vector<double>& splits =
      dim < split_points.size() ? split_points[dim] : no_splits;
  if (dim + 1 == domain.size()) {
    auto leaf = [&](double x) {
      coords[dim] = x;
      return f(coords);
    };
    return integrate_1d(leaf, domain[dim], cfg, splits);
  }
  auto outer = [&](double x) {
    coords[dim] = x;
    return integrate_nd_level(f, domain, cfg, split_points, dim + 1, coords);
  };
  return integrate_1d(outer, domain[dim], cfg, splits);
}

}  // namespace

double integrate_nd(const std::function<double(const std::vector<double>&)>& f,
                    const std::vector<Interval>& domain,
                    const QuadratureConfig& cfg,
                    const std::vector<std::vector<double>>& split_points) {
  const std::size_t n = domain.size();
  if (n < 1 || n > 4) {
    throw std::invalid_argument("integrate_nd supports 1 <= n <= 4");
  }
  if (n == 1) {
    auto wrapped = [&f](double x) {
      const std::vector<double> coords{x};
      return f(coords);
    };
    return integrate_1d(wrapped, domain[0], cfg,
                        split_points.empty() ? std::vector<double>{}
                                             : split_points[0]);
  }
  QuadratureConfig level = cfg;
  level.abs_tol = cfg.abs_tol / std::sqrt(static_cast<double>(n));
  level.rel_tol = cfg.rel_tol / std::sqrt(static_cast<double>(n));
  std::vector<double> coords(n, 0.0);
  return integrate_nd_level(f, domain, level, split_points, 0, coords);
}

std::vector<double> find_roots(const std::function<double(double)>& f,
                               const RootFindConfig& cfg) {
  if (!(cfg.bracket_lo < cfg.bracket_hi)) {
    throw std::invalid_argument("find_roots: bracket_lo must be < bracket_hi");
  }
  const int n = std::max(cfg.scan_points, 2);
  std::vector<double> roots;
  const double step = (cfg.bracket_hi - cfg.bracket_lo) / (n - 1);
  double x_prev = cfg.bracket_lo;
  double f_prev = f(x_prev);
  if (f_prev == 0.0) roots.push_back(x_prev);
  for (int i = 1; i < n; ++i) {
    const double x = cfg.bracket_lo + i * step;
    const double fx = f(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
      double lo = x_prev;
      double hi = x;
      double flo = f_prev;
      for (int iter = 0; iter < cfg.max_iter && hi - lo > cfg.x_tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0) {
          lo = hi = mid;
          break;
        }
        if (std::signbit(fmid) == std::signbit(flo)) {
          lo = mid;
          flo = fmid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x_prev = x;
    f_prev = fx;
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (out.empty() || r - out.back() > 4.0 * cfg.x_tol) out.push_back(r);
  }
  return out;
}

double derivative_fd(const std::function<double(double)>& f, double x,
                     int order, double h) {
  if (h <= 0.0) h = std::max(1e-5, 1e-5 * std::abs(x));
  if (order == 1) return (f(x + h) - f(x - h)) / (2.0 * h);
  if (order == 2) return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
  throw std::invalid_argument("derivative_fd: order must be 1 or 2");
}

double derivative_fd_forward(const std::function<double(double)>& f, double x,
                             int order, double h) {
  if (h <= 0.0) h = std::max(1e-5, 1e-5 * std::abs(x));
  if (order == 1) {
    return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
  }
  if (order == 2) {
    return (2.0 * f(x) - 5.0 * f(x + h) + 4.0 * f(x + 2.0 * h) -
            f(x + 3.0 * h)) /
           (h * h);
  }
  throw std::invalid_argument("derivative_fd_forward: order must be 1 or 2");
}

}  // namespace foedlab
