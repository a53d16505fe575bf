#include "foedlab/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "foedlab/foed.hpp"
#include "foedlab/rng.hpp"

namespace foedlab {

namespace {

FoedMode preferred_mode(const ProcessModel& model) {
    return model.has_closed_form() ? FoedMode::closed_form : FoedMode::quadrature;
}

void require_positive_time(double t, const char* who) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::domain_error(std::string(who) + ": needs t > 0");
    }
}

Interval scan_bracket(const ProcessModel& model, double t) {
    const double m = model.marginal_mean(0.0);
    const double sd = std::max(model.marginal_sd(0.0), model.marginal_sd(t));
    Interval b{m - 12.0 * sd, m + 12.0 * sd};
    // Stay strictly inside a finite domain boundary: the closed-form
    // exponent can be an indeterminate ratio exactly on it.
    const double margin = 1e-9 * std::max(sd, 1.0);
    if (std::isfinite(model.domain.lo)) {
        b.lo = std::max(b.lo, model.domain.lo + margin);
    }
    if (std::isfinite(model.domain.hi)) {
        b.hi = std::min(b.hi, model.domain.hi - margin);
    }
    return b;
}

// P(X_t <= x) through the exponent-weighted initial law.
double process_cdf(const ProcessModel& model, double t, double x,
                   const QuadratureConfig& cfg) {
    const Interval w0 = model.marginal_window(0.0);
    const double hi = std::min(x, w0.hi);
    if (!(w0.lo < hi)) return 0.0;
    const FoedMode mode = preferred_mode(model);
    return integrate_1d(
        [&](double z) { return marginal_density(model, t, z, mode, cfg); },
        {w0.lo, hi}, cfg);
}

// P(B_t <= x) for Brownian motion started from the initial law.
double brownian_cdf(const ProcessModel& model, double t, double x,
                    const QuadratureConfig& cfg) {
    const Interval w0 = model.marginal_window(0.0);
    const double rt = std::sqrt(t);
    return integrate_1d(
        [&](double z) { return normal_cdf((x - z) / rt) * model.initial_density(z); },
        w0, cfg);
}

}  // namespace

double psi_fn(const ProcessModel& model, double t, double x,
              const QuadratureConfig& cfg) {
    require_positive_time(t, "psi_fn");
    return process_cdf(model, t, x, cfg) - brownian_cdf(model, t, x, cfg);
}

double xocon_residual(const ProcessModel& model, double t, double x,
                      const QuadratureConfig& cfg) {
    require_positive_time(t, "xocon_residual");
    const double lhs = marginal_density(model, t, x, preferred_mode(model), cfg);
    const double rt = std::sqrt(t);
    const double folded = integrate_1d(
        [&](double u) {
            const double phi =
                std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
            return phi * (model.initial_density(x - rt * u) +
                          model.initial_density(x + rt * u));
        },
        {-12.0, 0.0}, cfg);
    return lhs - folded;
}

double xocon_residual_symmetric(const ProcessModel& model, double t, double x,
                                const QuadratureConfig& cfg) {
    require_positive_time(t, "xocon_residual_symmetric");
    const double lhs = marginal_density(model, t, x, preferred_mode(model), cfg);
    const double rt = std::sqrt(t);
    const double expectation = integrate_1d(
        [&](double u) {
            const double phi =
                std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
            return phi * model.initial_density(x + rt * u);
        },
        {-12.0, 12.0}, cfg);
    return lhs - expectation;
}

double kolmogorov_distance_grid(const ProcessModel& model, double t,
                                const QuadratureConfig& cfg) {
    require_positive_time(t, "kolmogorov_distance_grid");
    const Interval b = scan_bracket(model, t);
    const int base_points = 4096;

    double best_x = b.lo;
    double best = 0.0;
    auto consider = [&](double x) {
        const double v = std::fabs(psi_fn(model, t, x, cfg));
        if (v > best) {
            best = v;
            best_x = x;
        }
    };
    const double step = (b.hi - b.lo) / (base_points - 1);
    for (int i = 0; i < base_points; ++i) consider(b.lo + step * i);

    double radius = step;
    for (int pass = 0; pass < 2; ++pass) {
        const double lo = std::max(b.lo, best_x - radius);
        const double hi = std::min(b.hi, best_x + radius);
        const int refine_points = 65;
        for (int i = 0; i < refine_points; ++i) {
            consider(lo + (hi - lo) * i / double(refine_points - 1));
        }
        radius /= 16.0;
    }
    return best;
}

KolmogorovReport kolmogorov_distance_foed(const ProcessModel& model, double t,
                                          const QuadratureConfig& cfg,
                                          const RootFindConfig& scan) {
    require_positive_time(t, "kolmogorov_distance_foed");
    const Interval b = scan_bracket(model, t);

    RootFindConfig rcfg = scan;
    rcfg.bracket_lo = b.lo;
    rcfg.bracket_hi = b.hi;
    const std::vector<double> roots =
        find_roots([&](double x) { return xocon_residual(model, t, x, cfg); }, rcfg);

    KolmogorovReport report;
    report.critical_points = roots;
    double best_root = 0.0;
    for (double r : roots) {
        const double psi = psi_fn(model, t, r, cfg);
        report.psi_at_critical.push_back(psi);
        if (std::fabs(psi) > report.distance_foed) {
            report.distance_foed = std::fabs(psi);
            best_root = r;
        }
    }

    if (!roots.empty()) {
        // Split evaluation of psi at the arg-max root: move the Phi term left
        // of the root into the first integral and keep the remainder.
        const double x0 = best_root;
        const Interval w0 = model.marginal_window(0.0);
        const double rt = std::sqrt(t);
        const FoedMode mode = preferred_mode(model);
        double left = 0.0;
        if (w0.lo < std::min(x0, w0.hi)) {
            left = integrate_1d(
                [&](double z) {
                    return (foed_exponent(model, t, z, mode, cfg) -
                            normal_cdf((x0 - z) / rt)) *
                           model.initial_density(z);
                },
                {w0.lo, std::min(x0, w0.hi)}, cfg);
        }
        double right = 0.0;
        if (std::max(x0, w0.lo) < w0.hi) {
            right = integrate_1d(
                [&](double z) {
                    return normal_cdf((x0 - z) / rt) * model.initial_density(z);
                },
                {std::max(x0, w0.lo), w0.hi}, cfg);
        }
        const double split_psi = left - right;
        double direct_psi = 0.0;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            if (roots[i] == x0) direct_psi = report.psi_at_critical[i];
        }
        report.split_form_gap = std::fabs(split_psi - direct_psi);
    }

    report.distance_grid = kolmogorov_distance_grid(model, t, cfg);
    report.agreement_gap = std::fabs(report.distance_foed - report.distance_grid);
    // The grid is authoritative when it sees a larger supremum than any root
    // delivered (missed tangency or an empty root set).
    report.foed_incomplete =
        report.distance_grid > report.distance_foed + 1e-6;
    return report;
}

}  // namespace foedlab
