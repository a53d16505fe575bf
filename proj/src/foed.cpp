#include "foedlab/foed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "foedlab/functions.hpp"

namespace foedlab {

namespace {

void require_time(double t) {
    if (!std::isfinite(t) || t < 0.0) {
        throw std::domain_error("foed: time must be finite and nonnegative");
    }
}

// phi(t, x) = integral of p_t(z, x) g(z) dz over sources z. This is also the
// time-t marginal density at x. Integrates exp(log p + log g) so that large
// exponent ratios never overflow mid-product.
double phi_by_quadrature(const ProcessModel& model, double t, double x,
                         const QuadratureConfig& cfg) {
    Interval zwin = model.marginal_window ? model.marginal_window(0.0) : model.domain;
    if (model.source_window) {
        Interval src = model.source_window(t, x);
        zwin.lo = std::max(zwin.lo, src.lo);
        zwin.hi = std::min(zwin.hi, src.hi);
    }
    if (!(zwin.lo < zwin.hi)) return 0.0;

    const bool have_logs = static_cast<bool>(model.log_transition_density) &&
                           static_cast<bool>(model.log_initial_density);
    auto integrand = [&](double z) {
        if (have_logs) {
            const double s = model.log_transition_density(t, z, x) +
                             model.log_initial_density(z);
            return std::isfinite(s) ? std::exp(s) : 0.0;
        }
        return model.transition_density(t, z, x) * model.initial_density(z);
    };
    return integrate_1d(integrand, zwin, cfg);
}

double log_exponent(const ProcessModel& model, double t, double x, FoedMode mode,
                    const QuadratureConfig& cfg) {
    if (t == 0.0) return 0.0;
    if (mode == FoedMode::closed_form && model.log_closed_form_foed) {
        return model.log_closed_form_foed(t, x);
    }
    return std::log(foed_exponent(model, t, x, mode, cfg));
}

double richardson_central(const std::function<double(double)>& f, double u, double h) {
    auto d = [&](double step) { return (f(u + step) - f(u - step)) / (2.0 * step); };
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

double richardson_forward(const std::function<double(double)>& f, double u, double h) {
    const double fu = f(u);
    auto d = [&](double step) {
        return (-3.0 * fu + 4.0 * f(u + step) - f(u + 2.0 * step)) / (2.0 * step);
    };
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

double d_dt(const std::function<double(double)>& f, double t, double h) {
    if (t < 1.5 * h) return richardson_forward(f, t, h);
    return richardson_central(f, t, h);
}

FoedMode preferred_mode(const ProcessModel& model) {
    return model.has_closed_form() ? FoedMode::closed_form : FoedMode::quadrature;
}

}  // namespace

double foed_exponent(const ProcessModel& model, double t, double x, FoedMode mode,
                     const QuadratureConfig& cfg) {
    require_time(t);
    const double g = model.initial_density(x);
    if (!(g > 0.0)) {
        std::ostringstream msg;
        msg << "foed_exponent: initial density vanishes at x = " << x;
        throw std::domain_error(msg.str());
    }
    if (t == 0.0) return 1.0;
    if (mode == FoedMode::closed_form) {
        if (!model.has_closed_form()) {
            throw std::domain_error("foed_exponent: model '" + model.name +
                                    "' has no closed-form exponent; use quadrature mode");
        }
        return model.closed_form_foed(t, x);
    }
    return phi_by_quadrature(model, t, x, cfg) / g;
}

double foed_rate(const ProcessModel& model, double t, double x, FoedMode mode,
                 const QuadratureConfig& cfg) {
    require_time(t);
    auto log_e = [&](double s) { return log_exponent(model, s, x, mode, cfg); };
    const double h = 1e-4 * std::max(1.0, t);
    return d_dt(log_e, t, h);
}

double marginal_density(const ProcessModel& model, double t, double x, FoedMode mode,
                        const QuadratureConfig& cfg) {
    require_time(t);
    if (t == 0.0) return model.initial_density(x);
    if (mode == FoedMode::closed_form) {
        if (!model.has_closed_form()) {
            throw std::domain_error("marginal_density: model '" + model.name +
                                    "' has no closed-form exponent; use quadrature mode");
        }
        if (model.log_initial_density && model.log_closed_form_foed) {
            const double s = model.log_initial_density(x) + model.log_closed_form_foed(t, x);
            return std::isfinite(s) ? std::exp(s) : 0.0;
        }
        return model.initial_density(x) * model.closed_form_foed(t, x);
    }
    return phi_by_quadrature(model, t, x, cfg);
}

double foed_exponent_from(const ProcessModel& model, double s, double t, double z,
                          FoedMode mode, const QuadratureConfig& cfg) {
    require_time(s);
    require_time(t);
    if (s > t) {
        throw std::domain_error("foed_exponent_from: needs s <= t");
    }
    if (s == t) return 1.0;
    if (s == 0.0) return foed_exponent(model, t, z, mode, cfg);
    if (mode == FoedMode::closed_form && model.log_closed_form_foed) {
        return std::exp(model.log_closed_form_foed(t, z) -
                        model.log_closed_form_foed(s, z));
    }
    return foed_exponent(model, t, z, mode, cfg) /
           foed_exponent(model, s, z, mode, cfg);
}

double ln_f(const ProcessModel& model, int n, double t, double x, FoedMode mode,
            const QuadratureConfig& cfg) {
    require_time(t);
    if (n < 0 || n > 3) {
        throw std::invalid_argument("ln_f: order must be in {0, 1, 2, 3}");
    }
    // Step sizes widen with the order: each level differentiates a quantity
    // that is itself a finite-difference estimate, so the noise floor rises.
    auto outer_step = [&](int m, double u) {
        const double base = (m == 2) ? 1.5e-3 : 1e-2;
        return base * std::max(1.0, u);
    };
    std::function<double(int, double)> ladder = [&](int m, double u) -> double {
        if (m == 0) return 1.0;
        if (m == 1) return foed_rate(model, u, x, mode, cfg);
        auto prev = [&](double v) { return ladder(m - 1, v); };
        const double h = outer_step(m, u);
        return d_dt(prev, u, h) + foed_rate(model, u, x, mode, cfg) * ladder(m - 1, u);
    };
    return ladder(n, t);
}

IdentityReport check_generator_identity(const ProcessModel& model,
                                        const SmoothFunction& f, double t,
                                        double tolerance, const QuadratureConfig& cfg) {
    require_time(t);
    if (!model.has_generator()) {
        throw std::domain_error("check_generator_identity: model '" + model.name +
                                "' has no generator");
    }
    const FoedMode mode = preferred_mode(model);

    const Interval wt = model.marginal_window(t);
    const double lhs = integrate_1d(
        [&](double v) { return f.f(v) * marginal_density(model, t, v, mode, cfg); }, wt,
        cfg);

    const Interval w0 = model.marginal_window(0.0);
    const double rhs = integrate_1d(
        [&](double v) {
            const double g = model.initial_density(v);
            if (!(g > 0.0)) return 0.0;
            const double af = model.generator.apply(v, f.f(v), f.d1(v), f.d2(v));
            double time_int = 0.0;
            if (t > 0.0) {
                time_int = integrate_1d(
                    [&](double s) { return foed_exponent(model, s, v, mode, cfg); },
                    Interval{0.0, t}, cfg);
            }
            return (f.f(v) + af * time_int) * g;
        },
        w0, cfg);

    return make_identity_report(
        "generator_identity",
        "E f(X_t) = E[ f(X_0) + A f(X_0) * int_0^t E(s, X_0) ds ] for f = " + f.name,
        lhs, rhs, tolerance);
}

IdentityReport check_an_identity(const ProcessModel& model, const SmoothFunction& f,
                                 int n, double t, double tolerance,
                                 const QuadratureConfig& cfg) {
    require_time(t);
    if (n != 1 && n != 2) {
        throw std::invalid_argument("check_an_identity: order must be 1 or 2");
    }
    if (!model.has_generator() || (n == 2 && !model.generator.apply_squared)) {
        throw std::domain_error("check_an_identity: model '" + model.name +
                                "' lacks the required generator order");
    }
    const FoedMode mode = preferred_mode(model);
    const Interval wt = model.marginal_window(t);

    auto apply_n = [&](double v) {
        if (n == 1) return model.generator.apply(v, f.f(v), f.d1(v), f.d2(v));
        return model.generator.apply_squared(v, f.f(v), f.d1(v), f.d2(v), f.d3(v),
                                             f.d4(v));
    };
    const double lhs = integrate_1d(
        [&](double v) { return apply_n(v) * marginal_density(model, t, v, mode, cfg); },
        wt, cfg);
    const double rhs = integrate_1d(
        [&](double v) {
            return f.f(v) * ln_f(model, n, t, v, mode, cfg) *
                   marginal_density(model, t, v, mode, cfg);
        },
        wt, cfg);

    std::ostringstream anchor;
    anchor << "E A^" << n << " f(X_t) = E[ f(X_0) L^" << n
           << " F(t, X_0) E(t, X_0) ] for f = " << f.name;
    return make_identity_report("iterated_generator_identity_n" + std::to_string(n),
                                anchor.str(), lhs, rhs, tolerance);
}

}  // namespace foedlab
