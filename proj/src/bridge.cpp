#include "foedlab/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace foedlab {

namespace {

FoedMode preferred_mode(const ProcessModel& model) {
    return model.has_closed_form() ? FoedMode::closed_form : FoedMode::quadrature;
}

double goal_of(const QuadratureConfig& cfg, double value) {
    return std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(value));
}

void check_grid_functions(const std::vector<TestFunction>& fs, const TimeGrid& grid,
                          std::size_t expected_extra, const char* who) {
    if (fs.size() != grid.size() + expected_extra) {
        std::ostringstream msg;
        msg << who << ": expected " << grid.size() + expected_extra
            << " functions for a grid of " << grid.size() << " epochs, got "
            << fs.size();
        throw std::invalid_argument(msg.str());
    }
}

Interval clip_to_domain(Interval w, const Interval& domain) {
    w.lo = std::max(w.lo, domain.lo);
    w.hi = std::min(w.hi, domain.hi);
    return w;
}

// Initial-law window with both arms doubled, for integrands that decay
// slower than g itself (the xi weight grows in z).
Interval widened_initial_window(const ProcessModel& model) {
    const Interval w = model.marginal_window(0.0);
    const double m = model.marginal_mean(0.0);
    Interval wide{m - 2.0 * (m - w.lo), m + 2.0 * (w.hi - m)};
    return clip_to_domain(wide, model.domain);
}

}  // namespace

double bridge_apply(const ProcessModel& model, double t, const TestFunction& f,
                    double z, const QuadratureConfig& cfg) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::domain_error("bridge_apply: needs t > 0");
    }
    const FoedMode mode = preferred_mode(model);
    const double denom = marginal_density(model, t, z, mode, cfg);
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        std::ostringstream msg;
        msg << "bridge_apply: marginal density underflow at t = " << t
            << ", z = " << z << " (density = " << denom << ")";
        throw std::domain_error(msg.str());
    }

    Interval vwin = model.marginal_window(0.0);
    if (model.source_window) {
        vwin = clip_to_domain(model.source_window(t, z), {vwin.lo, vwin.hi});
    }
    if (!(vwin.lo < vwin.hi)) return 0.0;

    const bool have_logs = static_cast<bool>(model.log_transition_density) &&
                           static_cast<bool>(model.log_initial_density);
    auto integrand = [&](double v) {
        const double fv = f(v);
        if (fv == 0.0) return 0.0;
        if (have_logs) {
            const double s = model.log_transition_density(t, v, z) +
                             model.log_initial_density(v);
            return std::isfinite(s) ? fv * std::exp(s) : 0.0;
        }
        return fv * model.transition_density(t, v, z) * model.initial_density(v);
    };
    const double numer = integrate_1d(integrand, vwin, cfg, f.jumps);
    return numer / denom;
}

TestFunction orthogonal_component(const ProcessModel& model, double t,
                                  const TestFunction& f, const QuadratureConfig& cfg) {
    auto shared_model = std::make_shared<ProcessModel>(model);
    TestFunction out;
    out.name = "orthogonal(" + f.name + ")";
    out.sup_bound = 2.0 * f.sup_bound;
    out.jumps = f.jumps;
    out.f = [shared_model, t, f, cfg](double z) {
        return f(z) - bridge_apply(*shared_model, t, f, z, cfg);
    };
    return out;
}

double xi(const ProcessModel& model, const std::vector<TestFunction>& fs,
          const TimeGrid& grid, double z, const QuadratureConfig& cfg) {
    check_grid_functions(fs, grid, 0, "xi");
    const FoedMode mode = preferred_mode(model);
    double prod = 1.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double fv = fs[i](z);
        if (fv == 0.0) return 0.0;
        prod *= fv * foed_exponent(model, grid.epochs[i] - prev, z, mode, cfg);
        prev = grid.epochs[i];
    }
    return prod;
}

FddResult fdd_backward_nested(const ProcessModel& model,
                              const std::vector<TestFunction>& fs,
                              const TimeGrid& grid, const QuadratureConfig& cfg) {
    check_grid_functions(fs, grid, 1, "fdd_backward_nested");
    const std::size_t n = grid.size();
    if (n > 2) {
        throw std::invalid_argument(
            "fdd_backward_nested: n <= 2 only (cost multiplies per nesting level); "
            "use fdd_bivariate or the forward oracle");
    }
    const FoedMode mode = preferred_mode(model);

    TestFunction chain = fs[0];
    double prev = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double dt = grid.epochs[i - 1] - prev;
        const TestFunction inner = chain;
        const TestFunction fi = fs[i];
        auto shared_model = std::make_shared<ProcessModel>(model);
        TestFunction next;
        next.name = "chain_" + std::to_string(i);
        next.jumps = fi.jumps;
        next.f = [shared_model, inner, fi, dt, mode, cfg](double v) {
            const double fv = fi(v);
            if (fv == 0.0) return 0.0;
            return fv * foed_exponent(*shared_model, dt, v, mode, cfg) *
                   bridge_apply(*shared_model, dt, inner, v, cfg);
        };
        chain = next;
        prev = grid.epochs[i - 1];
    }

    const Interval w0 = model.marginal_window(0.0);
    const double value = integrate_1d(
        [&](double z) {
            const double g = model.initial_density(z);
            if (!(g > 0.0)) return 0.0;
            return chain(z) * g;
        },
        w0, cfg, chain.jumps);

    return FddResult{value, "backward_nested", goal_of(cfg, value)};
}

FddResult fdd_bivariate(const ProcessModel& model, const std::vector<TestFunction>& fs,
                        const TimeGrid& grid, const QuadratureConfig& cfg) {
    check_grid_functions(fs, grid, 0, "fdd_bivariate");
    const std::size_t n = grid.size();
    if (n < 2) {
        throw std::invalid_argument("fdd_bivariate: needs n >= 2");
    }
    const FoedMode mode = preferred_mode(model);
    const double dt_last = grid.epochs[n - 1] - grid.epochs[n - 2];

    // Exact chain weight through the first n - 1 epochs:
    // W_1 = f_1 E(t_1, .), W_k = f_k E(dt_k, .) Lambda_{dt_k} W_{k-1}.
    auto shared_model = std::make_shared<ProcessModel>(model);
    TestFunction chain;
    chain.name = "chain_1";
    chain.jumps = fs[0].jumps;
    {
        const TestFunction f1 = fs[0];
        const double t1 = grid.epochs[0];
        chain.f = [shared_model, f1, t1, mode, cfg](double v) {
            const double fv = f1(v);
            if (fv == 0.0) return 0.0;
            return fv * foed_exponent(*shared_model, t1, v, mode, cfg);
        };
    }
    for (std::size_t k = 2; k <= n - 1; ++k) {
        const double dt = grid.epochs[k - 1] - grid.epochs[k - 2];
        const TestFunction inner = chain;
        const TestFunction fk = fs[k - 1];
        TestFunction next;
        next.name = "chain_" + std::to_string(k);
        next.jumps = fk.jumps;
        next.f = [shared_model, inner, fk, dt, mode, cfg](double v) {
            const double fv = fk(v);
            if (fv == 0.0) return 0.0;
            return fv * foed_exponent(*shared_model, dt, v, mode, cfg) *
                   bridge_apply(*shared_model, dt, inner, v, cfg);
        };
        chain = next;
    }

    const Interval ix = model.marginal_window(grid.epochs[n - 1]);
    const Interval iv = model.marginal_window(0.0);
    const TestFunction& fn = fs[n - 1];

    // The weight depends only on the outer variable, and the inner adaptive
    // pass revisits it at a fixed v many times; a one-entry cache removes
    // the repeated chain evaluations.
    auto integrand = [&model, &chain, &fn, dt_last,
                      cache_v = std::numeric_limits<double>::quiet_NaN(),
                      cache_w = 0.0](double v, double x) mutable {
        const double fx = fn(x);
        if (fx == 0.0) return 0.0;
        const double g = model.initial_density(v);
        if (!(g > 0.0)) return 0.0;
        if (v != cache_v) {
            cache_v = v;
            cache_w = chain(v);
        }
        if (cache_w == 0.0) return 0.0;
        return fx * cache_w * model.transition_density(dt_last, v, x) * g;
    };
    const double value =
        integrate_2d(integrand, iv, ix, cfg, chain.jumps, fn.jumps);
    return FddResult{value, "backward_bivariate", goal_of(cfg, value)};
}

XindiResult fdd_degenerate_xindi(const ProcessModel& model,
                                 const std::vector<TestFunction>& fs,
                                 const TimeGrid& grid, const QuadratureConfig& cfg) {
    check_grid_functions(fs, grid, 0, "fdd_degenerate_xindi");
    const std::size_t n = grid.size();
    const FoedMode mode = preferred_mode(model);

    // Integrability probe on the exponent weight alone (test functions are
    // bounded and cannot rescue a divergent weight): the product
    // g(z) prod_i E(dt_i, z) must decay along both tails of the initial law.
    auto weight = [&](double z) {
        const double g = model.initial_density(z);
        if (!(g > 0.0)) return 0.0;
        double w = g;
        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w *= foed_exponent(model, grid.epochs[i] - prev, z, mode, cfg);
            prev = grid.epochs[i];
        }
        return w;
    };
    const double m0 = model.marginal_mean(0.0);
    const double s0 = model.marginal_sd(0.0);
    for (double side : {-1.0, +1.0}) {
        double w6 = 0.0, w8 = 0.0, w10 = 0.0;
        for (int k : {6, 8, 10}) {
            double z = m0 + side * k * s0;
            z = std::clamp(z, model.domain.lo, model.domain.hi);
            const double w = weight(z);
            if (!std::isfinite(w)) {
                std::ostringstream msg;
                msg << "fdd_degenerate_xindi: exponent weight overflows at z = " << z
                    << "; the single-integral formula is not integrable here";
                throw std::domain_error(msg.str());
            }
            (k == 6 ? w6 : k == 8 ? w8 : w10) = w;
        }
        if (w6 > 0.0 && !(w8 <= 0.5 * w6 && w10 <= 0.5 * w8)) {
            std::ostringstream msg;
            msg << "fdd_degenerate_xindi: exponent weight fails to decay on the "
                << (side < 0 ? "left" : "right") << " tail of the initial law "
                << "(values at 6/8/10 initial sds: " << w6 << ", " << w8 << ", "
                << w10 << "); refusing the single-integral formula";
            throw std::domain_error(msg.str());
        }
    }

    std::vector<double> jumps;
    for (const auto& f : fs) jumps.insert(jumps.end(), f.jumps.begin(), f.jumps.end());
    const Interval zwin = widened_initial_window(model);
    const double value = integrate_1d(
        [&](double z) {
            const double g = model.initial_density(z);
            if (!(g > 0.0)) return 0.0;
            const double w = xi(model, fs, grid, z, cfg);
            return w == 0.0 ? 0.0 : w * g;
        },
        zwin, cfg, jumps);

    XindiResult out;
    out.result = FddResult{value, "degenerate_xindi", goal_of(cfg, value)};
    if (n >= 2) {
        out.reference_value = fdd_bivariate(model, fs, grid, cfg).value;
    } else {
        const Interval w1 = model.marginal_window(grid.epochs[0]);
        out.reference_value = integrate_1d(
            [&](double x) {
                const double fx = fs[0](x);
                if (fx == 0.0) return 0.0;
                return fx * marginal_density(model, grid.epochs[0], x, mode, cfg);
            },
            w1, cfg, fs[0].jumps);
    }
    out.discrepancy = std::fabs(value - out.reference_value);
    return out;
}

std::vector<IdentityReport> kernel_triviality_probe(
    const ProcessModel& model, double t, const std::vector<TestFunction>& trials,
    const QuadratureConfig& cfg) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::domain_error("kernel_triviality_probe: needs t > 0");
    }
    const FoedMode mode = preferred_mode(model);
    const double threshold = 1e-6;

    const double mt = model.marginal_mean(t);
    const double s0 = std::max(model.marginal_sd(0.0), 1e-12);
    const int grid_points = 81;
    const Interval zwin =
        clip_to_domain({mt - 4.0 * s0, mt + 4.0 * s0}, model.domain);

    const std::vector<double> lambda_grid = {-0.5 / s0, -0.25 / s0, 0.0, 0.25 / s0,
                                             0.5 / s0};
    const Interval w0 = model.marginal_window(0.0);

    std::vector<IdentityReport> rows;
    for (const auto& h : trials) {
        double sup_abs = 0.0;
        for (int i = 0; i < grid_points; ++i) {
            const double z =
                zwin.lo + (zwin.hi - zwin.lo) * i / double(grid_points - 1);
            if (!(marginal_density(model, t, z, mode, cfg) > 1e-300)) continue;
            sup_abs = std::max(sup_abs, std::fabs(bridge_apply(model, t, h, z, cfg)));
        }
        IdentityReport sup_row;
        sup_row.name = "kernel_probe_sup_" + h.name;
        sup_row.anchor =
            "sup_z |Lambda_t h(z)| over the probe grid for h = " + h.name +
            "; a value above threshold certifies h is not annihilated by Lambda_t";
        sup_row.lhs = sup_abs;
        sup_row.rhs = 0.0;
        sup_row.abs_gap = sup_abs;
        sup_row.rel_gap = sup_abs;
        sup_row.tolerance = threshold;
        sup_row.status = sup_abs > threshold ? "pass" : "flag";
        rows.push_back(sup_row);

        double max_moment = 0.0;
        for (double lam : lambda_grid) {
            const double moment = integrate_1d(
                [&](double v) {
                    const double hv = h(v);
                    if (hv == 0.0) return 0.0;
                    return hv * std::exp(lam * v) * model.initial_density(v);
                },
                w0, cfg, h.jumps);
            max_moment = std::max(max_moment, std::fabs(moment));
        }
        IdentityReport mom_row;
        mom_row.name = "kernel_probe_expmoment_" + h.name;
        mom_row.anchor =
            "max_lambda |E h(X_0) exp(lambda X_0)| for h = " + h.name +
            "; kernel members make every such exponential moment vanish";
        mom_row.lhs = max_moment;
        mom_row.rhs = 0.0;
        mom_row.abs_gap = max_moment;
        mom_row.rel_gap = max_moment;
        mom_row.tolerance = threshold;
        mom_row.status = max_moment > threshold ? "pass" : "flag";
        rows.push_back(mom_row);
    }
    return rows;
}

}  // namespace foedlab
