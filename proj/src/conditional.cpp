#include "foedlab/conditional.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "foedlab/bridge.hpp"
#include "foedlab/foed.hpp"

namespace foedlab {

namespace {

constexpr double kDensityFloor = 1e-300;

FoedMode preferred_mode(const ProcessModel& model) {
    return model.has_closed_form() ? FoedMode::closed_form : FoedMode::quadrature;
}

void require_query(const ProcessModel& model, const ConditionalQuery& q,
                   const QuadratureConfig& cfg) {
    if (!(q.s >= 0.0) || !std::isfinite(q.s)) {
        throw std::domain_error("conditional: lag s must be finite and >= 0");
    }
    const double md =
        marginal_density(model, conditioning_epoch(q), q.w, preferred_mode(model), cfg);
    if (!(md > kDensityFloor)) {
        std::ostringstream msg;
        msg << "conditional: marginal density underflows at the conditioning state w = "
            << q.w << " (epoch " << conditioning_epoch(q) << ", density " << md << ")";
        throw std::domain_error(msg.str());
    }
}

double leading_factor(const ProcessModel& model, double t_outer, double t_cond,
                      double w, const QuadratureConfig& cfg) {
    // exp(-int_{t_outer}^{t_cond} F(u, w) du) as an exponent ratio.
    return 1.0 / foed_exponent_from(model, t_outer, t_cond, w,
                                    preferred_mode(model), cfg);
}

// H_i = f_i * E(dt_i, .) * Lambda_{dt_i} H_{i-1} built as a closure chain.
// bridge_evals supplies the Lambda layer, so profile variants can swap in a
// tabulated one.
TestFunction backward_chain(
    const ProcessModel& model, const TimeGrid& grid,
    const std::vector<TestFunction>& fs, const QuadratureConfig& cfg,
    const std::function<std::function<double(double)>(double, const TestFunction&)>&
        make_bridge) {
    const FoedMode mode = preferred_mode(model);
    auto shared_model = std::make_shared<ProcessModel>(model);
    TestFunction chain = fs[0];
    double prev = 0.0;
    for (std::size_t i = 1; i <= grid.size(); ++i) {
        const double dt = grid.epochs[i - 1] - prev;
        const std::function<double(double)> lam = make_bridge(dt, chain);
        const TestFunction fi = fs[i];
        TestFunction next;
        next.name = "chain_" + std::to_string(i);
        next.jumps = fi.jumps;
        next.f = [shared_model, lam, fi, dt, mode, cfg](double v) {
            const double fv = fi(v);
            if (fv == 0.0) return 0.0;
            return fv * foed_exponent(*shared_model, dt, v, mode, cfg) * lam(v);
        };
        chain = next;
        prev = grid.epochs[i - 1];
    }
    return chain;
}

Interval clip_to_domain(Interval w, const Interval& domain) {
    w.lo = std::max(w.lo, domain.lo);
    w.hi = std::min(w.hi, domain.hi);
    return w;
}

Interval hull(Interval a, Interval b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace

double conditioning_epoch(const ConditionalQuery& q) {
    return q.s + std::accumulate(q.grid.epochs.begin(), q.grid.epochs.end(), 0.0);
}

double outer_kernel_time(const ConditionalQuery& q) {
    double sum = q.s;
    for (std::size_t i = 0; i + 1 < q.grid.size(); ++i) sum += q.grid.epochs[i];
    return sum;
}

double conditional_product(const ProcessModel& model, const ConditionalQuery& q,
                           const std::vector<TestFunction>& fs,
                           const QuadratureConfig& cfg) {
    if (fs.size() != q.grid.size() + 1) {
        throw std::invalid_argument(
            "conditional_product: expected one function per epoch including epoch 0");
    }
    if (q.grid.size() > 2) {
        throw std::invalid_argument(
            "conditional_product: n <= 2 only (nested quadrature cost)");
    }
    require_query(model, q, cfg);

    TestFunction chain = backward_chain(
        model, q.grid, fs, cfg,
        [&](double dt, const TestFunction& inner) -> std::function<double(double)> {
            auto shared_model = std::make_shared<ProcessModel>(model);
            return [shared_model, dt, inner, cfg](double v) {
                return bridge_apply(*shared_model, dt, inner, v, cfg);
            };
        });

    const double t_outer = outer_kernel_time(q);
    const double t_cond = conditioning_epoch(q);
    const double lead = leading_factor(model, t_outer, t_cond, q.w, cfg);
    const double value =
        t_outer == 0.0 ? chain(q.w) : bridge_apply(model, t_outer, chain, q.w, cfg);
    return lead * value;
}

std::function<double(double)> conditional_product_profile(
    const ProcessModel& model, const TimeGrid& grid, double s,
    const std::vector<TestFunction>& fs, const QuadratureConfig& cfg,
    int table_points) {
    if (fs.size() != grid.size() + 1) {
        throw std::invalid_argument(
            "conditional_product_profile: expected one function per epoch including "
            "epoch 0");
    }
    if (grid.size() > 2) {
        throw std::invalid_argument("conditional_product_profile: n <= 2 only");
    }
    if (table_points < 16) {
        throw std::invalid_argument("conditional_product_profile: table too small");
    }
    const FoedMode mode = preferred_mode(model);
    const Interval w0 = clip_to_domain(model.marginal_window(0.0), model.domain);
    const double step = (w0.hi - w0.lo) / (table_points - 1);

    TestFunction chain = backward_chain(
        model, grid, fs, cfg,
        [&](double dt, const TestFunction& inner) -> std::function<double(double)> {
            std::vector<double> table(static_cast<std::size_t>(table_points));
            for (int j = 0; j < table_points; ++j) {
                const double v = w0.lo + step * j;
                // Points where the kernel-target marginal underflows carry no
                // mass in any enclosing integral; store 0 instead of failing.
                if (!(marginal_density(model, dt, v, mode, cfg) > kDensityFloor)) {
                    table[static_cast<std::size_t>(j)] = 0.0;
                    continue;
                }
                table[static_cast<std::size_t>(j)] =
                    bridge_apply(model, dt, inner, v, cfg);
            }
            auto spline =
                std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<
                    double>>(table.begin(), table.end(), w0.lo, step);
            const Interval range = w0;
            return [spline, range](double v) {
                if (v < range.lo || v > range.hi) return 0.0;
                return (*spline)(v);
            };
        });

    ConditionalQuery q;
    q.grid = grid;
    q.s = s;
    const double t_outer = outer_kernel_time(q);
    const double t_cond = conditioning_epoch(q);
    auto shared_model = std::make_shared<ProcessModel>(model);
    return [shared_model, chain, t_outer, t_cond, cfg, mode](double w) {
        const double md = marginal_density(*shared_model, t_cond, w, mode, cfg);
        if (!(md > kDensityFloor)) {
            std::ostringstream msg;
            msg << "conditional_product_profile: marginal density underflows at w = "
                << w;
            throw std::domain_error(msg.str());
        }
        const double lead =
            1.0 / foed_exponent_from(*shared_model, t_outer, t_cond, w, mode, cfg);
        const double value = t_outer == 0.0
                                 ? chain(w)
                                 : bridge_apply(*shared_model, t_outer, chain, w, cfg);
        return lead * value;
    };
}

double conditional_psi(const ProcessModel& model, const ConditionalQuery& q,
                       const std::function<double(const std::vector<double>&)>& psi,
                       PsiVariant variant, const QuadratureConfig& cfg,
                       const std::vector<std::vector<double>>& psi_jumps) {
    const std::size_t n = q.grid.size();
    if (n + 1 > 4) {
        throw std::invalid_argument(
            "conditional_psi: n <= 3 only (integration dimension n + 1)");
    }
    require_query(model, q, cfg);
    const double t_outer = outer_kernel_time(q);
    if (t_outer == 0.0) {
        throw std::invalid_argument(
            "conditional_psi: s = 0 with n = 1 degenerates the outer kernel to a "
            "point mass; use conditional_product");
    }
    const FoedMode mode = preferred_mode(model);
    const double t_cond = conditioning_epoch(q);
    const double lead = leading_factor(model, t_outer, t_cond, q.w, cfg);

    const auto& t = q.grid.epochs;
    std::vector<double> dts(n);
    for (std::size_t i = 0; i < n; ++i) dts[i] = t[i] - (i == 0 ? 0.0 : t[i - 1]);

    // Outer kernel carrying z_n to w; its denominator is w-constant.
    const double tau = variant == PsiVariant::increment_form ? t_outer : t[n - 1];
    const double outer_denom = marginal_density(model, tau, q.w, mode, cfg);
    if (!(outer_denom > kDensityFloor)) {
        throw std::domain_error(
            "conditional_psi: outer kernel marginal underflows at w");
    }

    std::vector<Interval> domain(n + 1);
    domain[0] = clip_to_domain(model.marginal_window(0.0), model.domain);
    for (std::size_t i = 1; i < n; ++i) {
        domain[i] = clip_to_domain(model.marginal_window(t[i - 1]), model.domain);
    }
    domain[n] = clip_to_domain(
        hull(model.marginal_window(t[n - 1]), model.source_window(tau, q.w)),
        model.domain);

    auto integrand = [&](const std::vector<double>& z) {
        double weight = 1.0;
        for (std::size_t i = 0; i <= n; ++i) {
            weight *= model.initial_density(z[i]);
            if (weight == 0.0) return 0.0;
        }
        if (variant == PsiVariant::increment_form) {
            for (std::size_t i = 1; i <= n; ++i) {
                const double denom = marginal_density(model, dts[i - 1], z[i], mode, cfg);
                if (!(denom > 0.0)) return 0.0;
                weight *= model.transition_density(dts[i - 1], z[i - 1], z[i]) / denom;
                weight *= foed_exponent(model, dts[i - 1], z[i], mode, cfg);
                if (weight == 0.0) return 0.0;
            }
        } else {
            for (std::size_t i = 1; i <= n - 1; ++i) {
                const double denom = marginal_density(model, t[i - 1], z[i - 1], mode, cfg);
                if (!(denom > 0.0)) return 0.0;
                weight *= model.transition_density(t[i - 1], z[i - 1], z[i]) / denom;
                if (weight == 0.0) return 0.0;
            }
            for (std::size_t i = 1; i <= n; ++i) {
                weight *= foed_exponent(model, dts[i - 1], z[i], mode, cfg);
                if (weight == 0.0) return 0.0;
            }
        }
        weight *= model.transition_density(tau, z[n], q.w) / outer_denom;
        if (weight == 0.0) return 0.0;
        return psi(z) * weight;
    };

    const double integral = integrate_nd(integrand, domain, cfg, psi_jumps);
    return lead * integral;
}

double eta_density(const ProcessModel& model, double t, double w, double v,
                   const QuadratureConfig& cfg) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::domain_error("eta_density: needs t > 0");
    }
    const FoedMode mode = preferred_mode(model);
    const double denom = marginal_density(model, t, w, mode, cfg);
    if (!(denom > kDensityFloor)) {
        std::ostringstream msg;
        msg << "eta_density: marginal density underflows at w = " << w;
        throw std::domain_error(msg.str());
    }
    const bool have_logs = static_cast<bool>(model.log_transition_density) &&
                           static_cast<bool>(model.log_initial_density);
    if (have_logs) {
        const double s =
            model.log_transition_density(t, v, w) + model.log_initial_density(v);
        return std::isfinite(s) ? std::exp(s) / denom : 0.0;
    }
    return model.transition_density(t, v, w) * model.initial_density(v) / denom;
}

IdentityReport check_lemma_rela(const ProcessModel& model, double s, double t,
                                double x, double w, const QuadratureConfig& cfg) {
    if (!(s > 0.0) || !(t >= 0.0)) {
        throw std::domain_error("check_lemma_rela: needs s > 0 and t >= 0");
    }
    const FoedMode mode = preferred_mode(model);
    const double lhs =
        model.transition_density(s + t, x, w) * marginal_density(model, s, w, mode, cfg);
    const double rhs = model.transition_density(s, x, w) *
                       marginal_density(model, t + s, w, mode, cfg);
    return make_identity_report(
        "kernel_marginal_exchange",
        "p_{s+t}(x, w) m_s(w) vs p_s(x, w) m_{s+t}(w): exchanging kernel time "
        "against marginal epoch, pointwise in (x, w)",
        lhs, rhs, 1e-8);
}

}  // namespace foedlab
