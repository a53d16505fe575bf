#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "foedlab/bridge.hpp"
#include "foedlab/foed.hpp"
#include "foedlab/functions.hpp"
#include "foedlab/model.hpp"
#include "foedlab/oracle.hpp"

using namespace foedlab;

namespace {

TestFunction make_hermite2(double a) {
    TestFunction f;
    f.name = "hermite2";
    f.f = [a](double v) { return v * v - a; };
    f.sup_bound = 25.0;
    return f;
}

QuadratureConfig fast_cfg() {
    QuadratureConfig cfg;
    cfg.gauss_nodes = 24;
    cfg.abs_tol = 1e-9;
    cfg.rel_tol = 1e-8;
    return cfg;
}

}  // namespace

TEST_CASE("the bridge fixes constants") {
    for (const ProcessModel& m :
         {make_gauss_gauss(1.0), make_ou_shift(1.0, 0.5, 0.3),
          make_besq_shift(1.0, 2.0, 1.0)}) {
        for (double t : {0.4, 1.5}) {
            const double z = m.marginal_mean(t) + 0.3;
            CHECK(bridge_apply(m, t, make_constant(), z) ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("gauss_gauss bridge on polynomials matches Gaussian conditioning") {
    const double a = 1.0;
    const ProcessModel m = make_gauss_gauss(a);
    for (double t : {0.5, 1.0, 2.0}) {
        for (double z : {-1.2, 0.0, 0.9, 2.4}) {
            // E[X_0 | X_t = z] = a z / (a + t); the conditional variance is
            // a t / (a + t).
            const double mean = a * z / (a + t);
            const double var = a * t / (a + t);
            CHECK(bridge_apply(m, t, make_linear(), z) ==
                  doctest::Approx(mean).epsilon(1e-9).scale(1.0));
            CHECK(bridge_apply(m, t, make_hermite2(a), z) ==
                  doctest::Approx(mean * mean + var - a)
                      .epsilon(1e-8)
                      .scale(1.0));
        }
    }
}

TEST_CASE("ou bridge on linear matches Gaussian conditioning") {
    const ProcessModel m = make_ou_shift(1.0, 0.5, 0.3);
    for (double t : {0.5, 1.5}) {
        for (double z : {-0.7, 0.4}) {
            const GaussianVector joint = gaussian_joint(m, {0.0, t});
            const GaussianVector cond = gaussian_condition(joint, {1}, {z});
            CHECK(bridge_apply(m, t, make_linear(), z) ==
                  doctest::Approx(cond.mean(0)).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("bridge refuses targets where the marginal underflows") {
    const ProcessModel m = make_besq_shift(1.0, 2.0, 1.0);
    CHECK_THROWS_AS(bridge_apply(m, 1.0, make_constant(), -2.0),
                    std::domain_error);
}

TEST_CASE("orthogonal component vanishes for constants and keeps metadata") {
    const ProcessModel m = make_gauss_gauss(1.0);
    const TestFunction o = orthogonal_component(m, 1.0, make_constant());
    CHECK(o.name == "orthogonal(constant)");
    for (double v : {-1.0, 0.0, 2.0}) {
        CHECK(std::fabs(o(v)) < 1e-9);
    }
    const TestFunction oi = orthogonal_component(m, 1.0, make_indicator(0.5));
    CHECK(oi.jumps == std::vector<double>{0.5});
}

TEST_CASE("the mu_t mean of the orthogonal component is the tower defect") {
    const ProcessModel m = make_gauss_gauss(1.0);
    const double t = 1.0;
    const TestFunction f = make_exp_neg_sq();
    const TestFunction o = orthogonal_component(m, t, f);
    const Interval w = m.marginal_window(t);
    const double mean_o = integrate_1d(
        [&](double z) { return o(z) * marginal_density(m, t, z); }, w);
    const double f_mu = integrate_1d(
        [&](double z) { return f(z) * marginal_density(m, t, z); }, w);
    const double f_gamma = integrate_1d(
        [&](double z) { return f(z) * m.initial_density(z); },
        m.marginal_window(0.0));
    // int (f - Lambda f) dmu_t = int f dmu_t - int f dgamma by the tower
    // property of the bridge.
    CHECK(mean_o == doctest::Approx(f_mu - f_gamma).epsilon(1e-7).scale(1.0));
}

TEST_CASE("tower property: the bridge preserves initial-law averages") {
    for (const ProcessModel& m :
         {make_gauss_gauss(1.0), make_ou_shift(1.0, 0.5, 0.3),
          make_besq_shift(1.0, 2.0, 1.0)}) {
        const double t = 0.8;
        for (const TestFunction& f :
             {make_exp_neg_sq(), make_indicator(m.marginal_mean(0.0))}) {
            const double lhs = integrate_1d(
                [&](double z) {
                    return bridge_apply(m, t, f, z) *
                           marginal_density(m, t, z);
                },
                m.marginal_window(t));
            const double rhs = integrate_1d(
                [&](double z) { return f(z) * m.initial_density(z); },
                m.marginal_window(0.0), {}, f.jumps);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("the bridge is an L1 contraction from gamma to mu_t") {
    const ProcessModel m = make_ou_shift(1.0, 0.5, 0.3);
    const double t = 1.0;
    for (const TestFunction& f :
         {make_exp_neg_sq(), make_gaussian_bump(0.5, 0.6)}) {
        const double lhs = integrate_1d(
            [&](double z) {
                return std::fabs(bridge_apply(m, t, f, z)) *
                       marginal_density(m, t, z);
            },
            m.marginal_window(t));
        const double rhs = integrate_1d(
            [&](double z) { return std::fabs(f(z)) * m.initial_density(z); },
            m.marginal_window(0.0));
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("xi multiplies exponents along the grid") {
    const ProcessModel m = make_gauss_gauss(1.0);
    const TimeGrid grid({1.0, 2.0});
    const std::vector<TestFunction> fs{make_constant(), make_constant()};
    // Increments are both 1; at z = 0 each factor is sqrt(1/2).
    CHECK(xi(m, fs, grid, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    // A vanishing factor kills the product without evaluating the rest.
    const std::vector<TestFunction> fz{make_indicator(-10.0), make_constant()};
    CHECK(xi(m, fz, grid, 0.0) == 0.0);
}

TEST_CASE("nested route with one epoch recovers plain initial-law averages") {
    const ProcessModel m = make_gauss_gauss(1.0);
    const FddResult r = fdd_backward_nested(
        m, {make_indicator(0.0), make_constant()}, TimeGrid({1.0}));
    CHECK(r.method == "backward_nested");
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(r.error_estimate > 0.0);
}

TEST_CASE("nested and bivariate routes agree with the forward chain rule") {
    const QuadratureConfig cfg = fast_cfg();
    for (const ProcessModel& m :
         {make_gauss_gauss(1.0), make_ou_shift(1.0, 0.5, 0.3)}) {
        const TimeGrid grid({1.0, 2.0});
        const double cut = m.marginal_mean(1.0);
        const std::vector<TestFunction> fs{make_exp_neg_sq(),
                                           make_indicator(cut),
                                           make_exp_neg_sq()};
        const double fwd = fdd_forward(m, grid, fs, cfg);
        const double nested = fdd_backward_nested(m, fs, grid, cfg).value;
        CHECK(nested == doctest::Approx(fwd).epsilon(1e-4).scale(1.0));

        const std::vector<TestFunction> tail{fs[1], fs[2]};
        const FddResult biv = fdd_bivariate(m, tail, grid, cfg);
        CHECK(biv.method == "backward_bivariate");
        const double fwd_tail =
            fdd_forward(m, grid, {make_constant(), fs[1], fs[2]}, cfg);
        CHECK(biv.value == doctest::Approx(fwd_tail).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("both backward routes hit the closed-form orthant probability") {
    const ProcessModel m = make_gauss_gauss(1.0);
    const TimeGrid grid({1.0, 2.0});
    const double expected = bivariate_normal_orthant(2.0 / std::sqrt(6.0));
    const std::vector<TestFunction> ind{make_indicator(0.0),
                                        make_indicator(0.0)};
    const double biv = fdd_bivariate(m, ind, grid).value;
    CHECK(biv == doctest::Approx(expected).epsilon(1e-6));
    const double nested =
        fdd_backward_nested(m, {make_constant(), ind[0], ind[1]}, grid)
            .value;
    CHECK(nested == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("three-epoch bivariate route stays within monte carlo error bars") {
    const QuadratureConfig cfg = fast_cfg();
    const ProcessModel m = make_gauss_gauss(1.0);
    const TimeGrid grid({0.5, 1.0, 2.0});
    const std::vector<TestFunction> fs{make_exp_neg_sq(), make_exp_neg_sq(),
                                       make_indicator(0.0)};
    const double biv = fdd_bivariate(m, fs, grid, cfg).value;
    const MCEstimate mc = fdd_monte_carlo(
        m, grid, {make_constant(), fs[0], fs[1], fs[2]}, 200000, 11);
    CHECK(std::fabs(biv - mc.mean) < 3.0 * mc.std_error);
}

TEST_CASE("nested route rejects more than two epochs") {
    const ProcessModel m = make_gauss_gauss(1.0);
    const std::vector<TestFunction> fs(4, make_constant());
    CHECK_THROWS_AS(
        fdd_backward_nested(m, fs, TimeGrid({1.0, 2.0, 3.0})),
        std::invalid_argument);
}

TEST_CASE("shifting every epoch equals weighting by the exponent") {
    // E prod f_i(X_{t_i + t}) = E[ prod f_i(X_{t_i}) E(t, X_0) ], both sides
    // evaluated by the forward oracle.
    const QuadratureConfig cfg = fast_cfg();
    for (const ProcessModel& m :
         {make_gauss_gauss(1.0), make_ou_shift(1.0, 0.5, 0.3)}) {
        const double t = 0.5;
        const TimeGrid base({1.0, 2.0});
        const TimeGrid shifted({1.0 + t, 2.0 + t});
        const std::vector<TestFunction> fs{make_exp_neg_sq(),
                                           make_indicator(0.2)};
        const double lhs = fdd_forward(
            m, shifted, {make_constant(), fs[0], fs[1]}, cfg);
        TestFunction weight;
        weight.name = "exponent_weight";
        weight.f = [&m, t](double z) { return foed_exponent(m, t, z); };
        weight.sup_bound = 10.0;
        const double rhs = fdd_forward(m, base, {weight, fs[0], fs[1]}, cfg);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("degenerate single-integral route carries its own reference") {
    const ProcessModel m = make_gauss_gauss(2.0);
    const XindiResult r = fdd_degenerate_xindi(
        m, {make_constant(), make_constant()}, TimeGrid({1.0, 2.0}));
    CHECK(r.result.method == "degenerate_xindi");
    // The single integral evaluates to a / sqrt(a^2 - t1 (t2 - t1)) =
    // 2/sqrt(3) while the joint law integrates to 1.
    CHECK(r.result.value ==
          doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-9));
    CHECK(r.reference_value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.discrepancy ==
          doctest::Approx(2.0 / std::sqrt(3.0) - 1.0).epsilon(1e-6));
}

TEST_CASE("degenerate route refuses non-integrable exponent products") {
    // At a = 1 with increments (1, 1) the weight E(1, z) E(1, z) g(z) has a
    // flat tail: the formula is refused loudly rather than truncated.
    const ProcessModel m = make_gauss_gauss(1.0);
    CHECK_THROWS_AS(
        fdd_degenerate_xindi(m, {make_constant(), make_constant()},
                             TimeGrid({1.0, 2.0})),
        std::domain_error);
}

TEST_CASE("degenerate route with one epoch references the plain marginal") {
    const ProcessModel m = make_gauss_gauss(2.0);
    const XindiResult r =
        fdd_degenerate_xindi(m, {make_exp_neg_sq()}, TimeGrid({0.5}));
    // n = 1 is the one case where the single integral is exact.
    CHECK(r.result.value ==
          doctest::Approx(r.reference_value).epsilon(1e-7));
    CHECK(r.discrepancy < 1e-7);
}

TEST_CASE("kernel probe finds no trivializing direction in the zoo") {
    const std::vector<TestFunction> trials{make_exp_neg_sq(),
                                           make_gaussian_bump(1.0, 0.7)};
    for (const ProcessModel& m :
         {make_gauss_gauss(1.0), make_ou_shift(1.0, 0.5, 0.3)}) {
        const std::vector<IdentityReport> rows =
            kernel_triviality_probe(m, 1.0, trials);
        REQUIRE(rows.size() == 2 * trials.size());
        for (const IdentityReport& r : rows) {
            CHECK(r.status == "pass");
            CHECK(r.lhs > 1e-6);
        }
    }
}
