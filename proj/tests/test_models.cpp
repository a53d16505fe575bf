#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "foedlab/model.hpp"
#include "foedlab/quadrature.hpp"
#include "foedlab/rng.hpp"

using namespace foedlab;

namespace {

std::vector<ProcessModel> zoo() {
    std::vector<ProcessModel> models;
    models.push_back(make_gauss_gauss(1.0));
    models.push_back(make_ou_shift(1.0, 0.5, 0.3));
    models.push_back(make_besq_shift(1.0, 2.0, 1.0));
    models.push_back(make_besq_shift(0.5, 3.0, 2.0));
    return models;
}

double interior_point(const ProcessModel& m, double t) {
    // A state well inside the support at epoch t.
    const double x = m.marginal_mean(t);
    if (x > m.domain.lo && x < m.domain.hi) return x;
    return 0.5 * (m.domain.lo + std::min(m.domain.hi, m.domain.lo + 2.0));
}

}  // namespace

TEST_CASE("time grids validate on construction") {
    CHECK_NOTHROW(TimeGrid({0.5, 1.0, 2.5}));
    CHECK_THROWS_AS(TimeGrid({0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({2.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({-1.0}), std::invalid_argument);
    CHECK_NOTHROW(TimeGrid(std::vector<double>{}));
}

TEST_CASE("factories validate their parameters") {
    CHECK_THROWS_AS(make_gauss_gauss(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_gauss_gauss(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_ou_shift(1.0, -0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_besq_shift(1.0, 0.0, 1.0), std::invalid_argument);
    // The closed-form exponent divides by I_nu(sqrt(y0 z)/a); y0 = 0 would
    // make that a 0/0 and is rejected outright.
    CHECK_THROWS_AS(make_besq_shift(1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("the name factory resolves defaults and rejects unknown keys") {
    const ProcessModel gg = make_model("gauss_gauss", {});
    CHECK(gg.params.at("a") == 1.0);
    const ProcessModel ou = make_model("ou_shift", {{"lambda", 0.25}});
    CHECK(ou.params.at("lambda") == 0.25);
    CHECK(ou.params.at("a") == 1.0);
    CHECK(ou.params.at("y0") == 0.0);
    const ProcessModel bq = make_model("besq_shift", {});
    CHECK(bq.params.at("delta") == 2.0);
    CHECK(bq.params.at("y0") == 1.0);

    CHECK_THROWS_AS(make_model("brownian", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_model("gauss_gauss", {{"sigma", 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_model("besq_shift", {{"nu", 0.5}}),
                    std::invalid_argument);
}

TEST_CASE("initial densities integrate to one") {
    QuadratureConfig tight;
    tight.abs_tol = 1e-12;
    tight.rel_tol = 1e-11;
    for (const auto& m : zoo()) {
        const double mass =
            integrate_1d(m.initial_density, m.marginal_window(0.0), tight);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("transition densities integrate to one in the target") {
    for (const auto& m : zoo()) {
        const double t = 0.7;
        const double x = interior_point(m, 0.0);
        const double mass = integrate_1d(
            [&](double y) { return m.transition_density(t, x, y); },
            m.transition_window(t, x));
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("transition kernels satisfy Chapman-Kolmogorov") {
    for (const auto& m : zoo()) {
        for (auto [s, t] : {std::pair{0.25, 0.5}, std::pair{0.5, 1.0}}) {
            const double x = interior_point(m, 0.0);
            const double y = interior_point(m, s + t) + 0.3;
            const double direct = m.transition_density(s + t, x, y);
            const Interval mid = m.transition_window(s, x);
            const double composed = integrate_1d(
                [&, s, t](double z) {
                    return m.transition_density(s, x, z) *
                           m.transition_density(t, z, y);
                },
                mid);
            CHECK(composed == doctest::Approx(direct).epsilon(1e-8));
        }
    }
}

TEST_CASE("closed-form exponents match the defining quadrature") {
    // E(t, z) = (1 / g(z)) int p_t(v, z) g(v) dv: integrate over the source
    // argument of the kernel.
    for (const auto& m : zoo()) {
        for (double t : {0.1, 0.5, 1.0, 3.0}) {
            for (int i = -2; i <= 2; ++i) {
                const double z =
                    m.marginal_mean(0.0) + 0.7 * i * m.marginal_sd(0.0);
                if (z <= m.domain.lo || z >= m.domain.hi) continue;
                const Interval src = m.source_window(t, z);
                const Interval init = m.marginal_window(0.0);
                const Interval dom{std::max(src.lo, init.lo),
                                   std::min(src.hi, init.hi)};
                const double phi = integrate_1d(
                    [&, t, z](double v) {
                        return m.transition_density(t, v, z) *
                               m.initial_density(v);
                    },
                    dom);
                const double expected = phi / m.initial_density(z);
                CHECK(m.closed_form_foed(t, z) ==
                      doctest::Approx(expected).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("exponent at time zero is one") {
    for (const auto& m : zoo()) {
        const double z = interior_point(m, 0.0) + 0.4;
        CHECK(m.closed_form_foed(0.0, z) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gauss_gauss exponent closed form at pinned points") {
    const ProcessModel m = make_gauss_gauss(1.0);
    // sqrt(a / (a + t)) exp(z^2 t / (2 a (a + t)))
    CHECK(m.closed_form_foed(1.0, 0.0) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(m.closed_form_foed(1.0, 1.0) ==
          doctest::Approx(std::sqrt(0.5) * std::exp(0.25)).epsilon(1e-14));
}

TEST_CASE("ou_shift with lambda zero and no shift reduces to gauss_gauss") {
    const ProcessModel ou = make_ou_shift(1.0, 0.0, 0.0);
    const ProcessModel gg = make_gauss_gauss(1.0);
    for (double t : {0.3, 1.0, 2.0}) {
        for (double z : {-1.5, 0.0, 0.8}) {
            CHECK(ou.closed_form_foed(t, z) ==
                  doctest::Approx(gg.closed_form_foed(t, z)).epsilon(1e-13));
            CHECK(ou.transition_density(t, 0.4, z) ==
                  doctest::Approx(gg.transition_density(t, 0.4, z))
                      .epsilon(1e-13));
        }
    }
}

TEST_CASE("marginal mean and sd match quadrature moments") {
    for (const auto& m : zoo()) {
        for (double t : {0.0, 1.0}) {
            const Interval w = m.marginal_window(t);
            auto density = [&, t](double z) {
                // Weighted initial law at epoch t via the closed form.
                return m.initial_density(z) * m.closed_form_foed(t, z);
            };
            const double mean =
                integrate_1d([&](double z) { return z * density(z); }, w);
            const double second =
                integrate_1d([&](double z) { return z * z * density(z); }, w);
            const double sd = std::sqrt(second - mean * mean);
            CHECK(mean == doctest::Approx(m.marginal_mean(t)).epsilon(1e-7));
            CHECK(sd == doctest::Approx(m.marginal_sd(t)).epsilon(1e-7));
        }
    }
}

TEST_CASE("single transition samples have the kernel's moments") {
    for (const auto& m : zoo()) {
        const double t = 0.8;
        const double x = interior_point(m, 0.0) + 0.5;
        const Interval w = m.transition_window(t, x);
        const double mean_ref = integrate_1d(
            [&](double y) { return y * m.transition_density(t, x, y); }, w);
        const double second_ref = integrate_1d(
            [&](double y) { return y * y * m.transition_density(t, x, y); },
            w);
        const double var_ref = second_ref - mean_ref * mean_ref;

        CounterRng rng(555);
        const int n = 40000;
        double sum = 0.0;
        double sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = m.sample_step(rng, t, x);
            sum += y;
            sumsq += y * y;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        const double se = std::sqrt(var_ref / n);
        CHECK(std::fabs(mean - mean_ref) < 5.0 * se);
        CHECK(std::fabs(var - var_ref) < 0.1 * var_ref);
    }
}

TEST_CASE("initial samples follow the initial law") {
    for (const auto& m : zoo()) {
        CounterRng rng(777);
        const int n = 40000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += m.sample_initial(rng);
        const double se = m.marginal_sd(0.0) / std::sqrt(n);
        CHECK(std::fabs(sum / n - m.marginal_mean(0.0)) < 5.0 * se);
    }
}

TEST_CASE("paths are reproducible from the seed and respect the grid") {
    const TimeGrid grid({0.5, 1.0, 2.0});
    for (const auto& m : zoo()) {
        CounterRng a(42);
        CounterRng b(42);
        const std::vector<double> pa = sample_path(m, grid, a);
        const std::vector<double> pb = sample_path(m, grid, b);
        REQUIRE(pa.size() == 4);  // X_0 plus one state per epoch
        CHECK(pa == pb);
        for (double v : pa) {
            CHECK(v > m.domain.lo - 1e-12);
            CHECK(v < m.domain.hi);
        }
    }
}

TEST_CASE("besq transition matches the series form at a pinned point") {
    // delta = 2 means nu = 0: p_t(x, y) = (1/(2t)) e^{-(x+y)/(2t)} I_0(sqrt(xy)/t)
    const ProcessModel m = make_besq_shift(1.0, 2.0, 1.0);
    const double t = 0.9;
    const double x = 1.3;
    const double y = 2.1;
    const double direct = m.transition_density(t, x, y);
    // Independent I_0 evaluation straight from the power series.
    const double bessel_arg = std::sqrt(x * y) / t;
    double series = 0.0;
    double term = 1.0;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            term *= (bessel_arg * bessel_arg / 4.0) / (k * k);
        }
        series += term;
    }
    const double reference =
        std::exp(-(x + y) / (2.0 * t)) / (2.0 * t) * series;
    CHECK(direct == doctest::Approx(reference).epsilon(1e-12));
}
