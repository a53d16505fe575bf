#pragma once

#include <functional>
#include <vector>

#include "foedlab/functions.hpp"
#include "foedlab/model.hpp"
#include "foedlab/quadrature.hpp"
#include "foedlab/report.hpp"

namespace foedlab {

// A conditioning query: observe the path at 0, t_1, ..., t_n and condition
// on the state at the later epoch s + t_1 + ... + t_n.
//
// With the partial sums T_k = s + sum_{i<=k} t_i, the conditioning epoch is
// T_n and the kernel carrying the last observation epoch t_n to it has time
// T_{n-1} (note T_n - t_n = T_{n-1}).
struct ConditionalQuery {
    TimeGrid grid;  // observation epochs t_1 < ... < t_n
    double s = 0.0;  // nonnegative lag parameter
    double w = 0.0;  // conditioning state
};

double conditioning_epoch(const ConditionalQuery& q);   // s + sum_i t_i
double outer_kernel_time(const ConditionalQuery& q);    // s + sum_{i<n} t_i

// Variant selector for conditional_psi. increment_form carries one density
// ratio per grid increment, each ratio p_{dt_i}(z_{i-1}, z_i) / m_{dt_i}(z_i)
// with the marginal evaluated at the kernel target, plus the outer kernel
// ratio at time outer_kernel_time; it reproduces direct Bayes conditioning.
// lemma52_form is the same expression after rewriting every ratio with the
// absolute epoch in place of the increment and the kernel source in place of
// the target, dropping the kernel that couples z_{n-1} to z_n. The rewrite
// relies on exchanging kernel time against marginal epoch (the identity
// check_lemma_rela measures), which fails pointwise, so lemma52_form is kept
// only as a falsification probe and disagrees with the oracle off the
// coincidence set s = t_1.
enum class PsiVariant { increment_form, lemma52_form };

// E[ f_0(X_0) f_1(X_{t_1}) ... f_n(X_{t_n}) | X at conditioning_epoch = w ]
// through the nested bridge factorization: the backward chain
//   H_i = f_i * E(dt_i, .) * Lambda_{dt_i} H_{i-1},  H_0 = f_0,
// evaluated as E(T_{n-1}, w)/E(T_n, w) * (Lambda_{T_{n-1}} H_n)(w), with
// Lambda_0 read as the identity (only reachable for n = 1, s = 0).
// fs.size() must be grid.size() + 1; n <= 2 keeps nesting cost sane.
double conditional_product(const ProcessModel& model, const ConditionalQuery& q,
                           const std::vector<TestFunction>& fs,
                           const QuadratureConfig& cfg = {});

// Same value as a function of the conditioning state w, with the
// w-independent inner bridge layers tabulated once on uniform spline grids.
// Intended for scans over many w (tower checks); pointwise agreement with
// conditional_product is limited by the spline resolution (~1e-8 on the
// battery) rather than the quadrature tolerance.
std::function<double(double)> conditional_product_profile(
    const ProcessModel& model, const TimeGrid& grid, double s,
    const std::vector<TestFunction>& fs, const QuadratureConfig& cfg = {},
    int table_points = 2048);

// E[ Psi(X_0, ..., X_{t_n}) | X at conditioning_epoch = w ] as one
// (n+1)-dimensional integral of Psi against explicit conditional weights
// (see PsiVariant). n <= 3 keeps the dimension at most 4. psi_jumps, when
// given, lists jump locations per coordinate for quadrature panel seeding.
double conditional_psi(const ProcessModel& model, const ConditionalQuery& q,
                       const std::function<double(const std::vector<double>&)>& psi,
                       PsiVariant variant, const QuadratureConfig& cfg = {},
                       const std::vector<std::vector<double>>& psi_jumps = {});

// Density at v of the conditional law of X_0 given X_t = w:
//   p_t(v, w) g(v) / m_t(w),  m_t the time-t marginal density.
double eta_density(const ProcessModel& model, double t, double w, double v,
                   const QuadratureConfig& cfg = {});

// Measures both sides of the exchange identity
//   p_{s+t}(x, w) m_s(w)  vs  p_s(x, w) m_{s+t}(w).
// The two sides agree after integrating over w but not pointwise; the row
// reports the gap and flags it, asserting nothing beyond faithful values.
IdentityReport check_lemma_rela(const ProcessModel& model, double s, double t,
                                double x, double w,
                                const QuadratureConfig& cfg = {});

}  // namespace foedlab
