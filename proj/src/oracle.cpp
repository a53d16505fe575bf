#include "foedlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace foedlab {

namespace {

void check_function_count(const TimeGrid& grid, const std::vector<TestFunction>& fs) {
    if (fs.size() != grid.size() + 1) {
        throw std::invalid_argument(
            "fdd oracle: need one function per epoch including epoch 0");
    }
}

double param(const ProcessModel& model, const std::string& key) {
    auto it = model.params.find(key);
    if (it == model.params.end()) {
        throw std::domain_error("oracle: model '" + model.name + "' lacks parameter " +
                                key);
    }
    return it->second;
}

double ou_variance(double lambda, double t) {
    if (lambda == 0.0) return t;
    return -std::expm1(-2.0 * lambda * t) / (2.0 * lambda);
}

}  // namespace

double fdd_forward(const ProcessModel& model, const TimeGrid& grid,
                   const std::vector<TestFunction>& fs, const QuadratureConfig& cfg) {
    check_function_count(grid, fs);
    const std::size_t n = grid.size();
    if (n + 1 > 4) {
        throw std::invalid_argument("fdd_forward: at most 4 chained epochs");
    }

    std::vector<Interval> domain;
    std::vector<std::vector<double>> splits;
    domain.push_back(model.marginal_window(0.0));
    splits.push_back(fs[0].jumps);
    for (std::size_t i = 0; i < n; ++i) {
        domain.push_back(model.marginal_window(grid.epochs[i]));
        splits.push_back(fs[i + 1].jumps);
    }

    auto integrand = [&](const std::vector<double>& z) {
        double w = model.initial_density(z[0]) * fs[0](z[0]);
        if (w == 0.0) return 0.0;
        double prev_t = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dt = grid.epochs[i] - prev_t;
            w *= model.transition_density(dt, z[i], z[i + 1]) * fs[i + 1](z[i + 1]);
            if (w == 0.0) return 0.0;
            prev_t = grid.epochs[i];
        }
        return w;
    };
    return integrate_nd(integrand, domain, cfg, splits);
}

MCEstimate fdd_monte_carlo(const ProcessModel& model, const TimeGrid& grid,
                           const std::vector<TestFunction>& fs, long n_paths,
                           unsigned long long seed) {
    check_function_count(grid, fs);
    if (n_paths <= 0) {
        throw std::invalid_argument("fdd_monte_carlo: need a positive path count");
    }
    if (!model.has_sampler()) {
        throw std::domain_error("fdd_monte_carlo: model '" + model.name +
                                "' has no sampler");
    }

    CounterRng root(seed);
    double mean = 0.0;
    double m2 = 0.0;
    for (long j = 0; j < n_paths; ++j) {
        CounterRng rng = root.substream(static_cast<unsigned long long>(j));
        const std::vector<double> path = sample_path(model, grid, rng);
        double y = 1.0;
        for (std::size_t i = 0; i < path.size(); ++i) y *= fs[i](path[i]);
        const double delta = y - mean;
        mean += delta / static_cast<double>(j + 1);
        m2 += delta * (y - mean);
    }

    MCEstimate out;
    out.mean = mean;
    out.n_samples = n_paths;
    out.seed = seed;
    if (n_paths > 1) {
        const double var = m2 / static_cast<double>(n_paths - 1);
        out.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(n_paths));
    }
    return out;
}

namespace {

GaussianVector gaussian_joint_unchecked(const ProcessModel& model,
                                        const std::vector<double>& epochs) {
    const auto k = static_cast<Eigen::Index>(epochs.size());
    GaussianVector out;
    out.mean = Eigen::VectorXd::Zero(k);
    out.covariance = Eigen::MatrixXd::Zero(k, k);

    const double a = param(model, "a");
    if (model.name == "gauss_gauss") {
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                out.covariance(i, j) = std::min(epochs[i], epochs[j]) + a;
            }
        }
        return out;
    }
    if (model.name == "ou_shift") {
        const double lambda = param(model, "lambda");
        const double y0 = param(model, "y0");
        for (Eigen::Index i = 0; i < k; ++i) {
            out.mean(i) = y0 * std::exp(-lambda * (epochs[i] + a));
        }
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                const double lo = std::min(epochs[i], epochs[j]);
                const double gap = std::fabs(epochs[i] - epochs[j]);
                out.covariance(i, j) =
                    std::exp(-lambda * gap) * ou_variance(lambda, lo + a);
            }
        }
        return out;
    }
    throw std::domain_error("gaussian_joint: model '" + model.name +
                            "' is not Gaussian");
}

}  // namespace

GaussianVector gaussian_joint(const ProcessModel& model,
                              const std::vector<double>& epochs) {
    if (epochs.empty()) {
        throw std::invalid_argument("gaussian_joint: need at least one epoch");
    }
    for (double s : epochs) {
        if (!std::isfinite(s) || s < 0.0) {
            throw std::invalid_argument("gaussian_joint: epochs must be >= 0");
        }
    }
    return gaussian_joint_unchecked(model, epochs);
}

GaussianVector gaussian_condition(const GaussianVector& joint,
                                  const std::vector<int>& observed_idx,
                                  const std::vector<double>& observed_values) {
    const Eigen::Index k = joint.mean.size();
    if (joint.covariance.rows() != k || joint.covariance.cols() != k) {
        throw std::invalid_argument("gaussian_condition: mean/covariance size mismatch");
    }
    if (observed_idx.size() != observed_values.size() || observed_idx.empty()) {
        throw std::invalid_argument(
            "gaussian_condition: need matching, nonempty index and value lists");
    }
    std::set<int> seen;
    for (int idx : observed_idx) {
        if (idx < 0 || idx >= k) {
            throw std::invalid_argument("gaussian_condition: index out of range");
        }
        if (!seen.insert(idx).second) {
            throw std::invalid_argument("gaussian_condition: repeated observed index");
        }
    }

    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!seen.count(static_cast<int>(i))) free_idx.push_back(i);
    }
    const auto nb = static_cast<Eigen::Index>(observed_idx.size());
    const auto na = static_cast<Eigen::Index>(free_idx.size());

    Eigen::VectorXd mu_a(na), mu_b(nb), vals(nb);
    Eigen::MatrixXd s_aa(na, na), s_ab(na, nb), s_bb(nb, nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        mu_a(i) = joint.mean(free_idx[i]);
        for (Eigen::Index j = 0; j < na; ++j) {
            s_aa(i, j) = joint.covariance(free_idx[i], free_idx[j]);
        }
        for (Eigen::Index j = 0; j < nb; ++j) {
            s_ab(i, j) = joint.covariance(free_idx[i], observed_idx[j]);
        }
    }
    for (Eigen::Index i = 0; i < nb; ++i) {
        mu_b(i) = joint.mean(observed_idx[i]);
        vals(i) = observed_values[i];
        for (Eigen::Index j = 0; j < nb; ++j) {
            s_bb(i, j) = joint.covariance(observed_idx[i], observed_idx[j]);
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(s_bb);
    if (llt.info() != Eigen::Success) {
        throw std::domain_error(
            "gaussian_condition: observed covariance block is not positive definite");
    }

    GaussianVector out;
    out.mean = mu_a + s_ab * llt.solve(vals - mu_b);
    out.covariance = s_aa - s_ab * llt.solve(s_ab.transpose());
    return out;
}

double bivariate_normal_orthant(double rho) {
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw std::invalid_argument("bivariate_normal_orthant: |rho| <= 1 required");
    }
    return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
}

}  // namespace foedlab
