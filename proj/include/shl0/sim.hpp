#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "shl0/dataset.hpp"
#include "shl0/family.hpp"
#include "shl0/rng.hpp"
#include "shl0/search.hpp"
#include "shl0/tuning.hpp"

namespace shl0 {

enum class SimModel { Linear, Logistic };
enum class SimCase { A, B, C };

inline char sim_case_label(SimCase c) { return c == SimCase::A ? 'a' : c == SimCase::B ? 'b' : 'c'; }

/// One Monte Carlo experiment: a planted truth, a design law, and the
/// selection settings applied to every replication.
struct SimConfig {
    SimModel model = SimModel::Linear;
    int n = 0;  // <= 0: family default (linear 200, logistic 500)
    int p = 0;  // <= 0: family default (linear 2000, logistic 100)
    double rho = 0.0;
    SimCase scase = SimCase::A;
    int replications = 100;
    std::uint64_t seed = 1;
    KappaRule kappa_rule = KappaRule::ebic();
    double gamma = 0.0;  // <= 0: 1/log n
    int restarts = 10;
    int rounds = 2;
    int max_model_size = 0;
    int threads = 1;

    int resolved_n() const { return n > 0 ? n : (model == SimModel::Linear ? 200 : 500); }
    int resolved_p() const { return p > 0 ? p : (model == SimModel::Linear ? 2000 : 100); }

    void validate() const {
        if (replications < 1) throw ConfigError("simulate: replications must be >= 1");
        if (rho < 0.0 || rho >= 1.0) throw ConfigError("simulate: rho must lie in [0, 1)");
        const int need = model == SimModel::Linear ? 6 : 4;
        if (resolved_p() < need)
            throw ConfigError("simulate: p too small for the planted model");
        if (resolved_n() < 10) throw ConfigError("simulate: n too small");
    }
};

/// Correlated gaussian design: a random permutation tau places the columns
/// on an AR(1) chain, cov(x_j, x_k) = rho^|tau(j)-tau(k)|, rows independent.
/// Columns are standardized afterwards.
inline Eigen::MatrixXd gen_correlated_design(int n, int p, double rho, std::uint64_t seed) {
    if (rho < 0.0 || rho >= 1.0) throw std::domain_error("design: rho must lie in [0, 1)");
    std::mt19937_64 rng(derive_seed(seed, 0xde51));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<int> tau(static_cast<std::size_t>(p));
    std::iota(tau.begin(), tau.end(), 0);
    std::shuffle(tau.begin(), tau.end(), rng);

    Eigen::MatrixXd x(n, p);
    const double carry = std::sqrt(1.0 - rho * rho);
    Eigen::VectorXd w(p);
    for (int i = 0; i < n; ++i) {
        w[0] = normal(rng);
        for (int t = 1; t < p; ++t) w[t] = rho * w[t - 1] + carry * normal(rng);
        for (int j = 0; j < p; ++j) x(i, j) = w[tau[static_cast<std::size_t>(j)]];
    }
    standardize_columns(x);
    return x;
}

/// Planted truth for the linear design: interactions (1,4), (1,5), (5,6)
/// with coefficient 3; the active mains depend on the case.
inline ModelAlpha true_linear_alpha(SimCase scase) {
    std::vector<IndexPair> inters{{1, 4}, {1, 5}, {5, 6}};
    if (scase == SimCase::C) return ModelAlpha({1, 4, 5, 6}, inters);
    return ModelAlpha({1, 2, 3, 4, 5, 6}, inters);
}

/// Planted truth for the logistic design: interactions (1,2), (1,3), (3,4).
inline ModelAlpha true_logistic_alpha(SimCase) {
    return ModelAlpha({1, 2, 3, 4}, {{1, 2}, {1, 3}, {3, 4}});
}

/// Gaussian response with unit noise.  Cases: (a) mains 1..4 at 3, (b)
/// mains 1..6 at 3, (c) no main effects.  `noise_scale` exists for exact-
/// recovery tests.
inline Eigen::VectorXd gen_linear_response(const Eigen::MatrixXd& x, SimCase scase,
                                           std::uint64_t seed, double noise_scale = 1.0) {
    if (x.cols() < 6) throw std::domain_error("linear response needs p >= 6");
    const int n = static_cast<int>(x.rows());
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    const int top = scase == SimCase::A ? 4 : scase == SimCase::B ? 6 : 0;
    for (int j = 0; j < top; ++j) eta += 3.0 * x.col(j);
    eta += 3.0 * x.col(0).cwiseProduct(x.col(3));  // x1*x4
    eta += 3.0 * x.col(0).cwiseProduct(x.col(4));  // x1*x5
    eta += 3.0 * x.col(4).cwiseProduct(x.col(5));  // x5*x6
    std::mt19937_64 rng(derive_seed(seed, 0x11e5));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) eta[i] += noise_scale * normal(rng);
    return eta;
}

/// Binomial(10, pi) response on the logit scale.  Cases: (a) mains 1, 2 at
/// 3, (b) mains 1..4 at 3, (c) no main effects.
inline Eigen::VectorXd gen_logistic_response(const Eigen::MatrixXd& x, SimCase scase,
                                             std::uint64_t seed, int trials = 10) {
    if (x.cols() < 4) throw std::domain_error("logistic response needs p >= 4");
    const int n = static_cast<int>(x.rows());
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    const int top = scase == SimCase::A ? 2 : scase == SimCase::B ? 4 : 0;
    for (int j = 0; j < top; ++j) eta += 3.0 * x.col(j);
    eta += 3.0 * x.col(0).cwiseProduct(x.col(1));  // x1*x2
    eta += 3.0 * x.col(0).cwiseProduct(x.col(2));  // x1*x3
    eta += 3.0 * x.col(2).cwiseProduct(x.col(3));  // x3*x4
    std::mt19937_64 rng(derive_seed(seed, 0x10615));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double pi = 1.0 / (1.0 + std::exp(-eta[i]));
        std::binomial_distribution<int> bin(trials, pi);
        y[i] = double(bin(rng));
    }
    return y;
}

/// True/false positive counts of a selected model against the planted one.
struct SelectionMetrics {
    int tp_main = 0, fp_main = 0, tp_inter = 0, fp_inter = 0;
    double tp_main_pct = 0, tp_inter_pct = 0;
    bool sh_ok = true;
};

inline SelectionMetrics evaluate_selection(const ModelAlpha& alpha_hat,
                                           const ModelAlpha& alpha_star) {
    SelectionMetrics m;
    for (int j : alpha_hat.mains())
        (alpha_star.has_main(j) ? m.tp_main : m.fp_main)++;
    for (const auto& [j, k] : alpha_hat.interactions())
        (alpha_star.has_interaction(j, k) ? m.tp_inter : m.fp_inter)++;
    if (!alpha_star.mains().empty())
        m.tp_main_pct = 100.0 * m.tp_main / double(alpha_star.mains().size());
    if (!alpha_star.interactions().empty())
        m.tp_inter_pct = 100.0 * m.tp_inter / double(alpha_star.interactions().size());
    m.sh_ok = check_strong_hierarchy(alpha_hat);
    return m;
}

struct SimReplication {
    int index = 0;
    ModelAlpha alpha_hat;
    ModelAlpha alpha_star;
    SelectionMetrics metrics;
    std::vector<int> screen_round1;
    bool screen_round1_covers_truth = false;
    double runtime_seconds = 0;
    bool failed = false;
    std::string error;
};

struct SimReport {
    SimConfig config;
    double lambda = 0, kappa = 0;
    double tp_main_pct = 0, tp_inter_pct = 0;
    double fp_main_mean = 0, fp_inter_mean = 0;
    double sh_violation_pct = 0;
    double screen_cover_pct = 0;  // round-1 active set contains the true mains
    double mean_runtime_seconds = 0;
    int failures = 0;
    std::vector<SimReplication> per_replication;
};

/// Runs one replication end to end: generate, select with lambda = kappa/n,
/// evaluate.
inline SimReplication run_replication(const SimConfig& config, int rep) {
    const int n = config.resolved_n();
    const int p = config.resolved_p();
    const std::uint64_t rep_seed = derive_seed(config.seed, 0x5e9, std::uint64_t(rep));

    SimReplication out;
    out.index = rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Eigen::MatrixXd x = gen_correlated_design(n, p, config.rho, rep_seed);
        Eigen::VectorXd y;
        Family<double> family = Family<double>::gaussian();
        if (config.model == SimModel::Linear) {
            y = gen_linear_response(x, config.scase, rep_seed);
            out.alpha_star = true_linear_alpha(config.scase);
        } else {
            y = gen_logistic_response(x, config.scase, rep_seed);
            family = Family<double>::binomial(VecX<double>::Constant(n, 10.0));
            out.alpha_star = true_logistic_alpha(config.scase);
        }
        Dataset<double> data(std::move(y), std::move(x));

        const double kap = kappa(config.kappa_rule, n, p);
        SelectConfig<double> sc;
        sc.restarts = config.restarts;
        sc.rounds = config.rounds;
        sc.gamma = config.gamma;
        sc.seed = rep_seed;
        sc.max_model_size = config.max_model_size;
        SelectionResult<double> sel = select(family, data, lambda_closed_form(kap, n), sc);

        out.alpha_hat = sel.alpha_hat;
        out.metrics = evaluate_selection(sel.alpha_hat, out.alpha_star);
        if (!sel.screen_sets.empty()) {
            out.screen_round1 = sel.screen_sets.front();
            out.screen_round1_covers_truth = true;
            for (int j : out.alpha_star.mains())
                if (!std::binary_search(out.screen_round1.begin(), out.screen_round1.end(), j))
                    out.screen_round1_covers_truth = false;
        }
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline SimReport run_experiment(const SimConfig& config) {
    config.validate();
    SimReport report;
    report.config = config;
    report.kappa = kappa(config.kappa_rule, config.resolved_n(), config.resolved_p());
    report.lambda = lambda_closed_form(report.kappa, config.resolved_n());
    report.per_replication.resize(static_cast<std::size_t>(config.replications));

    const int workers = std::max(1, config.threads);
    std::atomic<int> next{0};
    auto runner = [&] {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= config.replications) break;
            report.per_replication[static_cast<std::size_t>(rep)] = run_replication(config, rep);
        }
    };
    if (workers == 1) {
        runner();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(runner);
        for (auto& th : pool) th.join();
    }

    int ok = 0;
    for (const auto& r : report.per_replication) {
        if (r.failed) {
            ++report.failures;
            continue;
        }
        ++ok;
        report.tp_main_pct += r.metrics.tp_main_pct;
        report.tp_inter_pct += r.metrics.tp_inter_pct;
        report.fp_main_mean += r.metrics.fp_main;
        report.fp_inter_mean += r.metrics.fp_inter;
        report.sh_violation_pct += r.metrics.sh_ok ? 0.0 : 100.0;
        report.screen_cover_pct += r.screen_round1_covers_truth ? 100.0 : 0.0;
        report.mean_runtime_seconds += r.runtime_seconds;
    }
    if (ok > 0) {
        report.tp_main_pct /= ok;
        report.tp_inter_pct /= ok;
        report.fp_main_mean /= ok;
        report.fp_inter_mean /= ok;
        report.sh_violation_pct /= ok;
        report.screen_cover_pct /= ok;
        report.mean_runtime_seconds /= ok;
    }
    return report;
}

}  // namespace shl0
