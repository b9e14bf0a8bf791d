#pragma once

// Shared helpers for the test suites: small random problem generators, an
// independent Newton–Raphson fitter used as a reference for IRLS results,
// and brute-force enumeration of all strong-hierarchy models.  Everything
// here is deliberately written against the math, not against the library
// internals it checks.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "shl0/dataset.hpp"
#include "shl0/family.hpp"
#include "shl0/fit.hpp"
#include "shl0/model.hpp"
#include "shl0/rng.hpp"

namespace testsupport {

using shl0::MatX;
using shl0::VecX;
using Vec = VecX<double>;
using Mat = MatX<double>;

inline Mat random_design(int n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(shl0::derive_seed(seed, 0xabcd));
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
    shl0::standardize_columns(x);
    return x;
}

inline Vec random_normal(int n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(shl0::derive_seed(seed, 0xef01));
    std::normal_distribution<double> normal(0.0, sd);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

/// Reference GLM fit by damped Newton–Raphson on the log-likelihood,
/// independent of the IRLS code path under test.  Canonical links only.
struct NewtonRef {
    Vec beta;
    double loglik = 0;
    bool converged = false;
};

inline NewtonRef newton_glm(const shl0::Family<double>& family, const Vec& y, const Mat& x,
                            int max_iter = 200) {
    using shl0::FamilyKind;
    const Eigen::Index q = x.cols();
    Vec beta = Vec::Zero(q);
    NewtonRef out;
    auto loglik_at = [&](const Vec& b) {
        Vec eta = x * b;
        double ll = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            switch (family.kind()) {
                case FamilyKind::Gaussian:
                    ll += -(y[i] - eta[i]) * (y[i] - eta[i]) / 2.0;
                    break;
                case FamilyKind::Poisson:
                    ll += y[i] * eta[i] - std::exp(eta[i]);
                    break;
                case FamilyKind::Binomial:
                    ll += y[i] * eta[i] -
                          family.trials()[i] * std::log(1.0 + std::exp(eta[i]));
                    break;
            }
        }
        return ll;
    };
    double ll = loglik_at(beta);
    for (int iter = 0; iter < max_iter; ++iter) {
        Vec eta = x * beta;
        Vec mu = family.mean(eta);
        Vec w = family.variance(eta, false);
        Vec grad = x.transpose() * (y - mu);
        Mat hess = x.transpose() * w.asDiagonal() * x;
        Vec step = hess.ldlt().solve(grad);
        double t = 1.0;
        Vec cand = beta + step;
        double llc = loglik_at(cand);
        for (int h = 0; h < 40 && !(llc >= ll - 1e-14); ++h) {
            t /= 2.0;
            cand = beta + t * step;
            llc = loglik_at(cand);
        }
        const double change = std::abs(llc - ll);
        beta = cand;
        ll = llc;
        if (change < 1e-13 * (1.0 + std::abs(ll))) {
            out.converged = true;
            break;
        }
    }
    out.beta = beta;
    out.loglik = ll;
    return out;
}

/// Score statistic assembled literally from the gradient and the Fisher
/// information of the one-column-expanded model at (beta_hat, 0), as an
/// independent check of the projected closed form.
inline double direct_score_stat(const shl0::Family<double>& family,
                                const shl0::Dataset<double>& data,
                                const shl0::FitResult<double>& fit, int j, int k) {
    Mat xa = shl0::design_matrix(data, fit.alpha);
    Mat xext(xa.rows(), xa.cols() + 1);
    xext.leftCols(xa.cols()) = xa;
    xext.col(xa.cols()) = data.column(j, k);
    Vec mu = family.mean(fit.eta);
    Vec w = family.variance(fit.eta, false);
    Vec grad = xext.transpose() * (data.y() - mu) / fit.phi_hat;
    Mat info = xext.transpose() * w.asDiagonal() * xext / fit.phi_hat;
    return grad.dot(info.ldlt().solve(grad));
}

/// All strong-hierarchy models over variables {1..p} (interactions only
/// between selected mains), optionally capped in size.
inline std::vector<shl0::ModelAlpha> enumerate_sh_models(int p, int max_size = 0) {
    std::vector<shl0::ModelAlpha> models;
    for (int mask = 0; mask < (1 << p); ++mask) {
        std::vector<int> mains;
        for (int j = 0; j < p; ++j)
            if (mask & (1 << j)) mains.push_back(j + 1);
        std::vector<shl0::IndexPair> pairs;
        for (std::size_t a = 0; a < mains.size(); ++a)
            for (std::size_t b = a + 1; b < mains.size(); ++b)
                pairs.push_back({mains[a], mains[b]});
        const int np = static_cast<int>(pairs.size());
        for (int pmask = 0; pmask < (1 << np); ++pmask) {
            std::vector<shl0::IndexPair> chosen;
            for (int q = 0; q < np; ++q)
                if (pmask & (1 << q)) chosen.push_back(pairs[static_cast<std::size_t>(q)]);
            shl0::ModelAlpha alpha(mains, chosen);
            if (max_size > 0 && alpha.size() > max_size) continue;
            models.push_back(std::move(alpha));
        }
    }
    return models;
}

}  // namespace testsupport
