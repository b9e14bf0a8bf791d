#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shl0/dataset.hpp"
#include "shl0/errors.hpp"
#include "shl0/family.hpp"
#include "shl0/fit.hpp"
#include "shl0/model.hpp"

namespace shl0 {

enum class ScreenMethod { Assis, Alrsis };

/// Outcome of one screening round: aggregated per-variable statistics for
/// every candidate outside the base model, and the shrunk active set
/// (base mains united with the top-ranked candidates).
template <class Scalar = double>
struct ScreenResult {
    ModelAlpha base_alpha;
    ScreenMethod method = ScreenMethod::Assis;
    int d_gamma = 0;
    std::vector<std::pair<int, Scalar>> stats;      // (j, aggregated stat), ranked descending
    std::vector<std::pair<int, int>> best_partner;  // (j, argmax k); k == 0 means main effect
    std::vector<int> shrunk;                        // sorted active set, contains base mains
    int failed_fits = 0;

    bool in_shrunk(int j) const {
        return std::binary_search(shrunk.begin(), shrunk.end(), j);
    }
};

/// IRLS byproducts of a fitted base model, fixed once per screening round:
/// working response z, weight diagonal W (dispersion-free), the projection
/// onto the weighted column span of the base design, and the residual
/// direction r used by the score statistic.
template <class Scalar = double>
struct WorkingQuantities {
    const Dataset<Scalar>* data = nullptr;
    VecX<Scalar> z;
    VecX<Scalar> w;
    VecX<Scalar> sqrt_w;
    MatX<Scalar> a;  // W^{1/2} X_alpha, intercept column included
    Eigen::LDLT<MatX<Scalar>> gram;
    VecX<Scalar> r;
    VecX<Scalar> a_t_r;
    Scalar phi = 1;

    /// Projection onto the weighted base column span.
    VecX<Scalar> project(const VecX<Scalar>& v) const {
        return a * gram.solve(a.transpose() * v);
    }
    VecX<Scalar> residualize(const VecX<Scalar>& v) const { return v - project(v); }
};

template <class Scalar>
WorkingQuantities<Scalar> working_quantities(const Family<Scalar>& family,
                                             const Dataset<Scalar>& data,
                                             const FitResult<Scalar>& fit) {
    WorkingQuantities<Scalar> wq;
    wq.data = &data;
    wq.phi = fit.phi_hat;
    wq.w = family.variance(fit.eta, true);
    if (wq.w.maxCoeff() < Scalar(1e-300))
        throw DegenerateWeights("screening: all working weights vanish");
    wq.sqrt_w = wq.w.cwiseSqrt();
    VecX<Scalar> mu = family.mean(fit.eta, true);
    wq.z = fit.eta + (data.y() - mu).cwiseQuotient(wq.w);

    MatX<Scalar> x = design_matrix(data, fit.alpha);
    wq.a = wq.sqrt_w.asDiagonal() * x;
    wq.gram.compute(wq.a.transpose() * wq.a);
    if (wq.gram.info() != Eigen::Success)
        throw SingularDesign("screening: base design is rank deficient");

    // z - X*beta = (y - mu)/W at the fitted eta, so W^{1/2}(z - X*beta)
    // reduces to (y - mu)/sqrt(W); residualize it against the base span.
    VecX<Scalar> raw = (data.y() - mu).cwiseQuotient(wq.sqrt_w);
    wq.r = raw - wq.project(raw);
    wq.a_t_r = wq.a.transpose() * wq.r;
    return wq;
}

/// Scratch buffers for repeated score-statistic evaluations.
template <class Scalar = double>
struct ScoreWorkspace {
    VecX<Scalar> col, u, t, c;
};

/// Single-degree-of-freedom score statistic for adding the column x_j o x_k
/// (k == 0: the plain main effect x_j) to the base model:
///   S = <r, s>^2 / (phi * ||s||^2),  s = (I - P) W^{1/2} (x_j o x_k).
/// Returns 0 when the candidate direction already lies in the base span.
template <class Scalar>
Scalar score_statistic(const WorkingQuantities<Scalar>& wq, int j, int k,
                       ScoreWorkspace<Scalar>* ws = nullptr) {
    ScoreWorkspace<Scalar> local;
    ScoreWorkspace<Scalar>& b = ws ? *ws : local;
    wq.data->column_into(j, k, b.col);
    b.u = wq.sqrt_w.cwiseProduct(b.col);
    b.t.noalias() = wq.a.transpose() * b.u;
    b.c = wq.gram.solve(b.t);
    const Scalar u2 = b.u.squaredNorm();
    const Scalar ns2 = std::max(u2 - b.t.dot(b.c), Scalar(0));
    // ||s|| < 1e-10, or in the base span to working precision
    if (ns2 < Scalar(1e-20) || ns2 < Scalar(1e-12) * u2) return Scalar(0);
    const Scalar ip = wq.r.dot(b.u) - wq.a_t_r.dot(b.c);
    return ip * ip / (wq.phi * ns2);
}

namespace detail {

/// Ranks candidates by statistic (descending, ties by ascending index) and
/// assembles the shrunk set of size min(d_gamma, #candidates) united with
/// the base mains.
template <class Scalar>
void finish_screen(ScreenResult<Scalar>& sr, Scalar gamma, int n) {
    std::stable_sort(sr.stats.begin(), sr.stats.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    sr.d_gamma = static_cast<int>(std::floor(gamma * Scalar(n)));
    const int take = std::min<int>(sr.d_gamma, static_cast<int>(sr.stats.size()));
    sr.shrunk = sr.base_alpha.mains();
    for (int i = 0; i < take; ++i) sr.shrunk.push_back(sr.stats[i].first);
    std::sort(sr.shrunk.begin(), sr.shrunk.end());
}

template <class Scalar>
FitResult<Scalar> base_fit_or(const Family<Scalar>& family, const Dataset<Scalar>& data,
                              const ModelAlpha& base, const FitResult<Scalar>* given,
                              const FitOptions<Scalar>& options) {
    FitResult<Scalar> fit = (given && given->alpha == base) ? *given
                                                            : fit_mle(family, data, base, options);
    if (!fit.converged) throw std::runtime_error("screening: base model fit did not converge");
    return fit;
}

}  // namespace detail

/// Aggregated-score screening.  Needs only the base-model MLE: for each
/// candidate j the statistic is max over partners k (0 = none) of the score
/// statistic of the single added column x_j o x_k.
template <class Scalar>
ScreenResult<Scalar> assis_screen(const Family<Scalar>& family, const Dataset<Scalar>& data,
                                  const ModelAlpha& base_alpha, Scalar gamma,
                                  const FitOptions<Scalar>& options = {},
                                  const FitResult<Scalar>* base_fit = nullptr) {
    if (!(gamma > Scalar(0))) throw std::domain_error("assis_screen: gamma must be positive");
    FitResult<Scalar> fit = detail::base_fit_or(family, data, base_alpha, base_fit, options);
    WorkingQuantities<Scalar> wq = working_quantities(family, data, fit);

    std::vector<int> cand;
    for (int j = 1; j <= data.p(); ++j)
        if (!base_alpha.has_main(j)) cand.push_back(j);

    const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> agg(cand.size(), neg_inf);
    std::vector<int> arg(cand.size(), 0);
    ScoreWorkspace<Scalar> ws;

    auto consider = [&](std::size_t idx, int partner, Scalar s) {
        if (s > agg[idx]) {
            agg[idx] = s;
            arg[idx] = partner;
        }
    };
    for (std::size_t a = 0; a < cand.size(); ++a)
        consider(a, 0, score_statistic(wq, cand[a], 0, &ws));
    for (std::size_t a = 0; a < cand.size(); ++a) {
        for (std::size_t b = a + 1; b < cand.size(); ++b) {
            const Scalar s = score_statistic(wq, cand[a], cand[b], &ws);
            consider(a, cand[b], s);
            consider(b, cand[a], s);
        }
    }

    ScreenResult<Scalar> sr;
    sr.base_alpha = base_alpha;
    sr.method = ScreenMethod::Assis;
    sr.stats.reserve(cand.size());
    for (std::size_t a = 0; a < cand.size(); ++a) {
        sr.stats.emplace_back(cand[a], agg[a]);
        sr.best_partner.emplace_back(cand[a], arg[a]);
    }
    detail::finish_screen(sr, gamma, data.n());
    return sr;
}

/// Aggregated likelihood-ratio screening: the statistic for candidate j is
/// max over partners k of the deviance drop from refitting the base model
/// with the single extra column x_j o x_k.  One full IRLS fit per pair, so
/// roughly O(p^2) fits against the single fit needed by assis_screen.
template <class Scalar>
ScreenResult<Scalar> alrsis_screen(const Family<Scalar>& family, const Dataset<Scalar>& data,
                                   const ModelAlpha& base_alpha, Scalar gamma,
                                   const FitOptions<Scalar>& options = {},
                                   const FitResult<Scalar>* base_fit = nullptr) {
    if (!(gamma > Scalar(0))) throw std::domain_error("alrsis_screen: gamma must be positive");
    FitResult<Scalar> fit = detail::base_fit_or(family, data, base_alpha, base_fit, options);

    std::vector<int> cand;
    for (int j = 1; j <= data.p(); ++j)
        if (!base_alpha.has_main(j)) cand.push_back(j);

    const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> agg(cand.size(), neg_inf);
    std::vector<int> arg(cand.size(), 0);
    int failed = 0;

    const int n = data.n();
    MatX<Scalar> xext(n, fit.df + 1);
    xext.leftCols(fit.df) = design_matrix(data, base_alpha);
    detail::IrlsWorkspace<Scalar> irls_ws;
    const bool fixed_phi = !family.has_dispersion();
    const Scalar cy = fixed_phi ? loglik_constant(family, data.y()) : Scalar(0);

    auto lr_stat = [&](int j, int k) -> Scalar {
        data.column_into(j, k, xext.col(fit.df));
        try {
            FitResult<Scalar> ext = detail::irls<Scalar>(family, data.y(), xext, options,
                                                         &fit.eta, fixed_phi ? &cy : nullptr,
                                                         irls_ws);
            if (!ext.converged) throw std::runtime_error("expanded fit did not converge");
            return std::max(fit.deviance - ext.deviance, Scalar(0));
        } catch (const std::exception&) {
            ++failed;
            return neg_inf;
        }
    };

    auto consider = [&](std::size_t idx, int partner, Scalar s) {
        if (s > agg[idx]) {
            agg[idx] = s;
            arg[idx] = partner;
        }
    };
    for (std::size_t a = 0; a < cand.size(); ++a) consider(a, 0, lr_stat(cand[a], 0));
    for (std::size_t a = 0; a < cand.size(); ++a) {
        for (std::size_t b = a + 1; b < cand.size(); ++b) {
            const Scalar s = lr_stat(cand[a], cand[b]);
            consider(a, cand[b], s);
            consider(b, cand[a], s);
        }
    }

    ScreenResult<Scalar> sr;
    sr.base_alpha = base_alpha;
    sr.method = ScreenMethod::Alrsis;
    sr.failed_fits = failed;
    sr.stats.reserve(cand.size());
    for (std::size_t a = 0; a < cand.size(); ++a) {
        sr.stats.emplace_back(cand[a], agg[a]);
        sr.best_partner.emplace_back(cand[a], arg[a]);
    }
    detail::finish_screen(sr, gamma, data.n());
    return sr;
}

template <class Scalar>
ScreenResult<Scalar> screen(const Family<Scalar>& family, const Dataset<Scalar>& data,
                            const ModelAlpha& base_alpha, Scalar gamma, ScreenMethod method,
                            const FitOptions<Scalar>& options = {},
                            const FitResult<Scalar>* base_fit = nullptr) {
    return method == ScreenMethod::Assis
               ? assis_screen(family, data, base_alpha, gamma, options, base_fit)
               : alrsis_screen(family, data, base_alpha, gamma, options, base_fit);
}

}  // namespace shl0
