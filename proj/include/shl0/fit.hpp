#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "shl0/dataset.hpp"
#include "shl0/errors.hpp"
#include "shl0/family.hpp"
#include "shl0/model.hpp"

namespace shl0 {

template <class Scalar = double>
struct FitOptions {
    Scalar tol = Scalar(1e-8);  // relative deviance change
    int max_iter = 100;
};

/// Maximum-likelihood fit of one candidate model.  Coefficient vectors are
/// aligned with alpha.mains() / alpha.interactions(); the intercept is kept
/// separately and is never penalized by callers.
template <class Scalar = double>
struct FitResult {
    ModelAlpha alpha;
    Scalar beta0 = 0;
    VecX<Scalar> beta_main;
    VecX<Scalar> beta_inter;
    Scalar phi_hat = 1;
    Scalar loglik = 0;
    Scalar deviance = 0;
    int df = 0;  // nonzero coefficients including the intercept
    bool converged = false;
    int iterations = 0;
    int n_obs = 0;
    VecX<Scalar> eta;                    // fitted linear predictor
    std::vector<Scalar> deviance_trace;  // deviance at start, then per accepted step

    Scalar coef_main(int j) const {
        const auto& m = alpha.mains();
        auto it = std::lower_bound(m.begin(), m.end(), j);
        if (it == m.end() || *it != j) return Scalar(0);
        return beta_main[it - m.begin()];
    }
    Scalar coef_inter(int j, int k) const {
        const auto& q = alpha.interactions();
        auto key = ModelAlpha::ordered(j, k);
        auto it = std::lower_bound(q.begin(), q.end(), key);
        if (it == q.end() || *it != key) return Scalar(0);
        return beta_inter[it - q.begin()];
    }
};

/// Design matrix [1 | mains | interactions] for a model, columns in the
/// model's canonical order.
template <class Scalar>
MatX<Scalar> design_matrix(const Dataset<Scalar>& data, const ModelAlpha& alpha) {
    const int n = data.n();
    MatX<Scalar> x(n, 1 + alpha.size());
    x.col(0).setOnes();
    int c = 1;
    for (int j : alpha.mains()) x.col(c++) = data.main_col(j);
    for (const auto& [j, k] : alpha.interactions()) x.col(c++) = data.column(j, k);
    return x;
}

namespace detail {

/// Scratch for repeated IRLS runs; grows to the largest problem seen.
template <class Scalar>
struct IrlsWorkspace {
    MatX<Scalar> xw;    // sqrt(w)-scaled design, active rows only
    MatX<Scalar> gram;
    Eigen::LDLT<MatX<Scalar>> ldlt;
    VecX<Scalar> w, sw, mu, eta, eta_new, beta, beta_new, rhs, sweta;
    std::vector<int> active;
};

/// One IRLS solve of the weighted normal equations.  Rows whose weight is
/// negligible relative to the largest one are dropped from the Gram matrix
/// and from the X'W*eta part of the right-hand side; the gradient part
/// X'(y - mu) always uses every row, so no score information is lost.
template <class Scalar>
void weighted_step(const Eigen::Ref<const MatX<Scalar>>& x, const VecX<Scalar>& y,
                   IrlsWorkspace<Scalar>& ws) {
    const Eigen::Index n = x.rows();
    const Eigen::Index q = x.cols();
    const Scalar wmax = ws.w.maxCoeff();
    if (wmax < Scalar(1e-300)) throw DegenerateWeights("all IRLS weights vanish");
    const Scalar cutoff = Scalar(1e-10) * wmax;

    ws.active.clear();
    for (Eigen::Index i = 0; i < n; ++i)
        if (ws.w[i] > cutoff) ws.active.push_back(static_cast<int>(i));
    const Eigen::Index na = static_cast<Eigen::Index>(ws.active.size());

    ws.xw.resize(na, q);
    ws.sweta.resize(na);
    if (na == n) {
        ws.sw = ws.w.cwiseSqrt();
        ws.xw = ws.sw.asDiagonal() * x;
        ws.sweta = ws.sw.cwiseProduct(ws.eta);
    } else {
        for (Eigen::Index r = 0; r < na; ++r) {
            const int i = ws.active[static_cast<std::size_t>(r)];
            const Scalar s = std::sqrt(ws.w[i]);
            ws.xw.row(r) = s * x.row(i);
            ws.sweta[r] = s * ws.eta[i];
        }
    }

    ws.gram.resize(q, q);
    ws.gram.template triangularView<Eigen::Lower>() = MatX<Scalar>::Zero(q, q);
    ws.gram.template selfadjointView<Eigen::Lower>().rankUpdate(ws.xw.transpose());

    // X'Wz = X'W*eta + X'(y - mu)
    ws.rhs.noalias() = ws.xw.transpose() * ws.sweta;
    ws.rhs.noalias() += x.transpose() * (y - ws.mu);

    ws.ldlt.compute(ws.gram);
    const auto d = ws.ldlt.vectorD();
    const Scalar dmax = d.maxCoeff();
    if (ws.ldlt.info() != Eigen::Success || !(dmax > Scalar(0)) ||
        d.minCoeff() < Scalar(1e-10) * dmax)
        throw SingularDesign("weighted Gram matrix is rank deficient");
    ws.beta_new = ws.ldlt.solve(ws.rhs);
}

/// IRLS driver on an explicit design (first column = intercept).
/// `loglik_const` optionally carries the precomputed normalizing-constant
/// sum for fixed-dispersion families.
template <class Scalar>
FitResult<Scalar> irls(const Family<Scalar>& family, const VecX<Scalar>& y,
                       const Eigen::Ref<const MatX<Scalar>>& x,
                       const FitOptions<Scalar>& options, const VecX<Scalar>* eta0,
                       const Scalar* loglik_const, IrlsWorkspace<Scalar>& ws) {
    const Eigen::Index n = y.size();
    const Eigen::Index q = x.cols();
    if (q > n) throw std::invalid_argument("fit: more coefficients than observations");

    FitResult<Scalar> out;
    out.n_obs = static_cast<int>(n);
    out.df = static_cast<int>(q);

    ws.eta = (eta0 && eta0->size() == n) ? *eta0 : family.initial_eta(y);
    family.mean_variance(ws.eta, ws.mu, ws.w);
    Scalar dev = deviance(family, y, ws.mu);
    out.deviance_trace.clear();
    out.deviance_trace.push_back(dev);

    const bool one_step = family.kind() == FamilyKind::Gaussian;  // IRLS is exact OLS
    bool have_beta = false;

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        out.iterations = iter;
        weighted_step<Scalar>(x, y, ws);

        ws.eta_new.noalias() = x * ws.beta_new;
        family.mean_variance(ws.eta_new, ws.mu, ws.w);
        Scalar dev_new = deviance(family, y, ws.mu);

        // Step-halving toward the previous iterate when the deviance rises.
        const Scalar slack = Scalar(1e-12) * (Scalar(1) + dev);
        int halvings = 0;
        while (have_beta && dev_new > dev + slack && halvings < 10) {
            ws.beta_new = Scalar(0.5) * (ws.beta_new + ws.beta);
            ws.eta_new.noalias() = x * ws.beta_new;
            family.mean_variance(ws.eta_new, ws.mu, ws.w);
            dev_new = deviance(family, y, ws.mu);
            ++halvings;
        }
        if (have_beta && dev_new > dev + slack) {
            out.converged = false;  // divergence; keep the best iterate seen
            family.mean_variance(ws.eta, ws.mu, ws.w);
            break;
        }

        ws.beta = ws.beta_new;
        ws.eta.swap(ws.eta_new);
        have_beta = true;
        out.deviance_trace.push_back(dev_new);
        const Scalar rel = std::abs(dev - dev_new) / (std::abs(dev) + Scalar(0.1));
        dev = dev_new;
        if (one_step || rel < options.tol) {
            out.converged = true;
            break;
        }
    }

    out.deviance = dev;
    out.eta = ws.eta;
    out.beta0 = ws.beta[0];
    if (family.has_dispersion()) {
        const Scalar dof = Scalar(std::max<Eigen::Index>(n - q, 1));
        out.phi_hat = std::max(dev / dof, Scalar(1e-12));
        out.loglik = log_likelihood(family, y, out.eta, out.phi_hat);
    } else {
        out.phi_hat = Scalar(1);
        out.loglik = loglik_core(family, y, out.eta) +
                     (loglik_const ? *loglik_const : loglik_constant(family, y));
    }
    out.beta_main = ws.beta.segment(1, q - 1);  // split by alpha-aware callers
    return out;
}

}  // namespace detail

/// IRLS fit of the model given by an explicit design matrix (first column is
/// the intercept).  `eta0` optionally warm-starts the linear predictor.
template <class Scalar>
FitResult<Scalar> fit_design(const Family<Scalar>& family, const VecX<Scalar>& y,
                             const MatX<Scalar>& x, const FitOptions<Scalar>& options = {},
                             const VecX<Scalar>* eta0 = nullptr) {
    family.validate_response(y);
    detail::IrlsWorkspace<Scalar> ws;
    return detail::irls<Scalar>(family, y, x, options, eta0, nullptr, ws);
}

/// Repeated-fit engine over one dataset: reuses IRLS scratch, caches
/// interaction product columns, and hoists the log-likelihood normalizing
/// constant.  Single-threaded; create one per worker.
template <class Scalar = double>
class ModelFitter {
public:
    ModelFitter(const Family<Scalar>& family, const Dataset<Scalar>& data)
        : family_(family), data_(&data) {
        family_.validate_response(data.y());
        if (!family_.has_dispersion()) {
            cy_ = loglik_constant(family_, data.y());
            has_cy_ = true;
        }
    }
    // the dataset is held by reference and must outlive the fitter
    ModelFitter(const Family<Scalar>&, Dataset<Scalar>&&) = delete;

    const Family<Scalar>& family() const { return family_; }
    const Dataset<Scalar>& data() const { return *data_; }

    FitResult<Scalar> fit(const ModelAlpha& alpha, const FitOptions<Scalar>& options = {},
                          const VecX<Scalar>* eta0 = nullptr) {
        if (!check_strong_hierarchy(alpha))
            throw std::invalid_argument("fit: model violates strong hierarchy");
        const int n = data_->n();
        const int q = 1 + alpha.size();
        if (design_.rows() != n || design_.cols() < q)
            design_.resize(n, std::max<int>(q, std::max<int>(8, 2 * int(design_.cols()))));
        design_.col(0).setOnes();
        int c = 1;
        for (int j : alpha.mains()) design_.col(c++) = data_->main_col(j);
        for (const auto& [j, k] : alpha.interactions()) design_.col(c++) = product(j, k);

        FitResult<Scalar> out = detail::irls<Scalar>(family_, data_->y(), design_.leftCols(q),
                                                     options, eta0, has_cy_ ? &cy_ : nullptr, ws_);
        out.alpha = alpha;
        const int nm = static_cast<int>(alpha.mains().size());
        const int ni = static_cast<int>(alpha.interactions().size());
        VecX<Scalar> coefs = std::move(out.beta_main);
        out.beta_main = coefs.head(nm);
        out.beta_inter = coefs.tail(ni);
        return out;
    }

private:
    const VecX<Scalar>& product(int j, int k) {
        const std::uint64_t key =
            (std::uint64_t(std::uint32_t(j)) << 32) | std::uint64_t(std::uint32_t(k));
        auto it = products_.find(key);
        if (it == products_.end())
            it = products_.emplace(key, data_->column(j, k)).first;
        return it->second;
    }

    Family<Scalar> family_;
    const Dataset<Scalar>* data_;
    Scalar cy_ = 0;
    bool has_cy_ = false;
    std::unordered_map<std::uint64_t, VecX<Scalar>> products_;
    MatX<Scalar> design_;
    detail::IrlsWorkspace<Scalar> ws_;
};

/// MLE under a strong-hierarchy-feasible model.  The intercept is always
/// included.  Warm-startable via `eta0`.
template <class Scalar>
FitResult<Scalar> fit_mle(const Family<Scalar>& family, const Dataset<Scalar>& data,
                          const ModelAlpha& alpha, const FitOptions<Scalar>& options = {},
                          const VecX<Scalar>* eta0 = nullptr) {
    ModelFitter<Scalar> fitter(family, data);
    return fitter.fit(alpha, options, eta0);
}

}  // namespace shl0
