#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace shl0 {

template <class Scalar>
using VecX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class FamilyKind { Gaussian, Binomial, Poisson };

/// Exponential family with canonical link.  The cumulant b(.) and its first
/// two derivatives fix the mean and variance functions:
///   gaussian  b(t) = t^2/2,            identity link
///   poisson   b(t) = exp(t),           log link
///   binomial  b(t) = m*log(1+exp(t)),  logit link on pi = mu/m
/// The dispersion phi is free only for the gaussian family.
template <class Scalar = double>
class Family {
public:
    /// |eta| is clamped at this value inside weight/mean evaluations used by
    /// the fitting loop, so exp() cannot overflow for binomial/poisson.
    static constexpr Scalar eta_clamp = Scalar(30);

    static Family gaussian() { return Family(FamilyKind::Gaussian, {}); }
    static Family poisson() { return Family(FamilyKind::Poisson, {}); }
    static Family binomial(VecX<Scalar> trials) {
        if ((trials.array() <= Scalar(0)).any())
            throw std::domain_error("binomial trial counts must be positive");
        return Family(FamilyKind::Binomial, std::move(trials));
    }
    /// Bernoulli shorthand: one trial per observation.
    static Family binomial(Eigen::Index n) { return binomial(VecX<Scalar>::Ones(n)); }

    FamilyKind kind() const { return kind_; }
    bool has_dispersion() const { return kind_ == FamilyKind::Gaussian; }
    const VecX<Scalar>& trials() const { return trials_; }

    const char* name() const {
        switch (kind_) {
            case FamilyKind::Gaussian: return "gaussian";
            case FamilyKind::Binomial: return "binomial";
            case FamilyKind::Poisson: return "poisson";
        }
        return "?";
    }

    /// mu = b'(eta).  `clamped` bounds |eta| first (used by the IRLS loop).
    VecX<Scalar> mean(const VecX<Scalar>& eta, bool clamped = false) const {
        switch (kind_) {
            case FamilyKind::Gaussian:
                return eta;
            case FamilyKind::Poisson:
                return clamp(eta, clamped).array().exp();
            case FamilyKind::Binomial: {
                VecX<Scalar> e = clamp(eta, clamped);
                return trials_.array() / (Scalar(1) + (-e.array()).exp());
            }
        }
        return {};
    }

    /// b''(eta) > 0: the variance function, also the canonical IRLS weight.
    VecX<Scalar> variance(const VecX<Scalar>& eta, bool clamped = true) const {
        switch (kind_) {
            case FamilyKind::Gaussian:
                return VecX<Scalar>::Ones(eta.size());
            case FamilyKind::Poisson:
                return clamp(eta, clamped).array().exp();
            case FamilyKind::Binomial: {
                VecX<Scalar> e = clamp(eta, clamped);
                VecX<Scalar> p = (Scalar(1) + (-e.array()).exp()).inverse();
                return trials_.array() * p.array() * (Scalar(1) - p.array());
            }
        }
        return {};
    }

    /// mu = b'(eta) and b''(eta) in one pass over clamped eta.
    void mean_variance(const VecX<Scalar>& eta, VecX<Scalar>& mu, VecX<Scalar>& var) const {
        switch (kind_) {
            case FamilyKind::Gaussian:
                mu = eta;
                var.setOnes(eta.size());
                break;
            case FamilyKind::Poisson:
                mu = clamp(eta, true).array().exp();
                var = mu;
                break;
            case FamilyKind::Binomial: {
                VecX<Scalar> sigma =
                    (Scalar(1) + (-clamp(eta, true).array()).exp()).inverse();
                mu = trials_.cwiseProduct(sigma);
                var = mu.array() * (Scalar(1) - sigma.array());
                break;
            }
        }
    }

    /// Starting linear predictor for maximum-likelihood iterations.
    VecX<Scalar> initial_eta(const VecX<Scalar>& y) const {
        switch (kind_) {
            case FamilyKind::Gaussian:
                return VecX<Scalar>::Zero(y.size());
            case FamilyKind::Poisson:
                return (y.array() + Scalar(0.1)).log();
            case FamilyKind::Binomial: {
                VecX<Scalar> p = (y.array() + Scalar(0.5)) / (trials_.array() + Scalar(1));
                return (p.array() / (Scalar(1) - p.array())).log();
            }
        }
        return {};
    }

    void validate_response(const VecX<Scalar>& y) const {
        if (!y.allFinite()) throw std::domain_error("response contains non-finite values");
        switch (kind_) {
            case FamilyKind::Gaussian:
                break;
            case FamilyKind::Poisson:
                if ((y.array() < Scalar(0)).any())
                    throw std::domain_error("poisson response must be nonnegative");
                break;
            case FamilyKind::Binomial:
                if (trials_.size() != y.size())
                    throw std::domain_error("binomial trials length does not match response");
                if ((y.array() < Scalar(0)).any() || (y.array() > trials_.array()).any())
                    throw std::domain_error("binomial response outside [0, trials]");
                break;
        }
    }

private:
    Family(FamilyKind kind, VecX<Scalar> trials) : kind_(kind), trials_(std::move(trials)) {}

    VecX<Scalar> clamp(const VecX<Scalar>& eta, bool on) const {
        if (!on || kind_ == FamilyKind::Gaussian) return eta;
        return eta.array().min(eta_clamp).max(-eta_clamp);
    }

    FamilyKind kind_;
    VecX<Scalar> trials_;
};

namespace detail {

template <class Scalar>
Scalar xlogy(Scalar x, Scalar y) {
    return x == Scalar(0) ? Scalar(0) : x * std::log(y);
}

/// log(1 + exp(t)) without overflow.
template <class Scalar>
Scalar log1pexp(Scalar t) {
    return t > Scalar(0) ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace detail

/// Sum over observations of y*eta - b(eta): the part of the log-likelihood
/// that varies with the linear predictor (dispersion factored out).
template <class Scalar>
Scalar loglik_core(const Family<Scalar>& family, const VecX<Scalar>& y,
                   const VecX<Scalar>& eta) {
    switch (family.kind()) {
        case FamilyKind::Gaussian:
            return y.dot(eta) - Scalar(0.5) * eta.squaredNorm();
        case FamilyKind::Poisson:
            return y.dot(eta) - eta.array().exp().sum();
        case FamilyKind::Binomial: {
            // branchless log(1+exp(t)) = max(t,0) + log1p(exp(-|t|))
            const auto& m = family.trials();
            auto t = eta.array();
            return y.dot(eta) -
                   (m.array() * (t.max(Scalar(0)) + (-t.abs()).exp().log1p())).sum();
        }
    }
    return 0;
}

/// Sum of the normalizing constants c(y_i); independent of the model for
/// the fixed-dispersion families, so callers can hoist it out of fitting
/// loops.  For the gaussian family it depends on phi and is not cacheable;
/// use log_likelihood directly there.
template <class Scalar>
Scalar loglik_constant(const Family<Scalar>& family, const VecX<Scalar>& y) {
    Scalar c = 0;
    switch (family.kind()) {
        case FamilyKind::Gaussian:
            throw std::logic_error("loglik_constant: gaussian constant depends on phi");
        case FamilyKind::Poisson:
            for (Eigen::Index i = 0; i < y.size(); ++i) c -= std::lgamma(y[i] + Scalar(1));
            break;
        case FamilyKind::Binomial: {
            const auto& m = family.trials();
            for (Eigen::Index i = 0; i < y.size(); ++i)
                c += std::lgamma(m[i] + Scalar(1)) - std::lgamma(y[i] + Scalar(1)) -
                     std::lgamma(m[i] - y[i] + Scalar(1));
            break;
        }
    }
    return c;
}

/// Full log-likelihood sum_i [y_i*eta_i - b(eta_i)]/phi + c(y_i, phi) under
/// the canonical link (theta = eta).  The normalizing constant c is included,
/// so values are comparable across models and directly usable in information
/// criteria.
template <class Scalar>
Scalar log_likelihood(const Family<Scalar>& family, const VecX<Scalar>& y,
                      const VecX<Scalar>& eta, Scalar phi) {
    if (!eta.allFinite() || !y.allFinite())
        throw std::domain_error("log_likelihood: non-finite eta or y");
    if (!(phi > Scalar(0))) throw std::domain_error("log_likelihood: phi must be positive");
    if (!family.has_dispersion() && phi != Scalar(1))
        throw std::domain_error("log_likelihood: phi is fixed at 1 for this family");
    if (family.kind() == FamilyKind::Gaussian) {
        const Eigen::Index n = y.size();
        return (loglik_core(family, y, eta) - Scalar(0.5) * y.squaredNorm()) / phi -
               Scalar(0.5) * Scalar(n) * std::log(Scalar(2) * Scalar(EIGEN_PI) * phi);
    }
    return loglik_core(family, y, eta) + loglik_constant(family, y);
}

/// Residual deviance G^2 = 2*phi*[l_saturated - l(model)] >= 0.  Equals the
/// residual sum of squares for the gaussian family; phi cancels throughout.
template <class Scalar>
Scalar deviance(const Family<Scalar>& family, const VecX<Scalar>& y, const VecX<Scalar>& mu,
                Scalar /*phi*/ = Scalar(1)) {
    const Eigen::Index n = y.size();
    Scalar dev = 0;
    switch (family.kind()) {
        case FamilyKind::Gaussian:
            dev = (y - mu).squaredNorm();
            break;
        case FamilyKind::Poisson:
            if ((mu.array() <= Scalar(0)).any())
                throw std::domain_error("deviance: poisson mean must be positive");
            for (Eigen::Index i = 0; i < n; ++i)
                dev += Scalar(2) * (detail::xlogy(y[i], y[i] / mu[i]) - (y[i] - mu[i]));
            break;
        case FamilyKind::Binomial: {
            const auto& m = family.trials();
            if ((mu.array() <= Scalar(0)).any() || (mu.array() >= m.array()).any())
                throw std::domain_error("deviance: binomial mean must lie in (0, trials)");
            for (Eigen::Index i = 0; i < n; ++i) {
                dev += Scalar(2) * (detail::xlogy(y[i], y[i] / mu[i]) +
                                    detail::xlogy(m[i] - y[i], (m[i] - y[i]) / (m[i] - mu[i])));
            }
            break;
        }
    }
    return dev < Scalar(0) ? Scalar(0) : dev;
}

}  // namespace shl0
