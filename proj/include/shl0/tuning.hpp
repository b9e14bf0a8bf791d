#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "shl0/fit.hpp"

namespace shl0 {

/// Complexity weight for the generalized information criterion.
///   Bic    kappa = log n            (fixed-p regime)
///   Hbic4  kappa = max(log n, 4 log p)
///   Ebic   kappa = log p * log log n
///   Custom caller-provided positive value
struct KappaRule {
    enum class Kind { Bic, Hbic4, Ebic, Custom };
    Kind kind = Kind::Bic;
    double value = 0;  // Custom only

    static KappaRule bic() { return {Kind::Bic, 0}; }
    static KappaRule hbic4() { return {Kind::Hbic4, 0}; }
    static KappaRule ebic() { return {Kind::Ebic, 0}; }
    static KappaRule custom(double v) {
        if (!(v > 0)) throw std::domain_error("kappa: custom value must be positive");
        return {Kind::Custom, v};
    }

    std::string name() const {
        switch (kind) {
            case Kind::Bic: return "bic";
            case Kind::Hbic4: return "hbic4";
            case Kind::Ebic: return "ebic";
            case Kind::Custom: return "custom";
        }
        return "?";
    }

    /// Regime-based default: Ebic when p > n, Bic otherwise.
    static KappaRule auto_rule(int n, int p) { return p > n ? ebic() : bic(); }
};

inline double kappa(const KappaRule& rule, int n, int p) {
    if (n < 1 || p < 1) throw std::domain_error("kappa: n and p must be positive");
    switch (rule.kind) {
        case KappaRule::Kind::Bic:
            return std::log(double(n));
        case KappaRule::Kind::Hbic4:
            return std::max(std::log(double(n)), 4.0 * std::log(double(p)));
        case KappaRule::Kind::Ebic:
            if (n < 3) throw std::domain_error("kappa: ebic needs n >= 3");
            return std::log(double(p)) * std::log(std::log(double(n)));
        case KappaRule::Kind::Custom:
            return rule.value;
    }
    return 0;
}

/// The tuning parameter has the closed form lambda = kappa / n.
inline double lambda_closed_form(double kappa_value, int n) {
    if (n < 1) throw std::domain_error("lambda_closed_form: n must be positive");
    return kappa_value / double(n);
}

/// GIC = -2*loglik + kappa*df with df counting every nonzero coefficient,
/// intercept included.  The intercept shifts all values by the constant
/// kappa and never changes a comparison.
template <class Scalar>
Scalar gic(const FitResult<Scalar>& fit, Scalar kappa_value) {
    return Scalar(-2) * fit.loglik + kappa_value * Scalar(fit.df);
}

}  // namespace shl0
