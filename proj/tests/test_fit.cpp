#include <doctest.h>

#include <cmath>

#include "shl0/fit.hpp"
#include "support.hpp"

using namespace shl0;
using testsupport::Mat;
using testsupport::Vec;

namespace {

Dataset<double> noisy_linear_data(int n, int p, std::uint64_t seed) {
    Mat x = testsupport::random_design(n, p, seed);
    Vec y = 2.0 * x.col(0) - 1.5 * x.col(1) + testsupport::random_normal(n, seed + 1);
    return Dataset<double>(std::move(y), std::move(x));
}

}  // namespace

TEST_CASE("gaussian IRLS equals the normal-equations solution") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const int n = 40, p = 5;
        Dataset<double> data = noisy_linear_data(n, p, seed);
        ModelAlpha alpha({1, 2, 3}, {{1, 2}});
        auto fit = fit_mle(Family<double>::gaussian(), data, alpha);
        REQUIRE(fit.converged);

        Mat x = design_matrix(data, alpha);
        Vec ols = (x.transpose() * x).ldlt().solve(x.transpose() * data.y());
        CHECK(std::abs(fit.beta0 - ols[0]) < 1e-8);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(fit.beta_main[i] - ols[i + 1]) < 1e-8);
        CHECK(std::abs(fit.beta_inter[0] - ols[4]) < 1e-8);
        CHECK(fit.deviance == doctest::Approx((data.y() - x * ols).squaredNorm()).epsilon(1e-10));
    }
}

TEST_CASE("exactly linear response gives the OLS coefficients and zero deviance") {
    const int n = 30;
    Mat x = testsupport::random_design(n, 3, 99);
    Vec y = (3.0 * x.col(0)).array() + 0.7;
    Dataset<double> data(y, x);
    auto fit = fit_mle(Family<double>::gaussian(), data, ModelAlpha({1}, {}));
    CHECK(fit.deviance < 1e-16);
    CHECK(fit.beta0 == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(fit.beta_main[0] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("binomial intercept-only MLE is the empirical logit") {
    const int n = 25;
    Vec m = Vec::Constant(n, 4.0);
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = double(i % 5 == 0 ? 3 : 1);
    auto fam = Family<double>::binomial(m);
    Mat x = testsupport::random_design(n, 2, 7);
    Dataset<double> data(y, x);
    auto fit = fit_mle(fam, data, ModelAlpha{});
    REQUIRE(fit.converged);
    const double frac = y.sum() / m.sum();
    CHECK(fit.beta0 == doctest::Approx(std::log(frac / (1.0 - frac))).epsilon(1e-7));
    CHECK(fit.df == 1);
}

TEST_CASE("poisson fit matches an independent Newton reference") {
    const int n = 20;
    Mat x = testsupport::random_design(n, 2, 31);
    std::mt19937_64 rng(123);
    Vec y(n);
    Vec eta_true = 0.3 + 0.8 * x.col(0).array();
    for (int i = 0; i < n; ++i) {
        std::poisson_distribution<int> pois(std::exp(eta_true[i]));
        y[i] = double(pois(rng));
    }
    Dataset<double> data(y, x);
    auto fit = fit_mle(Family<double>::poisson(), data, ModelAlpha({1}, {}),
                       FitOptions<double>{1e-12, 200});
    REQUIRE(fit.converged);

    Mat xd = design_matrix(data, ModelAlpha({1}, {}));
    auto ref = testsupport::newton_glm(Family<double>::poisson(), y, xd);
    REQUIRE(ref.converged);
    // same likelihood up to the c(y) constant included by the library
    double c = 0;
    for (int i = 0; i < n; ++i) c -= std::lgamma(y[i] + 1.0);
    CHECK(fit.loglik == doctest::Approx(ref.loglik + c).epsilon(1e-6));
    CHECK(std::abs(fit.beta0 - ref.beta[0]) < 1e-6);
    CHECK(std::abs(fit.beta_main[0] - ref.beta[1]) < 1e-6);
}

TEST_CASE("deviance decreases across accepted IRLS steps") {
    const int n = 60;
    Mat x = testsupport::random_design(n, 3, 55);
    Vec m = Vec::Constant(n, 6.0);
    std::mt19937_64 rng(55);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        const double pi = 1.0 / (1.0 + std::exp(-(1.2 * x(i, 0) - 0.5 * x(i, 1))));
        std::binomial_distribution<int> bin(6, pi);
        y[i] = double(bin(rng));
    }
    Dataset<double> data(y, x);
    auto fit = fit_mle(Family<double>::binomial(m), data, ModelAlpha({1, 2}, {{1, 2}}));
    REQUIRE(fit.converged);
    REQUIRE(fit.deviance_trace.size() >= 2);
    // trace[0] is the heuristic start; accepted steps begin at index 1
    for (std::size_t i = 2; i < fit.deviance_trace.size(); ++i)
        CHECK(fit.deviance_trace[i] <=
              fit.deviance_trace[i - 1] + 1e-9 * (1.0 + fit.deviance_trace[i - 1]));
}

TEST_CASE("score vanishes at the returned MLE") {
    const int n = 80;
    for (std::uint64_t seed = 3; seed <= 5; ++seed) {
        Mat x = testsupport::random_design(n, 4, seed);
        std::mt19937_64 rng(seed);
        Vec y(n);
        for (int i = 0; i < n; ++i) {
            const double mu = std::exp(0.2 + 0.6 * x(i, 0) - 0.4 * x(i, 2));
            std::poisson_distribution<int> pois(mu);
            y[i] = double(pois(rng));
        }
        Dataset<double> data(y, x);
        ModelAlpha alpha({1, 3}, {});
        auto fit = fit_mle(Family<double>::poisson(), data, alpha, FitOptions<double>{1e-12, 200});
        REQUIRE(fit.converged);
        Mat xd = design_matrix(data, alpha);
        Vec mu = Family<double>::poisson().mean(fit.eta);
        Vec score = xd.transpose() * (data.y() - mu) / fit.phi_hat;
        CHECK(score.lpNorm<Eigen::Infinity>() < 1e-6 * n);
    }
}

TEST_CASE("deviance differences equal twice the log-likelihood gap for nested fits") {
    const int n = 50;
    Dataset<double> data = noisy_linear_data(n, 4, 11);
    auto fam = Family<double>::gaussian();
    auto f1 = fit_mle(fam, data, ModelAlpha({1}, {}));
    auto f2 = fit_mle(fam, data, ModelAlpha({1, 2}, {{1, 2}}));
    const double phi = 1.7;  // any common dispersion
    const double l1 = log_likelihood(fam, data.y(), f1.eta, phi);
    const double l2 = log_likelihood(fam, data.y(), f2.eta, phi);
    CHECK(f1.deviance - f2.deviance == doctest::Approx(2.0 * phi * (l2 - l1)).epsilon(1e-8));
}

TEST_CASE("duplicated columns raise SingularDesign") {
    const int n = 30;
    Mat x = testsupport::random_design(n, 2, 17);
    x.col(1) = x.col(0);
    Vec y = testsupport::random_normal(n, 18);
    Dataset<double> data(y, x);
    CHECK_THROWS_AS(fit_mle(Family<double>::gaussian(), data, ModelAlpha({1, 2}, {})),
                    SingularDesign);
}

TEST_CASE("hierarchy violations and oversized models are rejected up front") {
    Dataset<double> data = noisy_linear_data(20, 3, 23);
    CHECK_THROWS_AS(fit_mle(Family<double>::gaussian(), data, ModelAlpha({1}, {{1, 2}})),
                    std::invalid_argument);
}

TEST_CASE("iteration cap returns an unconverged result instead of throwing") {
    const int n = 50;
    Mat x = testsupport::random_design(n, 2, 41);
    Vec m = Vec::Constant(n, 8.0);
    std::mt19937_64 rng(41);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        const double pi = 1.0 / (1.0 + std::exp(-2.0 * x(i, 0)));
        std::binomial_distribution<int> bin(8, pi);
        y[i] = double(bin(rng));
    }
    Dataset<double> data(y, x);
    auto fit = fit_mle(Family<double>::binomial(m), data, ModelAlpha({1, 2}, {}),
                       FitOptions<double>{1e-14, 1});
    CHECK_FALSE(fit.converged);
    CHECK(fit.iterations == 1);
    CHECK(fit.deviance > 0.0);
}

TEST_CASE("gaussian dispersion estimate is deviance over residual dof") {
    Dataset<double> data = noisy_linear_data(40, 3, 29);
    auto fit = fit_mle(Family<double>::gaussian(), data, ModelAlpha({1, 2}, {}));
    CHECK(fit.phi_hat == doctest::Approx(fit.deviance / (40 - 3)).epsilon(1e-12));
    CHECK(fit.loglik ==
          doctest::Approx(log_likelihood(Family<double>::gaussian(), data.y(), fit.eta,
                                         fit.phi_hat))
              .epsilon(1e-12));
}
