#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gevcast/error.hpp"
#include "gevcast/gev.hpp"
#include "gevcast/random.hpp"

using namespace gevcast;

namespace {

struct DensityCase {
    double mu, sigma, xi, x, pdf, cdf;
};

// 40-digit mpmath evaluations of the closed forms.
const DensityCase kDensityCases[] = {
    {0.0, 1.0, 0, 0.5, 0.33070429889041806774, 0.54523921189260505542},
    {0.0, 1.0, 0, -1.3, 0.093546497426604347193, 0.0254943946757241274},
    {10.0, 2.0, 0.2, 12.5, 0.094449640768553365759, 0.72059357275812809907},
    {10.0, 2.0, 0.2, 30, 0.00068305434129157011629, 0.99589322960310914701},
    {10.0, 2.0, -0.3, 14, 0.056229458239443440357, 0.95393895010458057652},
    {-3.0, 0.5, 0.45, -3.2, 0.80118472599779322488, 0.21134488694600940286},
    {5.0, 3.0, -0.1, 1, 0.031173532685166045565, 0.030317145952970939149},
    {1.0, 1.0, 1e-09, 2, 0.25464637986941972193, 0.69220062742802316391},
};

struct QuantileCase {
    double mu, sigma, xi, p, q;
};

const QuantileCase kQuantileCases[] = {
    {0, 1, 0, 0.999, 6.9072550705237156113},
    {10, 2, 0.2, 0.999, 39.806734523081298951},
    {10, 2, -0.3, 0.5, 10.694163629688140531},
    {-3, 0.5, 0.45, 1e-06, -3.7702382954447454366},
    {5, 3, -0.1, 0.999999, 27.464340328666458558},
};

std::vector<double> draw(const GevParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = quantile(p, rng.uniform_open());
    return out;
}

}  // namespace

TEST(GevParams, RejectsInvalid) {
    EXPECT_THROW(GevParams(0, 0, 0), ArgumentError);
    EXPECT_THROW(GevParams(0, -1, 0), ArgumentError);
    EXPECT_THROW(GevParams(std::nan(""), 1, 0), ArgumentError);
    EXPECT_THROW(GevParams(0, 1, std::numeric_limits<double>::infinity()), ArgumentError);
    EXPECT_NO_THROW(GevParams(0, 1e-12, -0.9));
}

TEST(GevDensity, MatchesHighPrecisionValues) {
    for (const auto& c : kDensityCases) {
        const GevParams p(c.mu, c.sigma, c.xi);
        // Below |xi| = 1e-8 the Gumbel branch is used; its error is O(xi).
        const double tol = std::abs(c.xi) < 1e-8 ? 1e-9 : 1e-12;
        EXPECT_NEAR(pdf(p, c.x), c.pdf, tol * std::max(1.0, c.pdf)) << c.mu << " " << c.sigma << " " << c.xi;
        EXPECT_NEAR(cdf(p, c.x), c.cdf, tol) << c.mu << " " << c.sigma << " " << c.xi;
    }
}

TEST(GevDensity, GumbelExample) {
    const GevParams p(0, 1, 0);
    EXPECT_NEAR(cdf(p, 0.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(pdf(p, 0.0), std::exp(-1.0), 1e-15);
}

TEST(GevDensity, OutsideSupport) {
    const GevParams frechet(0, 1, 0.5);  // lower endpoint -2
    EXPECT_EQ(pdf(frechet, -2.5), 0.0);
    EXPECT_EQ(cdf(frechet, -2.5), 0.0);
    const GevParams weibull(0, 1, -0.5);  // upper endpoint 2
    EXPECT_EQ(pdf(weibull, 2.5), 0.0);
    EXPECT_EQ(cdf(weibull, 2.5), 1.0);
    EXPECT_FALSE(weibull.in_support(2.5));
    EXPECT_TRUE(weibull.in_support(1.9));
}

TEST(GevDensity, ContinuousAcrossGumbelThreshold) {
    for (double x : {-2.0, -0.3, 0.0, 1.5, 4.0}) {
        const double at_zero = cdf(GevParams(0, 1, 0), x);
        EXPECT_NEAR(cdf(GevParams(0, 1, 2e-8), x), at_zero, 1e-7);
        EXPECT_NEAR(cdf(GevParams(0, 1, -2e-8), x), at_zero, 1e-7);
        EXPECT_NEAR(pdf(GevParams(0, 1, 2e-8), x), pdf(GevParams(0, 1, 0), x), 1e-7);
    }
}

TEST(GevQuantile, MatchesHighPrecisionValues) {
    for (const auto& c : kQuantileCases) {
        const GevParams p(c.mu, c.sigma, c.xi);
        EXPECT_NEAR(quantile(p, c.p), c.q, 1e-10 * std::max(1.0, std::abs(c.q)));
    }
}

TEST(GevQuantile, RoundTrip) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 2000; ++i) {
        const GevParams p(20 * u(gen) - 10, 0.1 + 5 * u(gen), 0.8 * u(gen) - 0.4);
        const double prob = 1e-6 + (1 - 2e-6) * u(gen);
        EXPECT_NEAR(cdf(p, quantile(p, prob)), prob, 1e-10);
    }
}

TEST(GevQuantile, DomainErrorsNameBranch) {
    EXPECT_THROW(quantile(GevParams(0, 1, 0), 0.0), DomainError);
    EXPECT_THROW(quantile(GevParams(0, 1, 0), 1.0), DomainError);
    EXPECT_THROW(quantile(GevParams(0, 1, 0.2), 1.0), DomainError);
    EXPECT_THROW(quantile(GevParams(0, 1, -0.2), 0.0), DomainError);
    EXPECT_THROW(quantile(GevParams(0, 1, 0.2), 1.5), DomainError);
    EXPECT_THROW(quantile(GevParams(0, 1, 0.2), std::nan("")), DomainError);
    // Finite endpoints are attainable.
    EXPECT_NEAR(quantile(GevParams(0, 1, 0.5), 0.0), -2.0, 1e-14);
    EXPECT_NEAR(quantile(GevParams(0, 1, -0.5), 1.0), 2.0, 1e-14);
    try {
        quantile(GevParams(0, 1, 0), 1.0);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("xi = 0"), std::string::npos) << e.what();
    }
}

TEST(GevDensity, IntegratesToOne) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 20; ++i) {
        const GevParams p(4 * u(gen) - 2, 0.5 + 2 * u(gen), 0.8 * u(gen) - 0.4);
        // Simpson's rule between the 1e-9 and 1 - 1e-9 quantiles.
        const double a = quantile(p, 1e-9), b = quantile(p, 1 - 1e-9);
        const int n = 200000;
        const double h = (b - a) / n;
        double s = pdf(p, a) + pdf(p, b);
        for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * pdf(p, a + k * h);
        EXPECT_NEAR(s * h / 3, 1.0 - 2e-9, 1e-5);
    }
}

TEST(GevLikelihood, SumOfLogDensities) {
    const GevParams p(1, 2, 0.1);
    const std::vector<double> x = {0.5, 1.2, 3.3, 7.0};
    double expected = 0;
    for (double v : x) expected += std::log(pdf(p, v));
    EXPECT_NEAR(log_likelihood(p, x), expected, 1e-12);
    const std::vector<double> outside = {0.0, -100.0};
    EXPECT_EQ(log_likelihood(p, outside), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(log_likelihood(p, std::vector<double>{}), ArgumentError);
}

TEST(GevLikelihood, AnalyticGradientMatchesFiniteDifferences) {
    const double xs[] = {-1.0, 0.2, 2.5, 8.0};
    const double shapes[] = {-0.3, -1e-9, 0.0, 3e-7, 0.25};
    for (double xi : shapes) {
        for (double x : xs) {
            const double mu = 0.4, ls = std::log(1.7);
            double g[3];
            const double f = detail::log_pdf_with_gradient(x, mu, ls, xi, g);
            if (!std::isfinite(f)) continue;
            EXPECT_NEAR(f, std::log(pdf(GevParams(mu, std::exp(ls), xi), x)), 1e-10);
            const double h = 1e-6;
            double gp[3], gm[3];
            const double d_mu = (detail::log_pdf_with_gradient(x, mu + h, ls, xi, gp) -
                                 detail::log_pdf_with_gradient(x, mu - h, ls, xi, gm)) / (2 * h);
            const double d_ls = (detail::log_pdf_with_gradient(x, mu, ls + h, xi, gp) -
                                 detail::log_pdf_with_gradient(x, mu, ls - h, xi, gm)) / (2 * h);
            EXPECT_NEAR(g[0], d_mu, 1e-6) << "xi=" << xi << " x=" << x;
            EXPECT_NEAR(g[1], d_ls, 1e-6) << "xi=" << xi << " x=" << x;
            if (std::abs(xi) > 1e-4) {
                const double d_xi = (detail::log_pdf_with_gradient(x, mu, ls, xi + h, gp) -
                                     detail::log_pdf_with_gradient(x, mu, ls, xi - h, gm)) / (2 * h);
                EXPECT_NEAR(g[2], d_xi, 1e-5) << "xi=" << xi << " x=" << x;
            } else {
                // Across the Gumbel switch compare with a wider step on the smooth side.
                const double d_xi = (detail::log_pdf_with_gradient(x, mu, ls, 1e-3, gp) -
                                     detail::log_pdf_with_gradient(x, mu, ls, -1e-3, gm)) / 2e-3;
                EXPECT_NEAR(g[2], d_xi, 1e-4) << "xi=" << xi << " x=" << x;
            }
        }
    }
}

TEST(GevFit, RecoversParameters) {
    const GevParams truth(10, 2, 0.2);
    const auto x = draw(truth, 5000, 42);
    const GevFitResult fit = fit_mle(x);
    EXPECT_TRUE(fit.converged);
    EXPECT_EQ(fit.n_obs, 5000u);
    EXPECT_NEAR(fit.params.mu(), 10, 0.1);
    EXPECT_NEAR(fit.params.sigma(), 2, 0.1);
    EXPECT_NEAR(fit.params.xi(), 0.2, 0.05);
    EXPECT_NEAR(fit.log_likelihood, log_likelihood(fit.params, x), 1e-9);
}

TEST(GevFit, StationaryPoint) {
    // At the optimum the likelihood cannot be improved by small moves.
    const auto x = draw(GevParams(-1, 0.7, -0.2), 400, 3);
    const GevFitResult fit = fit_mle(x);
    const auto& p = fit.params;
    for (int k = 0; k < 3; ++k) {
        for (double s : {-1e-3, 1e-3}) {
            const GevParams q(p.mu() + (k == 0 ? s : 0), p.sigma() * std::exp(k == 1 ? s : 0), p.xi() + (k == 2 ? s : 0));
            EXPECT_LE(log_likelihood(q, x), fit.log_likelihood + 1e-9);
        }
    }
}

TEST(GevFit, SmallSampleRecoveryOverSeeds) {
    // Mean estimates over 200 seeded fits at n = 100 lie near the truth.
    const GevParams truth(0, 1, 0.1);
    double mu = 0, sigma = 0, xi = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        const auto fit = fit_mle(draw(truth, 100, 1000 + r));
        mu += fit.params.mu() / reps;
        sigma += fit.params.sigma() / reps;
        xi += fit.params.xi() / reps;
    }
    EXPECT_NEAR(mu, 0, 0.05);
    EXPECT_NEAR(sigma, 1, 0.05);
    EXPECT_NEAR(xi, 0.1, 0.05);
}

TEST(GevFit, Errors) {
    EXPECT_THROW(fit_mle(std::vector<double>(9, 1.0)), ArgumentError);
    EXPECT_THROW(fit_mle(std::vector<double>(20, 3.0)), DegenerateDataError);
    std::vector<double> bad(20, 1.0);
    bad[3] = std::nan("");
    EXPECT_THROW(fit_mle(bad), ArgumentError);
}

TEST(GevFit, ShortTailedDataStayInsideShapeBox) {
    const std::vector<double> x = draw(GevParams(0, 1, -0.7), 2000, 8);
    const GevFitResult fit = fit_mle(x);
    EXPECT_LT(fit.params.xi(), -0.5);
    EXPECT_GE(fit.params.xi(), -0.9);
    EXPECT_TRUE(std::isfinite(fit.log_likelihood));
    EXPECT_GE(fit.log_likelihood, log_likelihood(GevParams(0, 1, -0.7), x));
}

TEST(GevFit, MomentInitializer) {
    const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const GevParams p = moment_initializer(x);
    const double sd = std::sqrt(55.0 / 6.0);  // sample sd (n - 1)
    EXPECT_NEAR(p.sigma(), std::sqrt(6.0) * sd / M_PI, 1e-12);
    EXPECT_NEAR(p.mu(), 5.5 - 0.5772 * p.sigma(), 1e-3);
    EXPECT_DOUBLE_EQ(p.xi(), 0.1);
}
