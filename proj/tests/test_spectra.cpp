#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles/quantile_oracle.hpp"
#include "sensorprep/error.hpp"
#include "sensorprep/spectra.hpp"
#include "support.hpp"

using namespace sensorprep;

namespace {

Matrix random_correlation(std::mt19937_64& rng, std::size_t n) {
    const auto d = testing_support::random_dataset(rng, n + 5 + rng() % 50, n);
    return correlation_matrix(standardize(d).values);
}

double residual(const Matrix& c, const EigenDecomposition& e, std::size_t i) {
    double worst = 0.0;
    for (std::size_t r = 0; r < c.rows(); ++r) {
        double cp = 0.0;
        for (std::size_t k = 0; k < c.cols(); ++k) cp += c(r, k) * e.vectors(k, i);
        worst = std::max(worst, std::abs(cp - e.values[i] * e.vectors(r, i)));
    }
    return worst;
}

} // namespace

TEST(Oracle, QuantileOracleMatchesReferenceValues) {
    EXPECT_NEAR(oracle::normal_upper_quantile(0.05), 1.6448536269514729, 1e-9);
    EXPECT_NEAR(oracle::f_upper_quantile(2, 10, 0.05), 4.1028210151304005, 1e-6);
    EXPECT_NEAR(oracle::f_upper_quantile(1, 100, 0.05), 3.9361429863126487, 1e-6);
}

TEST(Quantiles, AgreeWithIntegrationOracle) {
    EXPECT_NEAR(normal_quantile(0.05), oracle::normal_upper_quantile(0.05), 1e-8);
    EXPECT_NEAR(normal_quantile(0.05), 1.644854, 1e-5);
    EXPECT_NEAR(f_quantile(2, 10, 0.05), oracle::f_upper_quantile(2, 10, 0.05), 1e-6);
    EXPECT_NEAR(f_quantile(2, 10, 0.05), 4.10282, 1e-3);
    for (const double a : {0.01, 0.1, 0.3}) {
        EXPECT_NEAR(normal_quantile(a), oracle::normal_upper_quantile(a), 1e-8);
        EXPECT_NEAR(f_quantile(3, 40, a), oracle::f_upper_quantile(3, 40, a), 1e-6);
    }
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
}

TEST(Quantiles, RejectBadLevels) {
    for (const double a : {0.0, 1.0, -0.1, std::nan("")}) {
        EXPECT_THROW(normal_quantile(a), Error);
        EXPECT_THROW(f_quantile(2, 10, a), Error);
    }
    EXPECT_THROW(f_quantile(0.5, 10, 0.05), Error);
}

TEST(Eigen, DiagonalInput) {
    const auto e = symmetric_eigen(Matrix{{1, 0, 0}, {0, 3, 0}, {0, 0, 2}});
    EXPECT_EQ(e.values, (std::vector<double>{3, 2, 1}));
    EXPECT_EQ(e.vectors(1, 0), 1.0);
}

TEST(Eigen, TwoByTwo) {
    const auto e = symmetric_eigen(Matrix{{1, 0.5}, {0.5, 1}});
    EXPECT_NEAR(e.values[0], 1.5, 1e-14);
    EXPECT_NEAR(e.values[1], 0.5, 1e-14);
    EXPECT_NEAR(e.vectors(0, 0), std::sqrt(0.5), 1e-14);
    EXPECT_NEAR(e.vectors(1, 0), std::sqrt(0.5), 1e-14);
}

TEST(Eigen, ResidualTraceOrthonormality) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + rng() % 20;
        const auto c = random_correlation(rng, n);
        const auto e = symmetric_eigen(c);
        double trace = 0.0;
        for (std::size_t i = 0; i < n; ++i) trace += c(i, i);
        EXPECT_NEAR(std::accumulate(e.values.begin(), e.values.end(), 0.0), trace, 1e-9);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_LT(residual(c, e, i), 1e-8);
            if (i > 0) EXPECT_GE(e.values[i - 1], e.values[i]);
        }
        const auto gram = e.vectors.transpose() * e.vectors;
        EXPECT_LT(max_abs_diff(gram, Matrix::identity(n)), 1e-10);
    }
}

TEST(Eigen, SignConventionIsStable) {
    std::mt19937_64 rng(2);
    const auto c = random_correlation(rng, 6);
    const auto e = symmetric_eigen(c);
    for (std::size_t i = 0; i < 6; ++i) {
        std::size_t big = 0;
        for (std::size_t r = 1; r < 6; ++r)
            if (std::abs(e.vectors(r, i)) > std::abs(e.vectors(big, i))) big = r;
        EXPECT_GT(e.vectors(big, i), 0.0);
    }
}

TEST(Eigen, RejectsAsymmetric) { EXPECT_THROW(symmetric_eigen(Matrix{{1, 2}, {0, 1}}), Error); }

TEST(SelectK, Examples) {
    EXPECT_EQ(select_k(std::vector<double>{3, 0, 0}, 0.85), 1u);
    EXPECT_EQ(select_k(std::vector<double>{1, 1, 1, 1}, 0.75), 3u);
    EXPECT_EQ(select_k(std::vector<double>{2.5, 0.4, 0.1}, 0.85), 2u);
    EXPECT_EQ(select_k(std::vector<double>{2.5, 0.4, 0.1}, 1.0), 3u);
    EXPECT_THROW(select_k(std::vector<double>{0, 0}, 0.85), Error);
}

TEST(Limits, QThresholdClosedForm) {
    // theta = [2, 2, 2], h0 = 1 - 2*2*2/(3*4) = 1/3.
    const std::vector<double> eig{5, 1, 1};
    const double c = oracle::normal_upper_quantile(0.05);
    const double h0 = 1.0 / 3.0;
    const double expected = 2.0 * std::pow(std::abs(c * std::sqrt(2 * 2 * h0 * h0) / 2 + 2 * h0 * (h0 - 1) / 4 + 1),
                                           1.0 / h0);
    EXPECT_NEAR(q_threshold(eig, 1, 0.05), expected, 1e-9);
    EXPECT_NEAR(q_threshold(eig, 1, 0.05), 5.936869945730966, 1e-9);
}

TEST(Limits, QThresholdDegenerateTail) {
    const std::vector<double> eig{3, 0, 0};
    EXPECT_THROW(q_threshold(eig, 1, 0.05), Error);
}

TEST(Limits, T2Threshold) {
    EXPECT_NEAR(t2_threshold(1, 101, 0.05), oracle::f_upper_quantile(1, 100, 0.05), 1e-6);
    EXPECT_NEAR(t2_threshold(1, 101, 0.05), 3.936, 1e-3);
    EXPECT_THROW(t2_threshold(3, 3, 0.05), Error);
}

TEST(Limits, DecreaseWithAlpha) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng() % 10;
        const auto e = symmetric_eigen(random_correlation(rng, n));
        const std::size_t k = 1 + rng() % (n - 1);
        double lastq = INFINITY, lastt = INFINITY;
        for (const double a : {0.01, 0.05, 0.10}) {
            const double q = q_threshold(e.values, k, a);
            const double t = t2_threshold(k, 100, a);
            EXPECT_LT(q, lastq);
            EXPECT_LT(t, lastt);
            lastq = q;
            lastt = t;
        }
    }
}

TEST(Model, FullRankHasZeroResidual) {
    std::mt19937_64 rng(4);
    const auto d = testing_support::random_dataset(rng, 60, 5);
    const auto model = build_pca_model_with_k(d, 5);
    EXPECT_TRUE(std::isinf(model.q_limit));
    const std::vector<double> origin(5, 0.0);
    EXPECT_EQ(t2_statistic(origin, model), 0.0);
    std::normal_distribution<double> z;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(5);
        for (auto& v : x) v = 3 * z(rng);
        EXPECT_LT(q_statistic(x, model), 1e-12);
    }
}

TEST(Model, RetainedSubspaceAndResidual) {
    std::mt19937_64 rng(6);
    const auto d = testing_support::random_dataset(rng, 80, 4);
    const auto model = build_pca_model_with_k(d, 2);
    // A pure combination of retained components has no residual.
    std::vector<double> x(4);
    for (std::size_t r = 0; r < 4; ++r) x[r] = 1.5 * model.eigenvectors(r, 0) - 0.5 * model.eigenvectors(r, 1);
    EXPECT_LT(q_statistic(x, model), 1e-20);
    EXPECT_NEAR(t2_statistic(x, model), 2.25 / model.eigenvalues[0] + 0.25 / model.eigenvalues[1], 1e-12);
    // A discarded direction carries everything into Q.
    for (std::size_t r = 0; r < 4; ++r) x[r] = 2.0 * model.eigenvectors(r, 3);
    EXPECT_NEAR(q_statistic(x, model), 4.0, 1e-12);
    EXPECT_LT(t2_statistic(x, model), 1e-20);
}

TEST(Model, ContributionRatioChoosesK) {
    std::mt19937_64 rng(9);
    const auto d = testing_support::random_dataset(rng, 100, 6);
    const auto model = build_pca_model(d, 0.85, 0.05);
    EXPECT_EQ(model.k, select_k(model.eigenvalues, 0.85));
    EXPECT_EQ(model.training_rows, 100u);
    const auto limits = control_limits(model, 0.01);
    EXPECT_GT(limits.q_limit, model.q_limit);
    EXPECT_GT(limits.t2_limit, model.t2_limit);
}
