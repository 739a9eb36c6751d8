#include "sensorprep/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "sensorprep/error.hpp"

namespace sensorprep {

namespace {

constexpr double kClampTolerance = 1e-9;

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) sum += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(sum);
}

void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double vkp = v(k, p);
        const double vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
    }
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("test level {} outside (0, 1)", alpha));
    }
}

} // namespace

EigenDecomposition symmetric_eigen(const Matrix& symmetric, const JacobiOptions& options) {
    const std::size_t n = symmetric.rows();
    if (symmetric.cols() != n) throw Error(ErrorCode::DimensionMismatch, "symmetric_eigen: matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(symmetric(i, j) - symmetric(j, i)) > 1e-12 * (1.0 + std::abs(symmetric(i, j))))
                throw Error(ErrorCode::InvalidArgument, "symmetric_eigen: matrix not symmetric");

    Matrix a = symmetric;
    Matrix v = Matrix::identity(n);
    bool converged = off_diagonal_norm(a) < options.tolerance;
    for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
        converged = off_diagonal_norm(a) < options.tolerance;
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence,
                    fmt::format("Jacobi eigensolver did not converge in {} sweeps", options.max_sweeps));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::ranges::stable_sort(order, [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = order[i];
        out.values[i] = a(src, src);
        std::size_t lead = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(v(k, src)) > std::abs(v(lead, src))) lead = k;
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, i) = sign * v(k, src);
    }
    return out;
}

Matrix correlation_matrix(const Matrix& x) {
    const std::size_t m = x.rows();
    const std::size_t n = x.cols();
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "correlation_matrix: need at least 2 rows");
    Matrix c(n, n);
    for (std::size_t r = 0; r < m; ++r) {
        const auto row = x.row(r);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) c(i, j) += row[i] * row[j];
    }
    const double scale = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            c(i, j) *= scale;
            c(j, i) = c(i, j);
        }
    }
    return c;
}

EigenDecomposition fit_pca(const Matrix& standardized) {
    if (standardized.rows() <= standardized.cols()) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("PCA needs more samples than nodes, got {} samples for {} nodes",
                                standardized.rows(), standardized.cols()));
    }
    auto eig = symmetric_eigen(correlation_matrix(standardized));
    for (auto& lambda : eig.values) {
        if (lambda < 0.0) {
            if (lambda <= -kClampTolerance) {
                throw Error(ErrorCode::NoConvergence,
                            fmt::format("correlation matrix has negative eigenvalue {}", lambda));
            }
            lambda = 0.0;
        }
    }
    return eig;
}

std::size_t select_k(std::span<const double> eigenvalues, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("contribution ratio {} outside (0, 1]", ratio));
    }
    double total = 0.0;
    for (const double l : eigenvalues) {
        if (l < 0.0) throw Error(ErrorCode::InvalidArgument, "select_k: negative eigenvalue");
        total += l;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::Degenerate, "select_k: all eigenvalues are zero");
    double cumulative = 0.0;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        cumulative += eigenvalues[k];
        // Relative slack so exact fractions such as 3/4 meet a 0.75 target.
        if (cumulative / total >= ratio - 1e-12) return k + 1;
    }
    return eigenvalues.size();
}

double normal_quantile(double alpha) {
    check_alpha(alpha);
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), alpha));
}

double f_quantile(double d1, double d2, double alpha) {
    check_alpha(alpha);
    if (!(d1 >= 1.0) || !(d2 >= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("F degrees of freedom ({}, {}) below 1", d1, d2));
    }
    return boost::math::quantile(boost::math::complement(boost::math::fisher_f_distribution<double>(d1, d2), alpha));
}

double q_threshold(std::span<const double> eigenvalues, std::size_t k, double alpha) {
    check_alpha(alpha);
    double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
    for (std::size_t j = k; j < eigenvalues.size(); ++j) {
        const double l = eigenvalues[j];
        theta1 += l;
        theta2 += l * l;
        theta3 += l * l * l;
    }
    if (theta1 == 0.0) throw Error(ErrorCode::Degenerate, "Q limit undefined: every discarded eigenvalue is zero");
    const double h0 = 1.0 - 2.0 * theta1 * theta3 / (3.0 * theta2 * theta2);
    if (h0 == 0.0) throw Error(ErrorCode::Degenerate, "Q limit undefined: h0 is zero");
    const double c_alpha = normal_quantile(alpha);
    // Absolute value bars, not parentheses: keeps the limit defined when the
    // bracket goes negative.
    const double bracket = c_alpha * std::sqrt(2.0 * theta2 * h0 * h0) / theta1 +
                           theta2 * h0 * (h0 - 1.0) / (theta1 * theta1) + 1.0;
    return theta1 * std::pow(std::abs(bracket), 1.0 / h0);
}

double t2_threshold(std::size_t k, std::size_t m, double alpha) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "T2 limit needs k >= 1");
    if (m <= k) throw Error(ErrorCode::InvalidArgument, fmt::format("T2 limit needs m > k, got m={} k={}", m, k));
    const double kd = static_cast<double>(k);
    const double md = static_cast<double>(m);
    return kd * (md - 1.0) / (md - kd) * f_quantile(kd, md - 1.0, alpha);
}

ControlLimits control_limits(const PcaModel& model, double alpha) {
    double theta1 = 0.0;
    for (std::size_t j = model.k; j < model.eigenvalues.size(); ++j) theta1 += model.eigenvalues[j];
    // With no residual variance left the Q test can never fire.
    const double q = theta1 == 0.0 ? std::numeric_limits<double>::infinity()
                                   : q_threshold(model.eigenvalues, model.k, alpha);
    return {alpha, q, t2_threshold(model.k, model.training_rows, alpha)};
}

namespace {

PcaModel assemble(StandardizedData standardized, EigenDecomposition eig, std::size_t k, std::size_t rows,
                  double alpha) {
    if (k < 1 || k > eig.values.size()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("k={} outside 1..{}", k, eig.values.size()));
    }
    PcaModel model;
    model.standardization = std::move(standardized.standardization);
    model.eigenvalues = std::move(eig.values);
    model.eigenvectors = std::move(eig.vectors);
    model.k = k;
    model.training_rows = rows;
    model.alpha = alpha;
    const auto limits = control_limits(model, alpha);
    model.q_limit = limits.q_limit;
    model.t2_limit = limits.t2_limit;
    return model;
}

} // namespace

PcaModel build_pca_model_with_k(const SensorDataset& training, std::size_t k, double alpha) {
    auto standardized = standardize(training);
    auto eig = fit_pca(standardized.values);
    return assemble(std::move(standardized), std::move(eig), k, training.rows(), alpha);
}

PcaModel build_pca_model(const SensorDataset& training, double ratio, double alpha) {
    auto standardized = standardize(training);
    auto eig = fit_pca(standardized.values);
    const auto k = select_k(eig.values, ratio);
    return assemble(std::move(standardized), std::move(eig), k, training.rows(), alpha);
}

namespace {

void check_row(std::span<const double> x, const PcaModel& model) {
    if (x.size() != model.nodes() || model.eigenvectors.rows() != model.nodes()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("row has {} values, model covers {} nodes", x.size(), model.nodes()));
    }
    if (model.k < 1 || model.k > model.nodes()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("model k={} outside 1..{}", model.k, model.nodes()));
    }
}

double score(std::span<const double> x, const Matrix& vectors, std::size_t component) {
    double t = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) t += x[j] * vectors(j, component);
    return t;
}

} // namespace

double q_statistic(std::span<const double> x, const PcaModel& model) {
    check_row(x, model);
    std::vector<double> residual(x.begin(), x.end());
    for (std::size_t i = 0; i < model.k; ++i) {
        const double t = score(x, model.eigenvectors, i);
        for (std::size_t j = 0; j < x.size(); ++j) residual[j] -= t * model.eigenvectors(j, i);
    }
    double q = 0.0;
    for (const double r : residual) q += r * r;
    return q;
}

double t2_statistic(std::span<const double> x, const PcaModel& model) {
    check_row(x, model);
    double t2 = 0.0;
    for (std::size_t i = 0; i < model.k; ++i) {
        const double lambda = model.eigenvalues[i];
        if (!(lambda > 0.0)) {
            throw Error(ErrorCode::Degenerate, fmt::format("retained eigenvalue {} is not positive", i + 1));
        }
        const double t = score(x, model.eigenvectors, i);
        t2 += t * t / lambda;
    }
    return t2;
}

} // namespace sensorprep
