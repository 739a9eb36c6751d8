#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sensorprep/ingest.hpp"
#include "sensorprep/matrix.hpp"

namespace sensorprep {

struct EigenDecomposition {
    std::vector<double> values; // descending
    Matrix vectors;             // column i pairs with values[i]
};

struct JacobiOptions {
    double tolerance = 1e-12; // on the Frobenius norm of the off-diagonal part
    int max_sweeps = 100;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Eigenvalues come back sorted
/// descending; each eigenvector is signed so its largest-magnitude component
/// is positive.
EigenDecomposition symmetric_eigen(const Matrix& symmetric, const JacobiOptions& options = {});

/// Sample correlation X'X / (m - 1) of a standardized matrix.
Matrix correlation_matrix(const Matrix& standardized);

/// Eigenpairs of the correlation matrix of standardized data. Requires more
/// samples than nodes. Tiny negative eigenvalues are clamped to zero.
EigenDecomposition fit_pca(const Matrix& standardized);

inline constexpr double kDefaultContributionRatio = 0.85;

/// Smallest k whose leading eigenvalues carry at least `ratio` of the total.
std::size_t select_k(std::span<const double> eigenvalues, double ratio = kDefaultContributionRatio);

double normal_quantile(double alpha); // upper-alpha quantile
double f_quantile(double d1, double d2, double alpha); // upper-alpha quantile

/// Control limit of the squared prediction error. Degenerate error when every
/// discarded eigenvalue is zero.
double q_threshold(std::span<const double> eigenvalues, std::size_t k, double alpha);

/// k(m-1)/(m-k) * F(k, m-1) at upper level alpha.
double t2_threshold(std::size_t k, std::size_t m, double alpha);

struct PcaModel {
    Standardization standardization;
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    std::size_t k = 0;
    std::size_t training_rows = 0;
    double alpha = 0.05;
    double q_limit = 0.0;
    double t2_limit = 0.0;

    std::size_t nodes() const noexcept { return eigenvalues.size(); }
};

struct ControlLimits {
    double alpha;
    double q_limit;
    double t2_limit;
};

/// The Q limit is +infinity when no residual variance is left (k = n or a
/// zero tail), which disables the Q test.
ControlLimits control_limits(const PcaModel& model, double alpha);

/// Standardize, decompose, pick k by cumulative contribution and compute both
/// limits at `alpha`.
PcaModel build_pca_model(const SensorDataset& training, double ratio = kDefaultContributionRatio,
                         double alpha = 0.05);

/// Same, with k fixed by the caller.
PcaModel build_pca_model_with_k(const SensorDataset& training, std::size_t k, double alpha = 0.05);

/// Squared norm of the residual after projecting onto the first k components.
double q_statistic(std::span<const double> standardized_row, const PcaModel& model);

/// Sum over retained components of score^2 / eigenvalue.
double t2_statistic(std::span<const double> standardized_row, const PcaModel& model);

} // namespace sensorprep
