#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sensorprep/matrix.hpp"

namespace sensorprep {

/// m samples x n nodes of finite readings taken at a uniform interval.
/// Construction validates every invariant, so any instance is usable as is.
class SensorDataset {
public:
    SensorDataset(Matrix values, std::vector<std::string> node_ids,
                  std::optional<std::vector<std::int64_t>> timestamps = std::nullopt);

    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }
    const std::optional<std::vector<std::int64_t>>& timestamps() const noexcept {
        return timestamps_;
    }

    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t nodes() const noexcept { return values_.cols(); }
    std::span<const double> row(std::size_t r) const noexcept { return values_.row(r); }
    std::vector<double> column(std::size_t c) const { return values_.column(c); }

    /// Rows [begin, end). The result must still hold at least two rows.
    SensorDataset slice_rows(std::size_t begin, std::size_t end) const;

    friend bool operator==(const SensorDataset&, const SensorDataset&) = default;

private:
    Matrix values_;
    std::vector<std::string> node_ids_;
    std::optional<std::vector<std::int64_t>> timestamps_;
};

SensorDataset load_csv(const std::filesystem::path& path);
SensorDataset parse_csv(std::istream& in, std::string_view source = "<stream>");
void write_csv(std::ostream& out, const SensorDataset& data);
void save_csv(const std::filesystem::path& path, const SensorDataset& data);

/// Throws SchemaMismatch naming the first differing node id.
void require_same_nodes(std::span<const std::string> expected, std::span<const std::string> actual);

// ---------------------------------------------------------------------------
// Standardization

struct Standardization {
    std::vector<double> means;
    std::vector<double> variances; // sample variances, 1/(m-1) divisor

    std::size_t size() const noexcept { return means.size(); }
};

struct StandardizedData {
    Matrix values;
    Standardization standardization;
};

/// Centres each column on its mean and scales it to unit sample variance.
/// A constant column is an error naming the node; it is never patched.
StandardizedData standardize(const SensorDataset& data);

/// Standardizes one sample with previously fitted (training) parameters.
std::vector<double> apply_standardization(std::span<const double> row,
                                          const Standardization& standardization);

// ---------------------------------------------------------------------------
// Discretization

/// States are 1-based: every value maps to exactly one of 1..K.
using State = int;

class DiscretizationScheme {
public:
    DiscretizationScheme(std::vector<std::vector<double>> edges, int state_count);

    int state_count() const noexcept { return state_count_; }
    std::size_t nodes() const noexcept { return edges_.size(); }
    const std::vector<double>& edges(std::size_t node) const { return edges_.at(node); }
    const std::vector<std::vector<double>>& all_edges() const noexcept { return edges_; }

    /// Half-open bins: a value equal to an edge belongs to the upper bin, and
    /// out-of-range values clamp to the first or last state.
    State state_of(std::size_t node, double value) const;

    friend bool operator==(const DiscretizationScheme&, const DiscretizationScheme&) = default;

private:
    std::vector<std::vector<double>> edges_;
    int state_count_;
};

/// m x n matrix of states in 1..K.
class StateMatrix {
public:
    StateMatrix(std::size_t rows, std::size_t cols, int state_count, std::vector<State> states);
    static StateMatrix from_columns(const std::vector<std::vector<State>>& columns, int state_count);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    int state_count() const noexcept { return state_count_; }

    State operator()(std::size_t r, std::size_t c) const noexcept { return states_[r * cols_ + c]; }
    std::span<const State> row(std::size_t r) const noexcept {
        return {states_.data() + r * cols_, cols_};
    }
    std::vector<State> column(std::size_t c) const;

    /// Rows [begin, end).
    StateMatrix slice_rows(std::size_t begin, std::size_t end) const;

    friend bool operator==(const StateMatrix&, const StateMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    int state_count_;
    std::vector<State> states_;
};

inline constexpr int kDefaultStateCount = 3;

/// Equal-width bins over each training column's [min, max].
DiscretizationScheme fit_discretization(const SensorDataset& data, int state_count = kDefaultStateCount);

StateMatrix discretize(const SensorDataset& data, const DiscretizationScheme& scheme);
std::vector<State> discretize_row(std::span<const double> row, const DiscretizationScheme& scheme);

// ---------------------------------------------------------------------------
// Error injection

/// For every selected row i and node j: x'(i,j) = x(i,j) + training_means[j] * fraction.
/// Unselected rows are copied unchanged.
SensorDataset inject_errors(const SensorDataset& data, std::span<const std::size_t> rows,
                            double fraction, std::span<const double> training_means);

/// Indices of the last `count` rows of a dataset with `rows` rows.
std::vector<std::size_t> last_rows(std::size_t rows, std::size_t count);

} // namespace sensorprep
