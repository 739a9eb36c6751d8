#include "sensorprep/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "sensorprep/error.hpp"
#include "sensorprep/serialize.hpp"

namespace sensorprep {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end && !text.empty();
}

} // namespace

SensorDataset::SensorDataset(Matrix values, std::vector<std::string> node_ids,
                             std::optional<std::vector<std::int64_t>> timestamps)
    : values_(std::move(values)), node_ids_(std::move(node_ids)), timestamps_(std::move(timestamps)) {
    if (values_.rows() < 2) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("dataset needs at least 2 samples, got {}", values_.rows()));
    }
    if (values_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "dataset needs at least 1 node");
    if (node_ids_.size() != values_.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} node ids for {} columns", node_ids_.size(), values_.cols()));
    }
    std::set<std::string_view> seen;
    for (const auto& id : node_ids_) {
        if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty node id");
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate node id '{}'", id));
        }
    }
    for (std::size_t r = 0; r < values_.rows(); ++r) {
        for (std::size_t c = 0; c < values_.cols(); ++c) {
            if (!std::isfinite(values_(r, c))) {
                throw Error(ErrorCode::InvalidArgument,
                            fmt::format("non-finite value at row {}, node '{}'", r + 1, node_ids_[c]));
            }
        }
    }
    if (timestamps_) {
        if (timestamps_->size() != values_.rows()) {
            throw Error(ErrorCode::DimensionMismatch, "timestamp count differs from sample count");
        }
        for (std::size_t r = 1; r < timestamps_->size(); ++r) {
            if ((*timestamps_)[r] <= (*timestamps_)[r - 1]) {
                throw Error(ErrorCode::InvalidArgument,
                            fmt::format("timestamps not strictly increasing at row {}", r + 1));
            }
        }
    }
}

SensorDataset SensorDataset::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows()) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("row range [{}, {}) outside 0..{}", begin, end, rows()));
    }
    Matrix values(end - begin, nodes());
    for (std::size_t r = begin; r < end; ++r) {
        std::ranges::copy(row(r), values.row(r - begin).begin());
    }
    std::optional<std::vector<std::int64_t>> ts;
    if (timestamps_) {
        ts.emplace(timestamps_->begin() + static_cast<std::ptrdiff_t>(begin),
                   timestamps_->begin() + static_cast<std::ptrdiff_t>(end));
    }
    return SensorDataset(std::move(values), node_ids_, std::move(ts));
}

SensorDataset parse_csv(std::istream& in, std::string_view source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::Parse, fmt::format("{}: missing header row", source));
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_fields(line);
    const bool has_time = !header.empty() && header.front() == "timestamp";
    const std::size_t first = has_time ? 1 : 0;
    if (header.size() <= first) {
        throw Error(ErrorCode::Parse, fmt::format("{}: header names no nodes", source));
    }
    std::vector<std::string> ids;
    for (std::size_t c = first; c < header.size(); ++c) {
        if (header[c].empty()) {
            throw Error(ErrorCode::Parse, fmt::format("{}: empty node id in header column {}", source, c + 1));
        }
        if (std::ranges::find(ids, header[c]) != ids.end()) {
            throw Error(ErrorCode::Parse, fmt::format("{}: duplicate node id '{}'", source, header[c]));
        }
        ids.emplace_back(header[c]);
    }

    const std::size_t n = ids.size();
    std::vector<double> cells;
    std::vector<std::int64_t> stamps;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::Parse, fmt::format("{}: row {} has {} fields, header has {}", source,
                                                      row, fields.size(), header.size()));
        }
        if (has_time) {
            std::int64_t t = 0;
            if (!parse_number(fields[0], t)) {
                throw Error(ErrorCode::Parse,
                            fmt::format("{}: row {}, column \"timestamp\": '{}' is not an integer", source,
                                        row, fields[0]));
            }
            stamps.push_back(t);
        }
        for (std::size_t c = 0; c < n; ++c) {
            double v = 0.0;
            const auto text = fields[first + c];
            if (!parse_number(text, v) || !std::isfinite(v)) {
                throw Error(ErrorCode::Parse,
                            fmt::format("{}: row {}, column \"{}\": '{}' is not a finite number", source, row,
                                        ids[c], text));
            }
            cells.push_back(v);
        }
    }
    if (row < 2) {
        throw Error(ErrorCode::Parse, fmt::format("{}: need at least 2 data rows, found {}", source, row));
    }
    Matrix values(row, n);
    std::ranges::copy(cells, values.data().begin());
    std::optional<std::vector<std::int64_t>> ts;
    if (has_time) ts = std::move(stamps);
    try {
        return SensorDataset(std::move(values), std::move(ids), std::move(ts));
    } catch (const Error& e) {
        throw Error(ErrorCode::Parse, fmt::format("{}: {}", source, e.what()));
    }
}

SensorDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
    return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const SensorDataset& data) {
    const auto& ts = data.timestamps();
    if (ts) out << "timestamp,";
    for (std::size_t c = 0; c < data.nodes(); ++c) {
        out << (c ? "," : "") << data.node_ids()[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        if (ts) out << (*ts)[r] << ',';
        const auto row = data.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const SensorDataset& data) {
    std::ostringstream out;
    write_csv(out, data);
    write_text_file(path, out.str());
}

void require_same_nodes(std::span<const std::string> expected, std::span<const std::string> actual) {
    const std::size_t common = std::min(expected.size(), actual.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (expected[i] != actual[i]) {
            throw Error(ErrorCode::SchemaMismatch,
                        fmt::format("node {} is '{}' in the data but '{}' in the model", i + 1, actual[i],
                                    expected[i]));
        }
    }
    if (expected.size() != actual.size()) {
        throw Error(ErrorCode::SchemaMismatch,
                    fmt::format("data has {} nodes, model has {}", actual.size(), expected.size()));
    }
}

// ---------------------------------------------------------------------------

StandardizedData standardize(const SensorDataset& data) {
    const std::size_t m = data.rows();
    const std::size_t n = data.nodes();
    Standardization s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t c = 0; c < n; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < m; ++r) sum += data.values()(r, c);
        const double mean = sum / static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double d = data.values()(r, c) - mean;
            ss += d * d;
        }
        const double var = ss / static_cast<double>(m - 1);
        // Relative test: a column whose spread is at rounding level is constant.
        if (!(var > 0.0) || std::sqrt(var) <= 1e-12 * std::max(1.0, std::abs(mean))) {
            throw Error(ErrorCode::ZeroVariance,
                        fmt::format("node '{}' has zero variance", data.node_ids()[c]));
        }
        s.means[c] = mean;
        s.variances[c] = var;
    }
    Matrix out(m, n);
    for (std::size_t r = 0; r < m; ++r) {
        const auto z = apply_standardization(data.row(r), s);
        std::ranges::copy(z, out.row(r).begin());
    }
    return {std::move(out), std::move(s)};
}

std::vector<double> apply_standardization(std::span<const double> row, const Standardization& s) {
    if (row.size() != s.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("row has {} values, standardization covers {} nodes", row.size(), s.size()));
    }
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
        out[i] = (row[i] - s.means[i]) / std::sqrt(s.variances[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------

DiscretizationScheme::DiscretizationScheme(std::vector<std::vector<double>> edges, int state_count)
    : edges_(std::move(edges)), state_count_(state_count) {
    if (state_count_ < 2) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("state count must be >= 2, got {}", state_count_));
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        if (e.size() != static_cast<std::size_t>(state_count_ - 1)) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("node {} has {} edges, expected {}", i, e.size(), state_count_ - 1));
        }
        for (std::size_t k = 0; k < e.size(); ++k) {
            if (!std::isfinite(e[k]) || (k > 0 && !(e[k] > e[k - 1]))) {
                throw Error(ErrorCode::InvalidArgument,
                            fmt::format("node {} edges are not strictly increasing", i));
            }
        }
    }
}

State DiscretizationScheme::state_of(std::size_t node, double value) const {
    const auto& e = edges_.at(node);
    return 1 + static_cast<State>(std::ranges::upper_bound(e, value) - e.begin());
}

StateMatrix::StateMatrix(std::size_t rows, std::size_t cols, int state_count, std::vector<State> states)
    : rows_(rows), cols_(cols), state_count_(state_count), states_(std::move(states)) {
    if (state_count_ < 2) throw Error(ErrorCode::InvalidArgument, "state count must be >= 2");
    if (states_.size() != rows_ * cols_) {
        throw Error(ErrorCode::DimensionMismatch, "state matrix size does not match its shape");
    }
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i] < 1 || states_[i] > state_count_) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("state {} at row {}, column {} outside 1..{}", states_[i], i / cols_ + 1,
                                    i % cols_ + 1, state_count_));
        }
    }
}

StateMatrix StateMatrix::from_columns(const std::vector<std::vector<State>>& columns, int state_count) {
    const std::size_t cols = columns.size();
    const std::size_t rows = cols == 0 ? 0 : columns.front().size();
    std::vector<State> states(rows * cols);
    for (std::size_t c = 0; c < cols; ++c) {
        if (columns[c].size() != rows) throw Error(ErrorCode::DimensionMismatch, "ragged state columns");
        for (std::size_t r = 0; r < rows; ++r) states[r * cols + c] = columns[c][r];
    }
    return StateMatrix(rows, cols, state_count, std::move(states));
}

std::vector<State> StateMatrix::column(std::size_t c) const {
    std::vector<State> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

StateMatrix StateMatrix::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows_) throw Error(ErrorCode::InvalidArgument, "state row range out of bounds");
    std::vector<State> states(states_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                              states_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
    return StateMatrix(end - begin, cols_, state_count_, std::move(states));
}

DiscretizationScheme fit_discretization(const SensorDataset& data, int state_count) {
    if (state_count < 2) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("state count must be >= 2, got {}", state_count));
    }
    std::vector<std::vector<double>> edges(data.nodes());
    for (std::size_t c = 0; c < data.nodes(); ++c) {
        const auto col = data.column(c);
        const auto [lo, hi] = std::ranges::minmax(col);
        if (!(hi > lo)) {
            throw Error(ErrorCode::Degenerate,
                        fmt::format("node '{}' is constant; cannot discretize", data.node_ids()[c]));
        }
        const double width = (hi - lo) / state_count;
        for (int k = 1; k < state_count; ++k) edges[c].push_back(lo + width * k);
    }
    return DiscretizationScheme(std::move(edges), state_count);
}

std::vector<State> discretize_row(std::span<const double> row, const DiscretizationScheme& scheme) {
    if (row.size() != scheme.nodes()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("row has {} values, scheme covers {} nodes", row.size(), scheme.nodes()));
    }
    std::vector<State> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) out[c] = scheme.state_of(c, row[c]);
    return out;
}

StateMatrix discretize(const SensorDataset& data, const DiscretizationScheme& scheme) {
    if (data.nodes() != scheme.nodes()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("data has {} nodes, scheme covers {}", data.nodes(), scheme.nodes()));
    }
    std::vector<State> states;
    states.reserve(data.rows() * data.nodes());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto s = discretize_row(data.row(r), scheme);
        states.insert(states.end(), s.begin(), s.end());
    }
    return StateMatrix(data.rows(), data.nodes(), scheme.state_count(), std::move(states));
}

// ---------------------------------------------------------------------------

SensorDataset inject_errors(const SensorDataset& data, std::span<const std::size_t> rows, double fraction,
                            std::span<const double> training_means) {
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "inject_errors: empty row set");
    if (!std::isfinite(fraction)) throw Error(ErrorCode::InvalidArgument, "inject_errors: fraction not finite");
    if (training_means.size() != data.nodes()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("inject_errors: {} means for {} nodes", training_means.size(), data.nodes()));
    }
    const std::set<std::size_t> selected(rows.begin(), rows.end());
    Matrix values = data.values();
    for (const auto r : selected) {
        if (r >= data.rows()) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("inject_errors: row {} outside 0..{}", r, data.rows() - 1));
        }
        for (std::size_t c = 0; c < data.nodes(); ++c) values(r, c) += training_means[c] * fraction;
    }
    return SensorDataset(std::move(values), data.node_ids(), data.timestamps());
}

std::vector<std::size_t> last_rows(std::size_t rows, std::size_t count) {
    if (count > rows) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("cannot select last {} of {} rows", count, rows));
    }
    std::vector<std::size_t> out;
    for (std::size_t r = rows - count; r < rows; ++r) out.push_back(r);
    return out;
}

} // namespace sensorprep
