#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sensorprep/ingest.hpp"

namespace testing_support {

inline std::vector<std::string> ids(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
    return out;
}

inline sensorprep::SensorDataset random_dataset(std::mt19937_64& rng, std::size_t m, std::size_t n) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.1, 50.0);
    std::uniform_real_distribution<double> offset(-100.0, 100.0);
    sensorprep::Matrix x(m, n);
    for (std::size_t c = 0; c < n; ++c) {
        const double s = scale(rng);
        const double o = offset(rng);
        for (std::size_t r = 0; r < m; ++r) x(r, c) = o + s * z(rng);
    }
    return sensorprep::SensorDataset(std::move(x), ids(n));
}

inline sensorprep::SensorDataset dataset(std::vector<std::vector<double>> columns) {
    const auto n = columns.size();
    return sensorprep::SensorDataset(sensorprep::Matrix::from_columns(columns), ids(n));
}

} // namespace testing_support
