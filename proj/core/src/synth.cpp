#include "sensorprep/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>

#include "sensorprep/error.hpp"

namespace sensorprep {

SynthKind parse_synth_kind(std::string_view name) {
    if (name == "correlated-drift") return SynthKind::CorrelatedDrift;
    if (name == "copy-child") return SynthKind::CopyChild;
    if (name == "lagged-copy") return SynthKind::LaggedCopy;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown synthetic profile '{}'", name));
}

std::string_view to_string(SynthKind kind) noexcept {
    switch (kind) {
    case SynthKind::CorrelatedDrift: return "correlated-drift";
    case SynthKind::CopyChild: return "copy-child";
    case SynthKind::LaggedCopy: return "lagged-copy";
    }
    return "unknown";
}

std::vector<CopyLink> resolve_links(const SynthProfile& profile, std::size_t n) {
    if (profile.kind == SynthKind::CorrelatedDrift) return {};
    std::vector<CopyLink> links = profile.links;
    if (links.empty()) {
        if (n < 2) throw Error(ErrorCode::InvalidArgument, "copy profiles need at least 2 nodes");
        const std::size_t copies = std::max<std::size_t>(1, n / 3);
        for (std::size_t i = 0; i < copies; ++i) links.push_back({n - copies + i, i});
    }
    std::set<std::size_t> children;
    for (const auto& l : links) {
        if (l.child >= n || l.parent >= n || l.child == l.parent) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("invalid copy link {} <- {} for {} nodes", l.child, l.parent, n));
        }
        if (!children.insert(l.child).second) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("node {} copies two parents", l.child));
        }
    }
    for (const auto& l : links) {
        if (children.contains(l.parent)) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("node {} is both a copy and a copy source", l.parent));
        }
    }
    return links;
}

namespace {

struct Channel {
    double base;
    double scale;
};

// Smooth latent sinusoids mixed through unit-norm loadings.
void fill_drift(Matrix& values, std::span<const std::size_t> columns, std::span<const Channel> channels,
                const SynthProfile& profile, std::mt19937_64& rng) {
    const std::size_t latent = std::max<std::size_t>(1, profile.latent_signals);
    std::uniform_real_distribution<double> period_dist(60.0, 240.0);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> periods(latent), phases(latent);
    for (std::size_t l = 0; l < latent; ++l) {
        periods[l] = period_dist(rng);
        phases[l] = phase_dist(rng);
    }
    std::vector<std::vector<double>> loadings(columns.size(), std::vector<double>(latent));
    for (auto& w : loadings) {
        double norm = 0.0;
        for (auto& x : w) {
            x = gauss(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (auto& x : w) x /= norm;
    }
    for (std::size_t t = 0; t < values.rows(); ++t) {
        std::vector<double> signal(latent);
        for (std::size_t l = 0; l < latent; ++l) {
            signal[l] = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / periods[l] + phases[l]);
        }
        for (std::size_t i = 0; i < columns.size(); ++i) {
            double mix = 0.0;
            for (std::size_t l = 0; l < latent; ++l) mix += loadings[i][l] * signal[l];
            const auto& ch = channels[columns[i]];
            values(t, columns[i]) = ch.base + ch.scale * (mix + profile.noise * gauss(rng));
        }
    }
}

} // namespace

SensorDataset synth_generate(std::uint64_t seed, std::size_t m, std::size_t n, const SynthProfile& profile) {
    if (m < 2 || n < 1) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("synthetic data needs m >= 2 and n >= 1, got {}x{}", m, n));
    }
    if (!(profile.noise >= 0.0) || !(profile.copy_noise >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "noise levels must be non-negative");
    }
    const auto links = resolve_links(profile, n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> base_dist(15.0, 35.0);
    std::uniform_real_distribution<double> scale_dist(1.0, 3.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Channel> channels(n);
    for (auto& ch : channels) {
        ch.base = base_dist(rng);
        ch.scale = scale_dist(rng);
    }
    std::set<std::size_t> children;
    for (const auto& l : links) children.insert(l.child);
    std::vector<std::size_t> base_columns;
    for (std::size_t j = 0; j < n; ++j) {
        if (!children.contains(j)) base_columns.push_back(j);
    }

    Matrix values(m, n);
    if (profile.kind == SynthKind::LaggedCopy) {
        for (std::size_t t = 0; t < m; ++t) {
            for (const auto j : base_columns) values(t, j) = channels[j].base + channels[j].scale * gauss(rng);
        }
    } else {
        fill_drift(values, base_columns, channels, profile, rng);
    }

    for (const auto& l : links) {
        const double noise_sd = profile.copy_noise * channels[l.parent].scale;
        for (std::size_t t = 0; t < m; ++t) {
            const std::size_t source = (profile.kind == SynthKind::LaggedCopy && t > 0) ? t - 1 : t;
            const double noise = noise_sd > 0.0 ? noise_sd * gauss(rng) : 0.0;
            values(t, l.child) = values(source, l.parent) + noise;
        }
    }

    std::vector<std::string> ids;
    for (std::size_t j = 0; j < n; ++j) ids.push_back(fmt::format("s{:02}", j + 1));
    std::vector<std::int64_t> stamps(m);
    for (std::size_t t = 0; t < m; ++t) stamps[t] = static_cast<std::int64_t>(t) * 60;
    return SensorDataset(std::move(values), std::move(ids), std::move(stamps));
}

} // namespace sensorprep
