#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sensorprep/ingest.hpp"

namespace sensorprep {

enum class SynthKind {
    /// A few latent smooth signals mixed linearly into every channel plus
    /// per-channel noise.
    CorrelatedDrift,
    /// Correlated-drift base channels; designated children repeat a parent
    /// at the same sample, exactly or with added noise.
    CopyChild,
    /// White-noise base channels; designated children repeat a parent's
    /// previous sample.
    LaggedCopy,
};

SynthKind parse_synth_kind(std::string_view name);
std::string_view to_string(SynthKind kind) noexcept;

struct CopyLink {
    std::size_t child;
    std::size_t parent;
};

struct SynthProfile {
    SynthKind kind = SynthKind::CorrelatedDrift;
    std::size_t latent_signals = 2;
    /// Channel noise standard deviation relative to the channel's signal scale.
    double noise = 0.05;
    /// Noise added to copies, relative to the parent's signal scale. Zero means exact.
    double copy_noise = 0.0;
    /// Empty means the default: the last n/3 nodes (at least one) copy the first ones.
    std::vector<CopyLink> links;
};

/// Copy links a profile resolves to for n nodes; empty for CorrelatedDrift.
std::vector<CopyLink> resolve_links(const SynthProfile& profile, std::size_t n);

/// Deterministic in (seed, m, n, profile). Timestamps are one minute apart.
SensorDataset synth_generate(std::uint64_t seed, std::size_t m, std::size_t n, const SynthProfile& profile);

} // namespace sensorprep
