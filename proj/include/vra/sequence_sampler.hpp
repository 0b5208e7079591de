#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "vra/feature_store.hpp"
#include "vra/matrix.hpp"

namespace vra {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : text) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

struct RngProvenance {
    std::uint64_t base_seed = 0;
    std::uint32_t repeat_index = 0;
    std::string video_id;

    bool operator==(const RngProvenance&) const = default;
};

/// SplitMix64 stream. A value type: copies continue independently.
class RngStream {
public:
    explicit RngStream(std::uint64_t state) noexcept : m_state(state) {}
    RngStream(std::uint64_t state, RngProvenance provenance)
        : m_state(state), m_provenance(std::move(provenance)) {}

    std::uint64_t next() noexcept {
        m_state += 0x9E3779B97F4A7C15ULL;
        return mix64(m_state);
    }

    /// Uniform integer in [0, bound) without modulo bias. bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Box-Muller, two draws per call).
    double normal() noexcept;

    std::uint64_t state() const noexcept { return m_state; }
    const std::optional<RngProvenance>& provenance() const noexcept { return m_provenance; }

private:
    std::uint64_t m_state;
    std::optional<RngProvenance> m_provenance;
};

/// Derives the stream for one (seed, repeat, video) cell.
RngStream make_rng(std::uint64_t base_seed, std::uint32_t repeat_index, std::string_view video_id);

inline constexpr std::size_t default_sequence_length = 5;

struct SequenceSample {
    std::string video_id;
    std::size_t start = 0;
    std::size_t length = 0;
    Matrix<double> features; // length x dim, promoted to 64-bit
    std::optional<double> mos_label;
};

/// Picks a start uniformly in [0, n_frames - length] and copies the
/// contiguous window of `length` frames.
SequenceSample sample_sequence(const FrameFeatureMatrix& features, std::size_t length, RngStream& rng);

} // namespace vra
