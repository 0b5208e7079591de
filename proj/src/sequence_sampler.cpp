#include "vra/sequence_sampler.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "vra/errors.hpp"

namespace vra {

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
    if (bound == 0) {
        throw ConfigError("uniform_below: bound must be positive");
    }
    // Reject the top partial block of 2^64 so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = next();
    while (x >= limit) {
        x = next();
    }
    return x % bound;
}

double RngStream::normal() noexcept {
    const double u1 = 1.0 - uniform01(); // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream make_rng(std::uint64_t base_seed, std::uint32_t repeat_index, std::string_view video_id) {
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ (static_cast<std::uint64_t>(repeat_index) + 0x9E3779B97F4A7C15ULL));
    h = mix64(h ^ fnv1a64(video_id));
    return RngStream(h, RngProvenance{base_seed, repeat_index, std::string(video_id)});
}

SequenceSample sample_sequence(const FrameFeatureMatrix& features, std::size_t length, RngStream& rng) {
    if (length < 1) {
        throw ConfigError("sequence length must be at least 1");
    }
    const std::size_t n = features.n_frames();
    if (n < length) {
        throw TooFewFrames(features.video_id, n, length);
    }
    const auto start = static_cast<std::size_t>(rng.uniform_below(n - length + 1));
    const std::size_t dim = features.dim();

    SequenceSample out;
    out.video_id = features.video_id;
    out.start = start;
    out.length = length;
    out.features = Matrix<double>(length, dim);
    for (std::size_t i = 0; i < length; ++i) {
        const auto src = features.values.row(start + i);
        auto dst = out.features.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            dst[j] = static_cast<double>(src[j]);
        }
    }
    return out;
}

} // namespace vra
