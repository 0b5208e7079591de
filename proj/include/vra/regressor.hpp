#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vra/pooling.hpp"
#include "vra/sequence_sampler.hpp"

namespace vra {

/// Fully connected layer: weight is out_dim x in_dim row-major.
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    bool operator==(const DenseLayer&) const = default;
};

/// MOS regression head. Hidden layers use a rectifier, the last layer is
/// linear with a single output. Dropout acts on the input vector only.
struct RegressorParams {
    std::vector<DenseLayer> layers;
    double dropout_rate = 0.0;

    std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().in_dim; }
    std::vector<std::size_t> hidden_dims() const;

    /// Checks the dimension chain, final output of 1 and finiteness.
    void validate() const;

    bool operator==(const RegressorParams&) const = default;
};

/// Shape-congruent with RegressorParams::layers.
struct Gradients {
    std::vector<DenseLayer> layers;

    static Gradients zeros_like(const RegressorParams& params);

    bool operator==(const Gradients&) const = default;
};

inline constexpr std::array<std::size_t, 2> default_hidden_dims{512, 128};

enum class Mode { train, eval };

/// Per-input multiplier: 0 for dropped components, 1/(1-p) for kept ones.
using DropoutMask = std::vector<double>;

DropoutMask sample_dropout_mask(std::size_t dim, double rate, RngStream& rng);

/// Glorot-uniform weights, zero biases.
RegressorParams init_params(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                            double dropout_rate, std::uint64_t seed);

/// Forward pass with an explicit mask; nullptr means no dropout.
double forward_masked(const RegressorParams& params, std::span<const double> x, const DropoutMask* mask);

/// Train mode draws a dropout mask from `rng`; eval mode leaves `rng` untouched.
double forward(const RegressorParams& params, std::span<const double> x, Mode mode, RngStream& rng);
double forward(const RegressorParams& params, const PooledFeature& x, Mode mode, RngStream& rng);

/// sqrt(mean((pred - label)^2)).
double loss_rmse(std::span<const double> preds, std::span<const double> labels);

struct BackwardResult {
    double loss = 0.0;
    Gradients grads;
    std::vector<double> predictions;
};

/// Gradient of the batch RMSE with respect to every weight and bias.
/// `masks` is either empty (no dropout) or holds one mask per input.
/// At exactly zero loss all gradients are zero.
BackwardResult backward(const RegressorParams& params, std::span<const std::vector<double>> inputs,
                        std::span<const double> labels, std::span<const DropoutMask> masks = {});

} // namespace vra
