#pragma once

// Central finite-difference check of the analytic RMSE gradients. The oracle
// differentiates forward_masked + loss_rmse numerically and shares no code
// with the backward pass.

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>
#include <vector>

#include "vra/regressor.hpp"

namespace vra::test {

struct GradCheckCase {
    RegressorParams params;
    std::vector<std::vector<double>> inputs;
    std::vector<double> labels;
    std::vector<DropoutMask> masks;
};

/// Only guards 0/0 for parameters whose gradient is exactly zero on both
/// sides (dead rectifier units); every other entry is purely relative.
inline constexpr double grad_rel_floor = std::numeric_limits<double>::min();

inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), grad_rel_floor});
}

inline double batch_loss(const RegressorParams& p, const GradCheckCase& c) {
    std::vector<double> preds;
    for (std::size_t s = 0; s < c.inputs.size(); ++s) {
        preds.push_back(forward_masked(p, c.inputs[s], c.masks.empty() ? nullptr : &c.masks[s]));
    }
    return loss_rmse(preds, c.labels);
}

/// Max relative error over every weight and bias.
inline double max_gradient_error(const GradCheckCase& c, double h = 1e-6) {
    const auto analytic = backward(c.params, c.inputs, c.labels, c.masks).grads;
    RegressorParams p = c.params;
    double worst = 0.0;
    const auto probe = [&](double& slot, double a) {
        const double saved = slot;
        slot = saved + h;
        const double up = batch_loss(p, c);
        slot = saved - h;
        const double down = batch_loss(p, c);
        slot = saved;
        worst = std::max(worst, relative_error(a, (up - down) / (2.0 * h)));
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t i = 0; i < p.layers[l].weight.size(); ++i) probe(p.layers[l].weight[i], analytic.layers[l].weight[i]);
        for (std::size_t i = 0; i < p.layers[l].bias.size(); ++i) probe(p.layers[l].bias[i], analytic.layers[l].bias[i]);
    }
    return worst;
}

inline GradCheckCase make_gradcheck_case(std::size_t input_dim, std::vector<std::size_t> hidden, std::uint64_t seed,
                                         std::size_t batch = 4, double dropout = 0.1) {
    GradCheckCase c;
    c.params = init_params(input_dim, hidden, dropout, seed);
    std::mt19937_64 gen(seed * 1000003ULL + input_dim);
    std::uniform_real_distribution<double> bias(-0.5, 0.5), x(-2.0, 2.0), y(1.0, 5.0);
    for (auto& layer : c.params.layers)
        for (auto& b : layer.bias) b = bias(gen);
    auto rng = make_rng(seed, 99, "gradcheck");
    for (std::size_t s = 0; s < batch; ++s) {
        std::vector<double> in(input_dim);
        for (auto& v : in) v = x(gen);
        c.inputs.push_back(std::move(in));
        c.labels.push_back(y(gen));
        c.masks.push_back(sample_dropout_mask(input_dim, dropout, rng));
    }
    return c;
}

struct Architecture {
    std::size_t input_dim;
    std::vector<std::size_t> hidden;
};

inline std::vector<Architecture> gradcheck_architectures() {
    return {{4, {}}, {6, {5}}, {8, {7, 5}}, {12, {16, 8, 4}}, {32, {24, 12}}};
}

} // namespace vra::test
