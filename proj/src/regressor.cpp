#include "vra/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vra/errors.hpp"

namespace vra {

namespace {

void check_input(const RegressorParams& params, std::size_t dim) {
    if (params.layers.empty()) {
        throw DataError("regressor has no layers");
    }
    if (dim != params.input_dim()) {
        throw DimensionMismatch("regressor expects input dim " + std::to_string(params.input_dim()) + ", got " +
                                std::to_string(dim));
    }
}

// Writes z = W a + b for one layer.
void affine(const DenseLayer& layer, std::span<const double> a, std::vector<double>& z) {
    z.assign(layer.out_dim, 0.0);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const double* w = layer.weight.data() + o * layer.in_dim;
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < layer.in_dim; ++i) {
            acc += w[i] * a[i];
        }
        z[o] = acc;
    }
}

std::vector<double> apply_mask(std::span<const double> x, const DropoutMask* mask) {
    std::vector<double> out(x.begin(), x.end());
    if (mask != nullptr) {
        if (mask->size() != x.size()) {
            throw DimensionMismatch("dropout mask has " + std::to_string(mask->size()) + " entries, input has " +
                                    std::to_string(x.size()));
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] *= (*mask)[i];
        }
    }
    return out;
}

} // namespace

std::vector<std::size_t> RegressorParams::hidden_dims() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        out.push_back(layers[l].out_dim);
    }
    return out;
}

void RegressorParams::validate() const {
    if (layers.empty()) {
        throw DataError("regressor has no layers");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError("dropout rate must lie in [0, 1)");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.in_dim == 0 || layer.out_dim == 0 || layer.weight.size() != layer.in_dim * layer.out_dim ||
            layer.bias.size() != layer.out_dim) {
            throw DimensionMismatch("layer " + std::to_string(l) + " has inconsistent shape");
        }
        if (l > 0 && layers[l - 1].out_dim != layer.in_dim) {
            throw DimensionMismatch("layer " + std::to_string(l) + " input dim does not match previous output");
        }
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(layer.weight.begin(), layer.weight.end(), finite) ||
            !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
            throw NonFiniteError("layer " + std::to_string(l) + " has non-finite parameters");
        }
    }
    if (layers.back().out_dim != 1) {
        throw DimensionMismatch("final layer must have a single output");
    }
}

Gradients Gradients::zeros_like(const RegressorParams& params) {
    Gradients g;
    g.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers) {
        g.layers.push_back(DenseLayer{layer.in_dim, layer.out_dim, std::vector<double>(layer.weight.size(), 0.0),
                                      std::vector<double>(layer.bias.size(), 0.0)});
    }
    return g;
}

DropoutMask sample_dropout_mask(std::size_t dim, double rate, RngStream& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ConfigError("dropout rate must lie in [0, 1)");
    }
    DropoutMask mask(dim, 1.0);
    if (rate == 0.0) {
        return mask;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    for (auto& m : mask) {
        m = rng.uniform01() < rate ? 0.0 : keep_scale;
    }
    return mask;
}

RegressorParams init_params(std::size_t input_dim, std::span<const std::size_t> hidden_dims, double dropout_rate,
                            std::uint64_t seed) {
    if (input_dim < 1) {
        throw ConfigError("input_dim must be at least 1");
    }
    if (std::any_of(hidden_dims.begin(), hidden_dims.end(), [](std::size_t d) { return d < 1; })) {
        throw ConfigError("hidden layer widths must be at least 1");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError("dropout rate must lie in [0, 1)");
    }

    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(1);

    auto rng = make_rng(seed, 0, "glorot-init");
    RegressorParams params;
    params.dropout_rate = dropout_rate;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer{dims[l], dims[l + 1], std::vector<double>(dims[l] * dims[l + 1]),
                         std::vector<double>(dims[l + 1], 0.0)};
        const double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
        for (auto& w : layer.weight) {
            w = (2.0 * rng.uniform01() - 1.0) * limit;
        }
        params.layers.push_back(std::move(layer));
    }
    return params;
}

double forward_masked(const RegressorParams& params, std::span<const double> x, const DropoutMask* mask) {
    check_input(params, x.size());
    std::vector<double> a = apply_mask(x, mask);
    std::vector<double> z;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        affine(params.layers[l], a, z);
        if (l + 1 < params.layers.size()) {
            for (auto& v : z) {
                v = v > 0.0 ? v : 0.0;
            }
        }
        a.swap(z);
    }
    return a[0];
}

double forward(const RegressorParams& params, std::span<const double> x, Mode mode, RngStream& rng) {
    if (mode == Mode::eval || params.dropout_rate == 0.0) {
        return forward_masked(params, x, nullptr);
    }
    const auto mask = sample_dropout_mask(x.size(), params.dropout_rate, rng);
    return forward_masked(params, x, &mask);
}

double forward(const RegressorParams& params, const PooledFeature& x, Mode mode, RngStream& rng) {
    return forward(params, std::span<const double>(x.concat), mode, rng);
}

double loss_rmse(std::span<const double> preds, std::span<const double> labels) {
    if (preds.size() != labels.size()) {
        throw DimensionMismatch("loss_rmse: " + std::to_string(preds.size()) + " predictions vs " +
                                std::to_string(labels.size()) + " labels");
    }
    if (preds.empty()) {
        throw DataError("loss_rmse: empty batch");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double e = preds[i] - labels[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(preds.size()));
}

BackwardResult backward(const RegressorParams& params, std::span<const std::vector<double>> inputs,
                        std::span<const double> labels, std::span<const DropoutMask> masks) {
    if (inputs.empty()) {
        throw DataError("backward: empty batch");
    }
    if (inputs.size() != labels.size()) {
        throw DimensionMismatch("backward: " + std::to_string(inputs.size()) + " inputs vs " +
                                std::to_string(labels.size()) + " labels");
    }
    if (!masks.empty() && masks.size() != inputs.size()) {
        throw DimensionMismatch("backward: need one dropout mask per input");
    }

    const std::size_t n_layers = params.layers.size();
    const std::size_t batch = inputs.size();

    // Forward pass, keeping every layer's input activation and pre-activation.
    std::vector<std::vector<std::vector<double>>> acts(batch);
    std::vector<std::vector<std::vector<double>>> pre(batch);
    BackwardResult result;
    result.predictions.resize(batch);
    for (std::size_t s = 0; s < batch; ++s) {
        check_input(params, inputs[s].size());
        acts[s].resize(n_layers + 1);
        pre[s].resize(n_layers);
        acts[s][0] = apply_mask(inputs[s], masks.empty() ? nullptr : &masks[s]);
        for (std::size_t l = 0; l < n_layers; ++l) {
            affine(params.layers[l], acts[s][l], pre[s][l]);
            acts[s][l + 1] = pre[s][l];
            if (l + 1 < n_layers) {
                for (auto& v : acts[s][l + 1]) {
                    v = v > 0.0 ? v : 0.0;
                }
            }
        }
        result.predictions[s] = acts[s][n_layers][0];
    }

    result.loss = loss_rmse(result.predictions, labels);
    result.grads = Gradients::zeros_like(params);
    if (result.loss == 0.0) {
        return result;
    }

    // d sqrt(mean e^2) / d pred_s = e_s / (B * loss)
    const double scale = 1.0 / (static_cast<double>(batch) * result.loss);
    std::vector<double> delta;
    std::vector<double> next_delta;
    for (std::size_t s = 0; s < batch; ++s) {
        delta.assign(1, (result.predictions[s] - labels[s]) * scale);
        for (std::size_t l = n_layers; l-- > 0;) {
            const auto& layer = params.layers[l];
            auto& g = result.grads.layers[l];
            const auto& a = acts[s][l];
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                const double d = delta[o];
                if (d == 0.0) {
                    continue;
                }
                g.bias[o] += d;
                double* gw = g.weight.data() + o * layer.in_dim;
                for (std::size_t i = 0; i < layer.in_dim; ++i) {
                    gw[i] += d * a[i];
                }
            }
            if (l == 0) {
                break;
            }
            next_delta.assign(layer.in_dim, 0.0);
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                const double d = delta[o];
                if (d == 0.0) {
                    continue;
                }
                const double* w = layer.weight.data() + o * layer.in_dim;
                for (std::size_t i = 0; i < layer.in_dim; ++i) {
                    next_delta[i] += w[i] * d;
                }
            }
            // Rectifier subgradient is 0 at 0.
            const auto& z = pre[s][l - 1];
            for (std::size_t i = 0; i < next_delta.size(); ++i) {
                if (!(z[i] > 0.0)) {
                    next_delta[i] = 0.0;
                }
            }
            delta.swap(next_delta);
        }
    }
    return result;
}

} // namespace vra
