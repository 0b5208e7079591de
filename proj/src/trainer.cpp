#include "vra/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "vra/errors.hpp"
#include "vra/pooling.hpp"

namespace vra {

namespace {

void require_congruent(const Gradients& a, const RegressorParams& p, const char* what) {
    if (a.layers.size() != p.layers.size()) {
        throw DimensionMismatch(std::string(what) + ": layer count differs from parameters");
    }
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].weight.size() != p.layers[l].weight.size() ||
            a.layers[l].bias.size() != p.layers[l].bias.size()) {
            throw DimensionMismatch(std::string(what) + ": layer " + std::to_string(l) +
                                    " shape differs from parameters");
        }
    }
}

void check_finite_grads(const Gradients& grads) {
    for (std::size_t l = 0; l < grads.layers.size(); ++l) {
        const auto& g = grads.layers[l];
        for (std::size_t i = 0; i < g.weight.size(); ++i) {
            if (!std::isfinite(g.weight[i])) {
                throw NonFiniteError("non-finite gradient in layer " + std::to_string(l) + " weight[" +
                                     std::to_string(i / g.in_dim) + "][" + std::to_string(i % g.in_dim) +
                                     "] = " + std::to_string(g.weight[i]));
            }
        }
        for (std::size_t i = 0; i < g.bias.size(); ++i) {
            if (!std::isfinite(g.bias[i])) {
                throw NonFiniteError("non-finite gradient in layer " + std::to_string(l) + " bias[" +
                                     std::to_string(i) + "] = " + std::to_string(g.bias[i]));
            }
        }
    }
}

void adamw_update(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v,
                  const AdamWConfig& cfg, double lr, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        p[i] = p[i] - lr * (m_hat / (std::sqrt(v_hat) + cfg.eps)) - lr * cfg.weight_decay * p[i];
    }
}

struct GroupResult {
    Gradients grads;
    double squared_error = 0.0;
};

GroupResult run_group(const RegressorParams& params, std::span<const MicroBatch> group) {
    if (group.empty()) {
        throw DataError("accumulation group is empty");
    }
    std::vector<Gradients> per_batch;
    per_batch.reserve(group.size());
    GroupResult out;
    for (const auto& mb : group) {
        auto r = backward(params, mb.inputs, mb.labels, mb.masks);
        for (std::size_t i = 0; i < r.predictions.size(); ++i) {
            const double e = r.predictions[i] - mb.labels[i];
            out.squared_error += e * e;
        }
        per_batch.push_back(std::move(r.grads));
    }
    out.grads = mean_gradients(per_batch);
    return out;
}

std::vector<double> pooled_input(const FrameFeatureMatrix& video, std::size_t length, RngStream rng) {
    return pool_concat(sample_sequence(video, length, rng).features).concat;
}

void fisher_yates(std::vector<std::size_t>& order, RngStream rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_below(i));
        std::swap(order[i - 1], order[j]);
    }
}

} // namespace

void TrainConfig::validate() const {
    const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!positive(learning_rate)) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (accumulation_steps < 1) throw ConfigError("accumulation_steps must be at least 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
    if (sequence_length < 2) throw ConfigError("sequence_length must be at least 2 for std pooling");
    if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be at least 1");
    if (!(scheduler.factor > 0.0 && scheduler.factor < 1.0)) throw ConfigError("scheduler factor must lie in (0, 1)");
    if (scheduler.patience < 1) throw ConfigError("scheduler patience must be at least 1");
    if (!(scheduler.threshold >= 0.0 && scheduler.threshold < 1.0)) {
        throw ConfigError("scheduler threshold must lie in [0, 1)");
    }
    if (!(scheduler.min_lr >= 0.0) || !std::isfinite(scheduler.min_lr)) throw ConfigError("min_lr must be >= 0");
    if (!(adamw.beta1 >= 0.0 && adamw.beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
    if (!(adamw.beta2 >= 0.0 && adamw.beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
    if (!positive(adamw.eps)) throw ConfigError("eps must be positive");
    if (!(adamw.weight_decay >= 0.0) || !std::isfinite(adamw.weight_decay)) {
        throw ConfigError("weight_decay must be >= 0");
    }
}

OptimizerState OptimizerState::init(const RegressorParams& params, double lr) {
    return OptimizerState{Gradients::zeros_like(params), Gradients::zeros_like(params), 0, lr};
}

void adamw_step(const AdamWConfig& config, OptimizerState& state, RegressorParams& params, const Gradients& grads) {
    require_congruent(grads, params, "adamw_step gradients");
    require_congruent(state.m, params, "adamw_step first moment");
    require_congruent(state.v, params, "adamw_step second moment");
    check_finite_grads(grads);

    ++state.t;
    const double t = static_cast<double>(state.t);
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& p = params.layers[l];
        const auto& g = grads.layers[l];
        adamw_update(p.weight, g.weight, state.m.layers[l].weight, state.v.layers[l].weight, config, state.lr, bc1,
                     bc2);
        adamw_update(p.bias, g.bias, state.m.layers[l].bias, state.v.layers[l].bias, config, state.lr, bc1, bc2);
    }
}

Gradients mean_gradients(std::span<const Gradients> group) {
    if (group.empty()) {
        throw DataError("mean_gradients: empty group");
    }
    Gradients out = group.front();
    for (std::size_t k = 1; k < group.size(); ++k) {
        if (group[k].layers.size() != out.layers.size()) {
            throw DimensionMismatch("mean_gradients: gradient shapes differ");
        }
        for (std::size_t l = 0; l < out.layers.size(); ++l) {
            auto& dst = out.layers[l];
            const auto& src = group[k].layers[l];
            if (src.weight.size() != dst.weight.size() || src.bias.size() != dst.bias.size()) {
                throw DimensionMismatch("mean_gradients: gradient shapes differ");
            }
            for (std::size_t i = 0; i < dst.weight.size(); ++i) dst.weight[i] += src.weight[i];
            for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += src.bias[i];
        }
    }
    if (group.size() > 1) {
        const double inv = 1.0 / static_cast<double>(group.size());
        for (auto& layer : out.layers) {
            for (auto& w : layer.weight) w *= inv;
            for (auto& b : layer.bias) b *= inv;
        }
    }
    return out;
}

Gradients accumulate_gradients(const RegressorParams& params, std::span<const MicroBatch> group) {
    return run_group(params, group).grads;
}

bool is_improvement(double candidate, double best, double threshold) noexcept {
    if (std::isinf(best) && best > 0.0) {
        return candidate < best;
    }
    return candidate < best * (1.0 - threshold);
}

PlateauScheduler::PlateauScheduler(SchedulerConfig config, double initial_lr)
    : m_config(config), m_lr(initial_lr), m_best(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::update(double val_loss) {
    if (is_improvement(val_loss, m_best, m_config.threshold)) {
        m_best = val_loss;
        m_bad_epochs = 0;
    } else {
        ++m_bad_epochs;
    }
    if (m_bad_epochs >= m_config.patience) {
        m_lr = std::max(m_lr * m_config.factor, m_config.min_lr);
        m_bad_epochs = 0;
    }
    return m_lr;
}

StopDecision early_stop_check(std::span<const double> val_losses, std::uint32_t patience, double threshold) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t bad = 0;
    for (double v : val_losses) {
        if (is_improvement(v, best, threshold)) {
            best = v;
            bad = 0;
        } else {
            ++bad;
        }
    }
    return bad >= patience ? StopDecision::stop : StopDecision::proceed;
}

std::vector<double> TrainHistory::val_losses() const {
    std::vector<double> out;
    out.reserve(epochs.size());
    for (const auto& e : epochs) {
        out.push_back(e.val_rmse);
    }
    return out;
}

std::string TrainHistory::to_json() const {
    nlohmann::ordered_json j;
    j["best_epoch"] = best_epoch;
    j["stopped_early"] = stopped_early;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : epochs) {
        arr.push_back({{"epoch", e.epoch},
                       {"train_rmse", e.train_rmse},
                       {"val_rmse", e.val_rmse},
                       {"lr", e.lr},
                       {"wall_seconds", e.wall_seconds}});
    }
    j["epochs"] = std::move(arr);
    return j.dump(2);
}

TrainResult train(const TrainConfig& config, std::span<const LabeledVideo> train_set,
                  std::span<const LabeledVideo> val_set, const RegressorParams& initial, const OptimizerState* resume,
                  const EpochCallback& on_epoch) {
    config.validate();
    initial.validate();

    RegressorParams params = initial;
    params.dropout_rate = config.dropout_rate;
    OptimizerState opt = resume != nullptr ? *resume : OptimizerState::init(params, config.learning_rate);
    require_congruent(opt.m, params, "resumed optimizer state");

    TrainResult result{TrainedModel{params, opt, config}, {}};
    if (config.max_epochs == 0) {
        return result;
    }
    if (train_set.empty() || val_set.empty()) {
        throw DataError("training needs non-empty train and validation sets");
    }
    for (const auto* set : {&train_set, &val_set}) {
        for (const auto& v : *set) {
            if (2 * v.features.dim() != params.input_dim()) {
                throw DimensionMismatch("video '" + v.features.video_id + "' pools to " +
                                        std::to_string(2 * v.features.dim()) + " values, regressor expects " +
                                        std::to_string(params.input_dim()));
            }
        }
    }

    const std::size_t length = config.sequence_length;
    const std::uint64_t shuffle_seed = mix64(config.seed ^ 0x01);
    const std::uint64_t sample_seed = mix64(config.seed ^ 0x02);
    const std::uint64_t dropout_seed = mix64(config.seed ^ 0x03);
    const std::uint64_t val_seed = mix64(config.seed ^ 0x04);

    // Validation windows are drawn once so epoch losses stay comparable.
    std::vector<std::vector<double>> val_inputs;
    std::vector<double> val_labels;
    for (const auto& v : val_set) {
        val_inputs.push_back(pooled_input(v.features, length, make_rng(val_seed, 0, v.features.video_id)));
        val_labels.push_back(v.mos_label);
    }

    PlateauScheduler scheduler(config.scheduler, opt.lr);
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(train_set.size());

    for (std::uint32_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        std::uint64_t step = opt.t;
        EpochRecord record;
        record.epoch = epoch;
        record.lr = opt.lr;
        try {
            std::iota(order.begin(), order.end(), std::size_t{0});
            fisher_yates(order, make_rng(shuffle_seed, epoch, ""));

            std::vector<MicroBatch> group;
            double squared_error = 0.0;
            const auto flush = [&] {
                if (group.empty()) return;
                auto g = run_group(params, group);
                squared_error += g.squared_error;
                step = opt.t + 1;
                adamw_step(config.adamw, opt, params, g.grads);
                group.clear();
            };
            for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
                MicroBatch mb;
                const std::size_t end = std::min(order.size(), begin + config.batch_size);
                for (std::size_t k = begin; k < end; ++k) {
                    const auto& video = train_set[order[k]];
                    const auto& id = video.features.video_id;
                    mb.inputs.push_back(pooled_input(video.features, length, make_rng(sample_seed, epoch, id)));
                    mb.labels.push_back(video.mos_label);
                    auto drop_rng = make_rng(dropout_seed, epoch, id);
                    mb.masks.push_back(sample_dropout_mask(mb.inputs.back().size(), params.dropout_rate, drop_rng));
                }
                group.push_back(std::move(mb));
                if (group.size() == config.accumulation_steps) {
                    flush();
                }
            }
            flush();
            record.train_rmse = std::sqrt(squared_error / static_cast<double>(train_set.size()));

            std::vector<double> preds(val_inputs.size());
            for (std::size_t i = 0; i < val_inputs.size(); ++i) {
                preds[i] = forward_masked(params, val_inputs[i], nullptr);
            }
            record.val_rmse = loss_rmse(preds, val_labels);
            if (!std::isfinite(record.val_rmse) || !std::isfinite(record.train_rmse)) {
                throw NonFiniteError("loss became non-finite");
            }
        } catch (const NumericError& e) {
            throw NumericError("epoch " + std::to_string(epoch) + ", step " + std::to_string(step) + ": " + e.what());
        }
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.history.epochs.push_back(record);

        if (record.val_rmse < best_val) {
            best_val = record.val_rmse;
            result.model = TrainedModel{params, opt, config};
            result.history.best_epoch = epoch;
        }
        opt.lr = scheduler.update(record.val_rmse);
        if (on_epoch) {
            on_epoch(record);
        }
        const auto losses = result.history.val_losses();
        if (early_stop_check(losses, config.early_stop_patience, config.scheduler.threshold) == StopDecision::stop) {
            result.history.stopped_early = true;
            break;
        }
    }
    return result;
}

std::vector<LabeledVideo> load_labeled(const FeatureStore& store, std::span<const std::string> ids) {
    std::vector<LabeledVideo> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        out.push_back(LabeledVideo{store.load(id), store.manifest().at(id).mos_label});
    }
    return out;
}

TrainResult train(const TrainConfig& config, const FeatureStore& store, const SplitAssignment& splits,
                  const RegressorParams& initial, const OptimizerState* resume, const EpochCallback& on_epoch) {
    const auto train_set = load_labeled(store, splits.train_ids);
    const auto val_set = load_labeled(store, splits.val_ids);
    return train(config, train_set, val_set, initial, resume, on_epoch);
}

TrainResult finetune_on_all(const TrainConfig& config, const FeatureStore& store, const SplitAssignment& splits,
                            const TrainedModel& best, const EpochCallback& on_epoch) {
    std::vector<std::string> all_ids = splits.train_ids;
    all_ids.insert(all_ids.end(), splits.val_ids.begin(), splits.val_ids.end());
    const auto train_set = load_labeled(store, all_ids);
    const auto val_set = load_labeled(store, splits.val_ids);
    return train(config, train_set, val_set, best.params, &best.optimizer, on_epoch);
}

} // namespace vra
