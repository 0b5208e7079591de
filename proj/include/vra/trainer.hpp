#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vra/feature_store.hpp"
#include "vra/regressor.hpp"

namespace vra {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;

    bool operator==(const AdamWConfig&) const = default;
};

/// Reduce-on-plateau settings. An epoch improves when
/// val_loss < best * (1 - threshold).
struct SchedulerConfig {
    double factor = 0.5;
    std::uint32_t patience = 3;
    double threshold = 1e-4;
    double min_lr = 1e-8;

    bool operator==(const SchedulerConfig&) const = default;
};

struct TrainConfig {
    double learning_rate = 2e-5;
    std::uint32_t batch_size = 2;
    std::uint32_t accumulation_steps = 8;
    double dropout_rate = 0.1;
    std::uint32_t sequence_length = 5;
    std::uint32_t max_epochs = 33;
    std::uint32_t early_stop_patience = 5;
    SchedulerConfig scheduler;
    AdamWConfig adamw;
    std::uint64_t seed = 0;

    /// Throws ConfigError when a field violates its range.
    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

struct OptimizerState {
    Gradients m;
    Gradients v;
    std::uint64_t t = 0;
    double lr = 0.0;

    static OptimizerState init(const RegressorParams& params, double lr);

    bool operator==(const OptimizerState&) const = default;
};

/// Decoupled-weight-decay Adam step using `state.lr`:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
///   p -= lr * m_hat / (sqrt(v_hat) + eps) + lr * wd * p
/// Throws NonFiniteError (naming layer and index) on a non-finite gradient,
/// leaving params and state untouched.
void adamw_step(const AdamWConfig& config, OptimizerState& state, RegressorParams& params,
                const Gradients& grads);

/// Elementwise mean of a non-empty group of gradients.
Gradients mean_gradients(std::span<const Gradients> group);

struct MicroBatch {
    std::vector<std::vector<double>> inputs;
    std::vector<double> labels;
    std::vector<DropoutMask> masks;
};

/// Mean of the per-micro-batch RMSE gradients over one accumulation group.
Gradients accumulate_gradients(const RegressorParams& params, std::span<const MicroBatch> group);

bool is_improvement(double candidate, double best, double threshold) noexcept;

class PlateauScheduler {
public:
    PlateauScheduler(SchedulerConfig config, double initial_lr);

    /// Feeds one epoch's validation loss and returns the learning rate to use next.
    double update(double val_loss);

    double lr() const noexcept { return m_lr; }
    double best() const noexcept { return m_best; }
    std::uint32_t num_bad_epochs() const noexcept { return m_bad_epochs; }

private:
    SchedulerConfig m_config;
    double m_lr;
    double m_best;
    std::uint32_t m_bad_epochs = 0;
};

enum class StopDecision { proceed, stop };

/// Stops once the last `patience` epochs all failed to improve on the best
/// loss seen before them.
StopDecision early_stop_check(std::span<const double> val_losses, std::uint32_t patience,
                              double threshold = 1e-4);

struct EpochRecord {
    std::uint32_t epoch = 0; // 1-based
    double train_rmse = 0.0;
    double val_rmse = 0.0;
    double lr = 0.0; // rate used during the epoch
    double wall_seconds = 0.0;

    /// Compares everything except wall time.
    bool operator==(const EpochRecord& other) const noexcept {
        return epoch == other.epoch && train_rmse == other.train_rmse && val_rmse == other.val_rmse &&
               lr == other.lr;
    }
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::uint32_t best_epoch = 0; // 0 when no epoch ran
    bool stopped_early = false;

    std::vector<double> val_losses() const;
    std::string to_json() const;

    bool operator==(const TrainHistory&) const = default;
};

struct TrainedModel {
    RegressorParams params;
    OptimizerState optimizer;
    TrainConfig config;

    bool operator==(const TrainedModel&) const = default;
};

struct TrainResult {
    TrainedModel model;
    TrainHistory history;
};

struct LabeledVideo {
    FrameFeatureMatrix features;
    double mos_label = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs the optimization loop and returns the checkpoint with the lowest
/// validation RMSE. `resume` continues from an existing optimizer state.
TrainResult train(const TrainConfig& config, std::span<const LabeledVideo> train_set,
                  std::span<const LabeledVideo> val_set, const RegressorParams& initial,
                  const OptimizerState* resume = nullptr, const EpochCallback& on_epoch = {});

TrainResult train(const TrainConfig& config, const FeatureStore& store, const SplitAssignment& splits,
                  const RegressorParams& initial, const OptimizerState* resume = nullptr,
                  const EpochCallback& on_epoch = {});

/// Second phase: resume `best` on train + validation with the same config,
/// still monitoring the validation ids for early stopping.
TrainResult finetune_on_all(const TrainConfig& config, const FeatureStore& store,
                            const SplitAssignment& splits, const TrainedModel& best,
                            const EpochCallback& on_epoch = {});

std::vector<LabeledVideo> load_labeled(const FeatureStore& store, std::span<const std::string> ids);

// Checkpoint: "VRAC", u16 version, config block, shape table, little-endian
// binary64 parameters and moments, trailing CRC-32 of everything before it.
inline constexpr std::uint16_t checkpoint_version = 1;

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

} // namespace vra
