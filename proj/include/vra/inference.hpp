#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vra/feature_store.hpp"
#include "vra/matrix.hpp"
#include "vra/regressor.hpp"

namespace vra {

/// R x V matrix of stochastic predictions; row r is repeat r.
struct PredictionSet {
    std::vector<std::string> video_ids;
    std::size_t repeats = 0;
    Matrix<double> values;
    std::uint64_t base_seed = 0;
};

struct EnsembleConfig {
    double weight_a = 0.75;
    double weight_b = 0.25;
};

/// Per-video MOS predictions in a fixed video order.
struct VideoPredictions {
    std::vector<std::string> video_ids;
    std::vector<double> mos;

    bool operator==(const VideoPredictions&) const = default;
};

enum class Execution { sequential, parallel };

/// Sample one window, pool it, and run the head in eval mode.
double predict_video(const RegressorParams& params, const FrameFeatureMatrix& video, std::size_t length,
                     RngStream& rng);
double predict_video(const RegressorParams& params, const FeatureStore& store, std::string_view video_id,
                     std::size_t length, RngStream& rng);

/// Cell (r, v) draws from make_rng(base_seed, r, video_id), so the result
/// does not depend on execution order or thread count.
PredictionSet predict_repeated(const RegressorParams& params, std::span<const FrameFeatureMatrix> videos,
                               std::size_t length, std::size_t repeats, std::uint64_t base_seed,
                               Execution execution = Execution::parallel, unsigned threads = 0);
PredictionSet predict_repeated(const RegressorParams& params, const FeatureStore& store,
                               std::span<const std::string> video_ids, std::size_t length,
                               std::size_t repeats, std::uint64_t base_seed,
                               Execution execution = Execution::parallel, unsigned threads = 0);

/// Column means.
std::vector<double> average_predictions(const PredictionSet& predictions);
VideoPredictions averaged(const PredictionSet& predictions);

/// Mean RMSE over all unordered pairs of repeats. Needs at least two repeats.
double pairwise_consistency_rmse(const PredictionSet& predictions);

std::vector<double> ensemble_weighted(std::span<const double> a, std::span<const double> b,
                                      const EnsembleConfig& config = {});
VideoPredictions ensemble_weighted(const VideoPredictions& a, const VideoPredictions& b,
                                   const EnsembleConfig& config = {});

// Prediction file: CSV with header "video_id,predicted_mos", one video per line.
void write_predictions(const std::filesystem::path& path, const VideoPredictions& predictions);
VideoPredictions read_predictions(const std::filesystem::path& path);

/// Audit dump: header "repeat,<id>,<id>,..." followed by one row per repeat.
void write_prediction_matrix(const std::filesystem::path& path, const PredictionSet& predictions);

} // namespace vra
