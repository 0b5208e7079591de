#include "vra/inference.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "vra/errors.hpp"
#include "vra/pooling.hpp"

namespace vra {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_id_for_csv(const std::string& id) {
    if (id.find_first_of(",\n\r") != std::string::npos) {
        throw DataError("video_id '" + id + "' cannot be written to a CSV record");
    }
}

} // namespace

double predict_video(const RegressorParams& params, const FrameFeatureMatrix& video, std::size_t length,
                     RngStream& rng) {
    const auto sample = sample_sequence(video, length, rng);
    const auto pooled = pool_concat(sample.features);
    return forward_masked(params, pooled.concat, nullptr);
}

double predict_video(const RegressorParams& params, const FeatureStore& store, std::string_view video_id,
                     std::size_t length, RngStream& rng) {
    return predict_video(params, store.load(video_id), length, rng);
}

PredictionSet predict_repeated(const RegressorParams& params, std::span<const FrameFeatureMatrix> videos,
                               std::size_t length, std::size_t repeats, std::uint64_t base_seed, Execution execution,
                               unsigned threads) {
    if (repeats < 1) {
        throw ConfigError("predict_repeated: repeats must be at least 1");
    }
    for (const auto& v : videos) {
        if (v.n_frames() < length) {
            throw TooFewFrames(v.video_id, v.n_frames(), length);
        }
    }

    PredictionSet out;
    out.repeats = repeats;
    out.base_seed = base_seed;
    out.values = Matrix<double>(repeats, videos.size());
    for (const auto& v : videos) {
        out.video_ids.push_back(v.video_id);
    }

    const std::size_t n_cells = repeats * videos.size();
    const auto compute_cell = [&](std::size_t cell) {
        const std::size_t r = cell / videos.size();
        const std::size_t c = cell % videos.size();
        auto rng = make_rng(base_seed, static_cast<std::uint32_t>(r), videos[c].video_id);
        out.values(r, c) = predict_video(params, videos[c], length, rng);
    };

    if (execution == Execution::sequential || n_cells < 2) {
        for (std::size_t cell = 0; cell < n_cells; ++cell) {
            compute_cell(cell);
        }
        return out;
    }

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_cells));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_cell = n_cells;
    std::exception_ptr error;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t cell = next.fetch_add(1); cell < n_cells; cell = next.fetch_add(1)) {
                    try {
                        compute_cell(cell);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (cell < error_cell) {
                            error_cell = cell;
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

PredictionSet predict_repeated(const RegressorParams& params, const FeatureStore& store,
                               std::span<const std::string> video_ids, std::size_t length, std::size_t repeats,
                               std::uint64_t base_seed, Execution execution, unsigned threads) {
    const auto videos = store.load_many(video_ids);
    return predict_repeated(params, videos, length, repeats, base_seed, execution, threads);
}

std::vector<double> average_predictions(const PredictionSet& predictions) {
    const auto& m = predictions.values;
    if (m.rows() < 1) {
        throw DataError("average_predictions: no repeats");
    }
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] += row[c];
        }
    }
    const double inv = 1.0 / static_cast<double>(m.rows());
    for (auto& v : out) {
        v *= inv;
    }
    return out;
}

VideoPredictions averaged(const PredictionSet& predictions) {
    return VideoPredictions{predictions.video_ids, average_predictions(predictions)};
}

double pairwise_consistency_rmse(const PredictionSet& predictions) {
    const auto& m = predictions.values;
    if (m.rows() < 2) {
        throw DataError("pairwise_consistency_rmse: needs at least 2 repeats");
    }
    if (m.cols() == 0) {
        throw DataError("pairwise_consistency_rmse: no videos");
    }
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < m.rows(); ++a) {
        for (std::size_t b = a + 1; b < m.rows(); ++b) {
            const auto ra = m.row(a);
            const auto rb = m.row(b);
            double ss = 0.0;
            for (std::size_t c = 0; c < m.cols(); ++c) {
                const double d = ra[c] - rb[c];
                ss += d * d;
            }
            total += std::sqrt(ss / static_cast<double>(m.cols()));
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

std::vector<double> ensemble_weighted(std::span<const double> a, std::span<const double> b,
                                      const EnsembleConfig& config) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("ensemble: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                " predictions");
    }
    if (!std::isfinite(config.weight_a) || !std::isfinite(config.weight_b)) {
        throw ConfigError("ensemble weights must be finite");
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = config.weight_a * a[i] + config.weight_b * b[i];
    }
    return out;
}

VideoPredictions ensemble_weighted(const VideoPredictions& a, const VideoPredictions& b,
                                   const EnsembleConfig& config) {
    if (a.video_ids.size() != b.video_ids.size()) {
        throw DimensionMismatch("ensemble: prediction lists have different lengths");
    }
    for (std::size_t i = 0; i < a.video_ids.size(); ++i) {
        if (a.video_ids[i] != b.video_ids[i]) {
            throw DataError("ensemble: video order differs at line " + std::to_string(i + 1) + " ('" +
                            a.video_ids[i] + "' vs '" + b.video_ids[i] + "')");
        }
    }
    return VideoPredictions{a.video_ids, ensemble_weighted(a.mos, b.mos, config)};
}

void write_predictions(const std::filesystem::path& path, const VideoPredictions& predictions) {
    if (predictions.video_ids.size() != predictions.mos.size()) {
        throw DimensionMismatch("prediction ids and values differ in length");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << "video_id,predicted_mos\n";
    for (std::size_t i = 0; i < predictions.mos.size(); ++i) {
        check_id_for_csv(predictions.video_ids[i]);
        out << predictions.video_ids[i] << ',' << format_double(predictions.mos[i]) << '\n';
    }
}

VideoPredictions read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw NotFoundError("cannot open predictions '" + path.string() + "'");
    }
    VideoPredictions out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || (line_no == 1 && line.rfind("video_id,", 0) == 0)) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'video_id,predicted_mos'");
        }
        double v = 0.0;
        const char* first = line.data() + comma + 1;
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad predicted_mos value");
        }
        out.video_ids.push_back(line.substr(0, comma));
        out.mos.push_back(v);
    }
    return out;
}

void write_prediction_matrix(const std::filesystem::path& path, const PredictionSet& predictions) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << "repeat";
    for (const auto& id : predictions.video_ids) {
        check_id_for_csv(id);
        out << ',' << id;
    }
    out << '\n';
    for (std::size_t r = 0; r < predictions.values.rows(); ++r) {
        out << r;
        for (double v : predictions.values.row(r)) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

} // namespace vra
