#include "vra/pooling.hpp"

#include <cmath>
#include <string>

#include "vra/errors.hpp"

namespace vra {

namespace {

void require_finite(const Matrix<double>& frames) {
    for (std::size_t i = 0; i < frames.rows(); ++i) {
        const auto row = frames.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!std::isfinite(row[j])) {
                throw NonFiniteError("pooling input has a non-finite value at frame " + std::to_string(i) +
                                     ", dim " + std::to_string(j));
            }
        }
    }
}

} // namespace

std::vector<double> pool_mean(const Matrix<double>& frames) {
    if (frames.rows() == 0 || frames.cols() == 0) {
        throw DataError("pool_mean: empty frame window");
    }
    require_finite(frames);
    std::vector<double> mean(frames.cols(), 0.0);
    for (std::size_t i = 0; i < frames.rows(); ++i) {
        const auto row = frames.row(i);
        for (std::size_t j = 0; j < mean.size(); ++j) {
            mean[j] += row[j];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(frames.rows());
    for (auto& m : mean) {
        m *= inv_n;
    }
    return mean;
}

std::vector<double> pool_std(const Matrix<double>& frames) {
    if (frames.rows() < 2) {
        throw UndefinedStd("pool_std: sample standard deviation needs at least 2 frames, got " +
                           std::to_string(frames.rows()));
    }
    const auto mean = pool_mean(frames);
    std::vector<double> ss(frames.cols(), 0.0);
    for (std::size_t i = 0; i < frames.rows(); ++i) {
        const auto row = frames.row(i);
        for (std::size_t j = 0; j < ss.size(); ++j) {
            const double d = row[j] - mean[j];
            ss[j] += d * d;
        }
    }
    const double denom = static_cast<double>(frames.rows() - 1);
    for (auto& s : ss) {
        s = std::sqrt(s / denom);
    }
    return ss;
}

PooledFeature pool_concat(const Matrix<double>& frames) {
    PooledFeature out;
    out.std = pool_std(frames);
    out.mean = pool_mean(frames);
    out.n = frames.rows();
    out.concat.reserve(2 * out.mean.size());
    out.concat.insert(out.concat.end(), out.mean.begin(), out.mean.end());
    out.concat.insert(out.concat.end(), out.std.begin(), out.std.end());
    return out;
}

} // namespace vra
