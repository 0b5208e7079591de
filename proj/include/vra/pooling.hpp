#pragma once

#include <cstddef>
#include <vector>

#include "vra/matrix.hpp"

namespace vra {

/// Video-level feature: per-dimension mean and sample standard deviation of
/// the frame window, concatenated as [mean..., std...].
struct PooledFeature {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<double> concat;
    std::size_t n = 0;
};

std::vector<double> pool_mean(const Matrix<double>& frames);

/// Bessel-corrected (n - 1) standard deviation per column, two-pass.
/// Throws UndefinedStd for fewer than two rows.
std::vector<double> pool_std(const Matrix<double>& frames);

PooledFeature pool_concat(const Matrix<double>& frames);

} // namespace vra
