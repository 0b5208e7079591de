#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vra {

/// Pearson correlation, clamped to [-1, 1]. Throws DegenerateInput when
/// either vector has zero variance.
double plcc(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Pearson correlation of fractional ranks.
double srcc(std::span<const double> x, std::span<const double> y);

double rmse_metric(std::span<const double> x, std::span<const double> y);

struct SetMetrics {
    double plcc = 0.0;
    double srcc = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

SetMetrics compute_set_metrics(std::span<const double> predicted, std::span<const double> labels);

/// Unweighted mean over test sets of (plcc + srcc) / 2.
double final_score(std::span<const SetMetrics> per_set);

struct MetricsReport {
    std::vector<std::string> set_names;
    std::vector<SetMetrics> sets;
    double final_score = 0.0;

    static MetricsReport build(std::vector<std::string> set_names, std::vector<SetMetrics> sets);

    std::string to_text() const;
    std::string to_json() const;
};

} // namespace vra
