#include "vra/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "vra/errors.hpp"

namespace vra {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_size, const char* what) {
    if (x.size() != y.size()) {
        throw DimensionMismatch(std::string(what) + ": vectors have lengths " + std::to_string(x.size()) + " and " +
                                std::to_string(y.size()));
    }
    if (x.size() < min_size) {
        throw DataError(std::string(what) + ": needs at least " + std::to_string(min_size) + " samples");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
        throw NonFiniteError(std::string(what) + ": non-finite input");
    }
}

double pearson(std::span<const double> x, std::span<const double> y, const char* what) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateInput(std::string(what) + ": zero variance input");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace

double plcc(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 2, "plcc");
    return pearson(x, y, "plcc");
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) {
            ++j;
        }
        // Positions i..j-1 hold ranks i+1..j; their mean is (i + 1 + j) / 2.
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

double srcc(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 2, "srcc");
    const auto rx = fractional_ranks(x);
    const auto ry = fractional_ranks(y);
    return pearson(rx, ry, "srcc");
}

double rmse_metric(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 1, "rmse");
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(x.size()));
}

SetMetrics compute_set_metrics(std::span<const double> predicted, std::span<const double> labels) {
    return SetMetrics{plcc(predicted, labels), srcc(predicted, labels), rmse_metric(predicted, labels),
                      predicted.size()};
}

double final_score(std::span<const SetMetrics> per_set) {
    if (per_set.empty()) {
        throw DataError("final_score: no test sets");
    }
    double total = 0.0;
    for (const auto& s : per_set) {
        total += 0.5 * (s.plcc + s.srcc);
    }
    return total / static_cast<double>(per_set.size());
}

MetricsReport MetricsReport::build(std::vector<std::string> set_names, std::vector<SetMetrics> sets) {
    if (set_names.size() != sets.size()) {
        throw DimensionMismatch("metrics report: names and sets differ in count");
    }
    MetricsReport report;
    report.final_score = vra::final_score(sets);
    report.set_names = std::move(set_names);
    report.sets = std::move(sets);
    return report;
}

std::string MetricsReport::to_text() const {
    std::string out = "set                      n        plcc      srcc      rmse\n";
    char line[160];
    for (std::size_t i = 0; i < sets.size(); ++i) {
        std::snprintf(line, sizeof line, "%-20s %6zu    %.4f    %.4f    %.4f\n", set_names[i].c_str(), sets[i].n,
                      sets[i].plcc, sets[i].srcc, sets[i].rmse);
        out += line;
    }
    std::snprintf(line, sizeof line, "final_score %.4f\n", final_score);
    out += line;
    return out;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < sets.size(); ++i) {
        arr.push_back({{"name", set_names[i]},
                       {"n", sets[i].n},
                       {"plcc", sets[i].plcc},
                       {"srcc", sets[i].srcc},
                       {"rmse", sets[i].rmse}});
    }
    j["sets"] = std::move(arr);
    j["final_score"] = final_score;
    return j.dump(2);
}

} // namespace vra
