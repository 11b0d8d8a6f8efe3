#include "hmsom/detect.hpp"

#include "hmsom/error.hpp"

#include <algorithm>

namespace hmsom {

std::size_t detector_thresholds::fallback_count() const noexcept {
    return static_cast<std::size_t>(std::count(local_upper.begin(), local_upper.end(), std::nullopt));
}

double detector_thresholds::resolved_local(std::size_t unit) const {
    if (unit >= local_upper.size()) {
        throw data_error("unit " + std::to_string(unit) + " has no local threshold");
    }
    return local_upper[unit].value_or(global_upper);
}

double percentile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw usage_error("percentile of an empty list");
    }
    if (!(p > 0.0 && p <= 100.0)) {
        throw usage_error("percentile must lie in (0, 100]");
    }
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) / 100.0));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::vector<double> work(values.begin(), values.end());
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(rank - 1), work.end());
    return work[rank - 1];
}

detector_thresholds calibrate(std::span<const map_distance> training, std::size_t units, double p,
                              std::size_t min_local_count) {
    if (training.empty()) {
        throw usage_error("cannot calibrate on an empty set of distances");
    }
    detector_thresholds t;
    t.percentile = p;
    t.min_local_count = min_local_count;

    std::vector<double> all;
    std::vector<std::vector<double>> per_unit(units);
    all.reserve(training.size());
    for (const auto& d : training) {
        if (d.bmu >= units) {
            throw data_error("distance refers to unit " + std::to_string(d.bmu) + " of a " + std::to_string(units) +
                             "-unit map");
        }
        all.push_back(d.distance);
        per_unit[d.bmu].push_back(d.distance);
    }
    t.global_upper = percentile(all, p);
    t.local_upper.resize(units);
    t.local_count.resize(units);
    for (std::size_t u = 0; u < units; ++u) {
        t.local_count[u] = per_unit[u].size();
        if (!per_unit[u].empty() && per_unit[u].size() >= min_local_count) {
            t.local_upper[u] = percentile(per_unit[u], p);
        }
    }
    return t;
}

verdict decide(const map_distance& d, const detector_thresholds& thresholds, detection_mode mode) {
    if (!thresholds.calibrated()) {
        throw data_error("detector thresholds are not calibrated");
    }
    verdict v;
    v.distance = d.distance;
    v.bmu = d.bmu;
    v.rule = mode;
    v.threshold = mode == detection_mode::global ? thresholds.global_upper : thresholds.resolved_local(d.bmu);
    v.healthy = d.distance >= 0.0 && d.distance <= v.threshold;
    return v;
}

verdict decide(std::span<const double> x, const som_model& som, const detector_thresholds& thresholds,
               detection_mode mode) {
    return decide(distance_to_map(x, som), thresholds, mode);
}

}  // namespace hmsom
