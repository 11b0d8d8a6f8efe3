#pragma once

#include "hmsom/som.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace hmsom {

enum class detection_mode { global, local };

/// Upper limits of the normality intervals [0, upper] on distance to the map.
struct detector_thresholds {
    double global_upper = std::numeric_limits<double>::quiet_NaN();
    /// Per unit; std::nullopt marks a unit with too few training samples,
    /// which falls back to the global limit.
    std::vector<std::optional<double>> local_upper;
    std::vector<std::size_t> local_count;
    double percentile = 99.0;
    std::size_t min_local_count = 10;

    [[nodiscard]] bool calibrated() const noexcept { return std::isfinite(global_upper) && !local_upper.empty(); }
    [[nodiscard]] std::size_t fallback_count() const noexcept;
    [[nodiscard]] double resolved_local(std::size_t unit) const;
};

/// Nearest-rank percentile: the ceil(p n / 100)-th smallest value (1-based).
[[nodiscard]] double percentile(std::span<const double> values, double p);

[[nodiscard]] detector_thresholds calibrate(std::span<const map_distance> training, std::size_t units,
                                            double p = 99.0, std::size_t min_local_count = 10);

struct verdict {
    double distance = 0.0;
    std::size_t bmu = 0;
    bool healthy = true;
    detection_mode rule = detection_mode::global;
    double threshold = 0.0;
};

/// Healthy iff distance <= threshold (closed interval).
[[nodiscard]] verdict decide(const map_distance& d, const detector_thresholds& thresholds, detection_mode mode);
[[nodiscard]] verdict decide(std::span<const double> x, const som_model& som, const detector_thresholds& thresholds,
                             detection_mode mode);

}  // namespace hmsom
