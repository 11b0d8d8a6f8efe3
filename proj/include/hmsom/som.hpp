#pragma once

#include "hmsom/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hmsom {

enum class som_init { pca_grid, random_samples };

struct som_options {
    std::size_t rows = 7;
    std::size_t cols = 7;
    std::size_t epochs = 50;
    /// Neighbourhood width of the first epoch; 0 selects max(rows, cols) / 2.
    double sigma_start = 0.0;
    double sigma_end = 0.5;
    som_init init = som_init::pca_grid;
    std::uint64_t seed = 1;
    bool parallel = true;
};

/// Rectangular Kohonen map. Unit u sits at grid cell (u / cols, u % cols).
struct som_model {
    std::size_t rows = 0;
    std::size_t cols = 0;
    row_matrix prototypes;  // units x dimension
    som_options training;

    [[nodiscard]] std::size_t units() const noexcept { return rows * cols; }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(prototypes.cols()); }
};

struct som_training_report {
    double initial_quantization_error = 0.0;
    double final_quantization_error = 0.0;
    warning_list warnings;
};

/// Batch SOM with a Gaussian neighbourhood whose width decays linearly from
/// sigma_start to sigma_end over the epochs.
[[nodiscard]] som_model train_som(const row_matrix& data, const som_options& options,
                                  som_training_report* report = nullptr);

/// Regular grid spanning +-2 standard deviations along the first two principal
/// axes (rows follow the first axis), or distinct random samples.
[[nodiscard]] row_matrix initialize_prototypes(const row_matrix& data, const som_options& options);

/// h(u, b) = exp(-|g_u - g_b|^2 / (2 sigma^2)); sigma = 0 gives the identity.
[[nodiscard]] row_matrix neighborhood_matrix(std::size_t rows, std::size_t cols, double sigma);

/// Neighbourhood width used at `epoch` (0-based).
[[nodiscard]] double neighborhood_width(const som_options& options, std::size_t epoch);

/// One batch epoch in place: assign every sample to its BMU, then move each
/// prototype to the neighbourhood-weighted mean.
void batch_epoch(const row_matrix& data, row_matrix& prototypes, const row_matrix& neighborhood, bool parallel = true);

struct map_distance {
    double distance = 0.0;  // squared Euclidean distance to the nearest prototype
    std::size_t bmu = 0;
};

[[nodiscard]] map_distance distance_to_map(std::span<const double> x, const som_model& model);
[[nodiscard]] std::vector<map_distance> distances_to_map(const row_matrix& data, const som_model& model,
                                                         bool parallel = true);
[[nodiscard]] double quantization_error(const row_matrix& data, const som_model& model);

enum class plane_format { pgm, svg, both };

struct plane_overlay {
    std::vector<std::size_t> bmu;
    std::vector<bool> anomaly;  // empty: every sample is drawn as healthy
};

/// Gray level per unit for one variable: the minimum prototype value maps to
/// 255 (white), the maximum to 0 (black), a constant plane to 128.
[[nodiscard]] std::vector<std::uint8_t> plane_gray_levels(const som_model& model, std::size_t variable);

/// Writes one component plane per variable as `<name>.pgm` and/or `<name>.svg`
/// and returns the written paths. The SVG variant carries the optional overlay:
/// per cell, a green dot for healthy and a red dot for anomalous samples,
/// with area proportional to the count.
std::vector<std::filesystem::path> export_component_planes(const som_model& model,
                                                           const std::vector<std::string>& names,
                                                           const std::filesystem::path& directory,
                                                           plane_format format = plane_format::both,
                                                           const plane_overlay* overlay = nullptr,
                                                           std::size_t cell_pixels = 16);

}  // namespace hmsom
