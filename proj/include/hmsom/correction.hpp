#pragma once

#include "hmsom/schema.hpp"
#include "hmsom/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hmsom {

/// Environmental regressors with per-cluster slopes, in the order N1, Temp3, SP, ALT.
[[nodiscard]] const std::vector<std::string>& correction_regressors();
inline constexpr const char* age_variable = "AGE";

/// Coefficients of the fixed-effects model for one operational variable:
///
///   Y = mu + alpha[engine] + beta[cluster] + sum_m gamma(m, cluster) * X_m + gamma5 * AGE + eps
struct linear_effects {
    double mu = 0.0;
    std::vector<double> alpha;  // aligned with correction_model::engines
    std::vector<double> beta;   // one per cluster
    Eigen::MatrixXd gamma;      // regressors x clusters
    double gamma5 = 0.0;
};

enum class smoothing_scope { engine, global };

struct correction_model {
    std::vector<std::string> outputs;     // operational variables
    std::vector<std::string> regressors;  // X^(1)..X^(4)
    std::string age = age_variable;
    /// Sorted engine ids; engines.front() is the reference level (alpha = 0).
    std::vector<engine_id> engines;
    /// Cluster 0 is the reference level (beta = 0).
    std::size_t clusters = 0;
    std::vector<linear_effects> effects;  // one per output
    std::vector<double> residual_scale;   // one per output
    std::size_t smoothing_width = 7;
    smoothing_scope scope = smoothing_scope::engine;

    /// Linear predictor of output `k`. `x` holds the regressors in `regressors` order.
    [[nodiscard]] double predict(std::size_t k, engine_id engine, std::size_t cluster, std::span<const double> x,
                                 double age) const;
    [[nodiscard]] std::size_t engine_index(engine_id engine) const;
};

enum class residual_stage { raw, rescaled, smoothed };

/// Identifies the snapshot a residual row belongs to. For smoothed rows `time`
/// is the window centre and [window_first, window_last] the span it averaged.
struct residual_key {
    engine_id engine = 0;
    timestamp time = 0;
    timestamp window_first = 0;
    timestamp window_last = 0;

    bool operator==(const residual_key&) const = default;
};

struct residual_table {
    std::vector<std::string> names;
    std::vector<residual_key> keys;
    row_matrix values;
    residual_stage stage = residual_stage::raw;

    [[nodiscard]] std::size_t size() const noexcept { return keys.size(); }
};

/// Ordinary least squares for every operational variable on the reference-coded
/// design: intercept, engine dummies, cluster dummies, regressor x cluster
/// interactions and AGE. Solved by column-pivoted Householder QR.
///
/// Throws data_error on an empty cluster, an unknown cluster label, or a
/// rank-deficient design (the message lists the aliased columns).
[[nodiscard]] correction_model fit_correction(const data_table& table, std::span<const std::size_t> labels,
                                              std::size_t clusters);

/// Names of the design columns in the order fit_correction uses them.
[[nodiscard]] std::vector<std::string> design_column_names(const correction_model& model);

[[nodiscard]] residual_table compute_residuals(const data_table& table, std::span<const std::size_t> labels,
                                               const correction_model& model);

/// Divides by the training residual scale stored in the model.
[[nodiscard]] residual_table rescale_residuals(const residual_table& rt, const correction_model& model);

/// Centred moving average of odd width `w`. With engine scope each engine's
/// series is averaged on its own; series shorter than `w` are dropped and
/// reported through `warnings`. The first and last w/2 rows of each series are
/// trimmed.
[[nodiscard]] residual_table smooth_residuals(const residual_table& rt, std::size_t w,
                                              smoothing_scope scope = smoothing_scope::engine,
                                              warning_list* warnings = nullptr);

}  // namespace hmsom
