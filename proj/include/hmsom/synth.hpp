#pragma once

#include "hmsom/correction.hpp"
#include "hmsom/schema.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace hmsom {

/// Synthetic cruise-data generator with known ground truth.
///
/// Environmental variables (schema order ALT, Temp3, SP, N1) are drawn from a
/// Gaussian mixture with one component per regime. Operational variables follow
/// the fixed-effects correction model of `true_correction`, evaluated at the
/// true regime, plus i.i.d. Gaussian noise.
struct generator_config {
    std::size_t n_engines = 16;
    std::size_t n_rows = 2472;
    std::size_t regimes = 5;
    std::vector<double> regime_weights;               // empty: uniform
    std::vector<Eigen::VectorXd> context_means;       // one per regime
    std::vector<Eigen::MatrixXd> context_covariances;  // one per regime
    /// Engines 1..n_engines; `clusters` must equal `regimes`.
    correction_model true_correction;
    double noise_std = 0.05;
    std::vector<double> age_start;  // per engine
    double age_rate = 1.5;          // AGE increment per timestamp step
    /// 1-based engine ids that receive rows; empty means all.
    std::vector<engine_id> active_engines;
    timestamp time_offset = 0;
    std::uint64_t seed = 1;
};

/// Five well-separated regimes and random true coefficients drawn from
/// `coefficient_seed`. Draws of the table itself use `seed`.
[[nodiscard]] generator_config default_generator_config(std::uint64_t seed = 1, std::uint64_t coefficient_seed = 2024);

struct ground_truth {
    std::vector<std::size_t> regimes;  // per row of the generated table
    correction_model coefficients;
    row_matrix noise;  // rows x operational variables
};

struct generated_data {
    data_table table;
    ground_truth truth;
};

/// Throws usage_error for inconsistent configs and data_error for covariances
/// that are not symmetric positive definite.
[[nodiscard]] generated_data generate(const generator_config& config);

}  // namespace hmsom
