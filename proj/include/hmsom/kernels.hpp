#pragma once

#include "hmsom/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

/// Data-parallel inner loops.
///
/// Every kernel comes as a `*_serial` reference and a `*_parallel` OpenMP
/// version. The parallel versions only split work whose per-item arithmetic is
/// independent, so both produce bit-identical results for any thread count.
namespace hmsom::kernels {

/// Sum of squared coordinate differences, accumulated in coordinate order.
[[nodiscard]] inline double squared_distance(const double* a, const double* b, std::size_t d) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

struct nearest_unit {
    double distance = 0.0;
    std::size_t unit = 0;
};

/// Nearest prototype by squared Euclidean distance; ties go to the lowest index.
[[nodiscard]] nearest_unit nearest(const double* x, const row_matrix& prototypes) noexcept;

void find_bmus_serial(const row_matrix& data, const row_matrix& prototypes, std::span<nearest_unit> out);
void find_bmus_parallel(const row_matrix& data, const row_matrix& prototypes, std::span<nearest_unit> out);

/// One batch-SOM prototype update.
///
/// Per-unit sums and counts of the samples are formed in sample order, then
/// every unit u becomes sum_b h(u,b) S_b / sum_b h(u,b) N_b. Units whose
/// weight sum is below 1e-12 keep their prototype.
void batch_update_serial(const row_matrix& data, std::span<const nearest_unit> bmus, const row_matrix& neighborhood,
                         row_matrix& prototypes);
void batch_update_parallel(const row_matrix& data, std::span<const nearest_unit> bmus, const row_matrix& neighborhood,
                           row_matrix& prototypes);

/// Gaussian log-density terms for a mixture: out(i, k) = log w_k + log N(x_i | mean_k, L_k L_k^T).
/// `chol` holds the lower Cholesky factors.
struct gaussian_component {
    double log_weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;
};

void mixture_log_terms_serial(const row_matrix& data, std::span<const gaussian_component> components,
                              Eigen::MatrixXd& out);
void mixture_log_terms_parallel(const row_matrix& data, std::span<const gaussian_component> components,
                                Eigen::MatrixXd& out);

/// Number of threads the parallel kernels will use.
[[nodiscard]] int thread_count() noexcept;

}  // namespace hmsom::kernels
