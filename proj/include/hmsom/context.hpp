#pragma once

#include "hmsom/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hmsom {

enum class context_method { gmm_em, ward_hac };
enum class covariance_type { full, diagonal };

struct context_options {
    std::size_t clusters = 5;
    context_method method = context_method::gmm_em;
    covariance_type covariance = covariance_type::full;
    std::uint64_t seed = 1;
    std::size_t max_iterations = 500;
    double tolerance = 1e-8;  // stop when the log-likelihood gain drops below this
    /// EM runs from independent k-means++ seedings; the highest final
    /// log-likelihood is kept.
    std::size_t restarts = 4;
};

struct context_component {
    double weight = 0.0;
    Eigen::VectorXd mean;        // centroid for Ward clusters
    Eigen::MatrixXd covariance;  // empty for Ward clusters
};

/// Clustering of the environmental variables into operating contexts.
struct context_model {
    context_method method = context_method::gmm_em;
    covariance_type covariance = covariance_type::full;
    std::vector<std::string> variables;
    std::vector<context_component> components;
    double explained_variance = 0.0;

    [[nodiscard]] std::size_t clusters() const noexcept { return components.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept {
        return components.empty() ? 0 : static_cast<std::size_t>(components.front().mean.size());
    }
};

struct context_fit {
    context_model model;
    std::vector<std::size_t> labels;     // training assignments
    std::vector<double> log_likelihood;  // per EM iteration, GMM only
    std::vector<double> merge_costs;     // Ward SSE increase per merge, in merge order
    std::size_t iterations = 0;
    bool converged = true;
};

/// GMM: k-means++ seeds give hard starting responsibilities, then EM with a
/// ridge of 1e-6 * trace / dim added to each covariance. Ward: agglomerative clustering cut
/// at `clusters`, with O(n^2) memory.
[[nodiscard]] context_fit fit_context(const row_matrix& env, const context_options& options,
                                      std::vector<std::string> variables = {});

/// Posterior responsibilities of a GMM context model; they sum to one.
[[nodiscard]] Eigen::VectorXd context_posterior(std::span<const double> sample, const context_model& model);

/// Posterior argmax (GMM) or nearest centroid (Ward); ties go to the lowest index.
[[nodiscard]] std::size_t assign_context(std::span<const double> sample, const context_model& model);
[[nodiscard]] std::vector<std::size_t> assign_context(const row_matrix& samples, const context_model& model);

/// 1 - within-cluster SS / total SS.
[[nodiscard]] double explained_variance(const row_matrix& data, std::span<const std::size_t> labels,
                                        std::size_t clusters);

/// Explained variance for K = 1..k_max with the given method.
[[nodiscard]] std::vector<double> explained_variance_scan(const row_matrix& env, context_options options,
                                                          std::size_t k_max = 10);

}  // namespace hmsom
