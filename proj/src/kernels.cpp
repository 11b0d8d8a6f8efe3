#include "hmsom/kernels.hpp"

#include <cmath>
#include <numbers>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hmsom::kernels {

nearest_unit nearest(const double* x, const row_matrix& prototypes) noexcept {
    const auto d = static_cast<std::size_t>(prototypes.cols());
    nearest_unit best{squared_distance(x, prototypes.row(0).data(), d), 0};
    for (Eigen::Index u = 1; u < prototypes.rows(); ++u) {
        const double dist = squared_distance(x, prototypes.row(u).data(), d);
        if (dist < best.distance) {
            best = {dist, static_cast<std::size_t>(u)};
        }
    }
    return best;
}

void find_bmus_serial(const row_matrix& data, const row_matrix& prototypes, std::span<nearest_unit> out) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = nearest(data.row(i).data(), prototypes);
    }
}

void find_bmus_parallel(const row_matrix& data, const row_matrix& prototypes, std::span<nearest_unit> out) {
    const Eigen::Index n = data.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = nearest(data.row(i).data(), prototypes);
    }
}

namespace {

struct unit_sums {
    row_matrix sum;
    std::vector<double> count;
};

unit_sums accumulate(const row_matrix& data, std::span<const nearest_unit> bmus, Eigen::Index units) {
    unit_sums s{row_matrix::Zero(units, data.cols()), std::vector<double>(static_cast<std::size_t>(units), 0.0)};
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto b = static_cast<Eigen::Index>(bmus[static_cast<std::size_t>(i)].unit);
        s.sum.row(b) += data.row(i);
        s.count[static_cast<std::size_t>(b)] += 1.0;
    }
    return s;
}

void update_unit(Eigen::Index u, const unit_sums& s, const row_matrix& h, row_matrix& prototypes) {
    const Eigen::Index units = h.cols();
    const Eigen::Index d = prototypes.cols();
    double weight = 0.0;
    for (Eigen::Index b = 0; b < units; ++b) {
        weight += h(u, b) * s.count[static_cast<std::size_t>(b)];
    }
    if (weight < 1e-12) {
        return;
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        double num = 0.0;
        for (Eigen::Index b = 0; b < units; ++b) {
            num += h(u, b) * s.sum(b, j);
        }
        prototypes(u, j) = num / weight;
    }
}

}  // namespace

void batch_update_serial(const row_matrix& data, std::span<const nearest_unit> bmus, const row_matrix& neighborhood,
                         row_matrix& prototypes) {
    const auto s = accumulate(data, bmus, prototypes.rows());
    for (Eigen::Index u = 0; u < prototypes.rows(); ++u) {
        update_unit(u, s, neighborhood, prototypes);
    }
}

void batch_update_parallel(const row_matrix& data, std::span<const nearest_unit> bmus, const row_matrix& neighborhood,
                           row_matrix& prototypes) {
    const auto s = accumulate(data, bmus, prototypes.rows());
    const Eigen::Index units = prototypes.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index u = 0; u < units; ++u) {
        update_unit(u, s, neighborhood, prototypes);
    }
}

namespace {

void log_terms_row(const row_matrix& data, Eigen::Index i, std::span<const gaussian_component> components,
                   Eigen::MatrixXd& out) {
    const Eigen::Index d = data.cols();
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    Eigen::VectorXd diff(d);
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        diff = data.row(i).transpose() - c.mean;
        const Eigen::VectorXd z = c.chol.triangularView<Eigen::Lower>().solve(diff);
        const double log_det = 2.0 * c.chol.diagonal().array().log().sum();
        out(i, static_cast<Eigen::Index>(k)) =
            c.log_weight - 0.5 * (static_cast<double>(d) * log_2pi + log_det + z.squaredNorm());
    }
}

}  // namespace

void mixture_log_terms_serial(const row_matrix& data, std::span<const gaussian_component> components,
                              Eigen::MatrixXd& out) {
    out.resize(data.rows(), static_cast<Eigen::Index>(components.size()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        log_terms_row(data, i, components, out);
    }
}

void mixture_log_terms_parallel(const row_matrix& data, std::span<const gaussian_component> components,
                                Eigen::MatrixXd& out) {
    out.resize(data.rows(), static_cast<Eigen::Index>(components.size()));
    const Eigen::Index n = data.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        log_terms_row(data, i, components, out);
    }
}

int thread_count() noexcept {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace hmsom::kernels
