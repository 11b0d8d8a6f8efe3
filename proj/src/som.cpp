#include "hmsom/som.hpp"

#include "hmsom/error.hpp"
#include "hmsom/kernels.hpp"
#include "hmsom/plot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hmsom {

namespace {

std::vector<double> linspace(std::size_t n, double lo, double hi) {
    if (n == 1) {
        return {0.5 * (lo + hi)};
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

void check_input(const row_matrix& data) {
    if (data.rows() == 0 || data.cols() == 0) {
        throw data_error("SOM training data is empty");
    }
    if (!data.allFinite()) {
        throw data_error("SOM training data contains non-finite values");
    }
}

}  // namespace

row_matrix initialize_prototypes(const row_matrix& data, const som_options& options) {
    check_input(data);
    const auto units = static_cast<Eigen::Index>(options.rows * options.cols);
    const Eigen::Index d = data.cols();
    row_matrix protos(units, d);

    if (options.init == som_init::random_samples) {
        std::mt19937_64 rng(options.seed);
        const Eigen::Index n = data.rows();
        if (n < units) {
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            for (Eigen::Index u = 0; u < units; ++u) {
                protos.row(u) = data.row(pick(rng));
            }
            return protos;
        }
        // Partial Fisher-Yates: distinct samples.
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        for (Eigen::Index u = 0; u < units; ++u) {
            std::uniform_int_distribution<Eigen::Index> pick(u, n - 1);
            std::swap(idx[static_cast<std::size_t>(u)], idx[static_cast<std::size_t>(pick(rng))]);
            protos.row(u) = data.row(idx[static_cast<std::size_t>(u)]);
        }
        return protos;
    }

    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centred = data.rowwise() - mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(std::max<Eigen::Index>(data.rows() - 1, 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // Eigenvalues ascend; take the two largest.
    Eigen::VectorXd axis1 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd axis2 = Eigen::VectorXd::Zero(d);
    const auto spread = [&](Eigen::Index k) { return 2.0 * std::sqrt(std::max(eig.eigenvalues()(k), 0.0)); };
    axis1 = eig.eigenvectors().col(d - 1) * spread(d - 1);
    if (d > 1) {
        axis2 = eig.eigenvectors().col(d - 2) * spread(d - 2);
    }
    const bool rows_long = options.rows >= options.cols;
    const auto along_rows = linspace(options.rows, -1.0, 1.0);
    const auto along_cols = linspace(options.cols, -1.0, 1.0);
    for (std::size_t r = 0; r < options.rows; ++r) {
        for (std::size_t c = 0; c < options.cols; ++c) {
            const double a = rows_long ? along_rows[r] : along_cols[c];
            const double b = rows_long ? along_cols[c] : along_rows[r];
            protos.row(static_cast<Eigen::Index>(r * options.cols + c)) =
                mean + a * axis1.transpose() + b * axis2.transpose();
        }
    }
    return protos;
}

row_matrix neighborhood_matrix(std::size_t rows, std::size_t cols, double sigma) {
    const auto units = static_cast<Eigen::Index>(rows * cols);
    if (sigma <= 0.0) {
        return row_matrix::Identity(units, units);
    }
    row_matrix h(units, units);
    const double denom = 2.0 * sigma * sigma;
    for (Eigen::Index u = 0; u < units; ++u) {
        for (Eigen::Index b = 0; b < units; ++b) {
            const double dr = static_cast<double>(u / static_cast<Eigen::Index>(cols)) -
                              static_cast<double>(b / static_cast<Eigen::Index>(cols));
            const double dc = static_cast<double>(u % static_cast<Eigen::Index>(cols)) -
                              static_cast<double>(b % static_cast<Eigen::Index>(cols));
            h(u, b) = std::exp(-(dr * dr + dc * dc) / denom);
        }
    }
    return h;
}

double neighborhood_width(const som_options& options, std::size_t epoch) {
    const double start =
        options.sigma_start > 0.0 ? options.sigma_start : static_cast<double>(std::max(options.rows, options.cols)) / 2.0;
    if (options.epochs <= 1) {
        return start;
    }
    const double t = static_cast<double>(epoch) / static_cast<double>(options.epochs - 1);
    return start + (options.sigma_end - start) * t;
}

void batch_epoch(const row_matrix& data, row_matrix& prototypes, const row_matrix& neighborhood, bool parallel) {
    std::vector<kernels::nearest_unit> bmus(static_cast<std::size_t>(data.rows()));
    if (parallel) {
        kernels::find_bmus_parallel(data, prototypes, bmus);
        kernels::batch_update_parallel(data, bmus, neighborhood, prototypes);
    } else {
        kernels::find_bmus_serial(data, prototypes, bmus);
        kernels::batch_update_serial(data, bmus, neighborhood, prototypes);
    }
}

som_model train_som(const row_matrix& data, const som_options& options, som_training_report* report) {
    if (options.rows == 0 || options.cols == 0) {
        throw usage_error("SOM grid must have at least one row and one column");
    }
    check_input(data);
    som_model model;
    model.rows = options.rows;
    model.cols = options.cols;
    model.training = options;
    model.prototypes = initialize_prototypes(data, options);

    if (report) {
        report->initial_quantization_error = quantization_error(data, model);
        if (static_cast<std::size_t>(data.rows()) < model.units()) {
            report->warnings.push_back("SOM has " + std::to_string(model.units()) + " units but only " +
                                       std::to_string(data.rows()) + " training samples");
        }
    }
    for (std::size_t e = 0; e < options.epochs; ++e) {
        const auto h = neighborhood_matrix(options.rows, options.cols, neighborhood_width(options, e));
        batch_epoch(data, model.prototypes, h, options.parallel);
    }
    if (report) {
        report->final_quantization_error = quantization_error(data, model);
    }
    return model;
}

map_distance distance_to_map(std::span<const double> x, const som_model& model) {
    if (x.size() != model.dimension()) {
        throw data_error("vector has " + std::to_string(x.size()) + " values, map prototypes have " +
                         std::to_string(model.dimension()));
    }
    if (model.units() == 0) {
        throw data_error("map has no units");
    }
    const auto n = kernels::nearest(x.data(), model.prototypes);
    return {n.distance, n.unit};
}

std::vector<map_distance> distances_to_map(const row_matrix& data, const som_model& model, bool parallel) {
    if (static_cast<std::size_t>(data.cols()) != model.dimension() && data.rows() > 0) {
        throw data_error("data has " + std::to_string(data.cols()) + " columns, map prototypes have " +
                         std::to_string(model.dimension()));
    }
    std::vector<kernels::nearest_unit> bmus(static_cast<std::size_t>(data.rows()));
    if (parallel) {
        kernels::find_bmus_parallel(data, model.prototypes, bmus);
    } else {
        kernels::find_bmus_serial(data, model.prototypes, bmus);
    }
    std::vector<map_distance> out;
    out.reserve(bmus.size());
    for (const auto& b : bmus) {
        out.push_back({b.distance, b.unit});
    }
    return out;
}

double quantization_error(const row_matrix& data, const som_model& model) {
    if (data.rows() == 0) {
        throw data_error("quantization error of an empty set");
    }
    const auto d = distances_to_map(data, model);
    double sum = 0.0;
    for (const auto& x : d) {
        sum += x.distance;
    }
    return sum / static_cast<double>(d.size());
}

std::vector<std::uint8_t> plane_gray_levels(const som_model& model, std::size_t variable) {
    const auto col = model.prototypes.col(static_cast<Eigen::Index>(variable));
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    std::vector<std::uint8_t> out(model.units());
    for (std::size_t u = 0; u < out.size(); ++u) {
        if (!(hi > lo)) {
            out[u] = 128;
        } else {
            const double t = (hi - col(static_cast<Eigen::Index>(u))) / (hi - lo);
            out[u] = static_cast<std::uint8_t>(std::lround(255.0 * t));
        }
    }
    return out;
}

std::vector<std::filesystem::path> export_component_planes(const som_model& model,
                                                           const std::vector<std::string>& names,
                                                           const std::filesystem::path& directory,
                                                           plane_format format, const plane_overlay* overlay,
                                                           std::size_t cell_pixels) {
    if (names.size() != model.dimension()) {
        throw usage_error("need one name per prototype dimension");
    }
    if (cell_pixels == 0) {
        throw usage_error("cell size must be positive");
    }
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw data_error("cannot create '" + directory.string() + "': " + ec.message());
    }

    std::vector<std::size_t> healthy(model.units(), 0);
    std::vector<std::size_t> anomalous(model.units(), 0);
    if (overlay) {
        for (std::size_t i = 0; i < overlay->bmu.size(); ++i) {
            const bool bad = i < overlay->anomaly.size() && overlay->anomaly[i];
            (bad ? anomalous : healthy).at(overlay->bmu[i]) += 1;
        }
    }
    const std::size_t max_count = std::max(*std::max_element(healthy.begin(), healthy.end()),
                                           *std::max_element(anomalous.begin(), anomalous.end()));

    std::vector<std::filesystem::path> written;
    const auto width = model.cols * cell_pixels;
    const auto height = model.rows * cell_pixels;
    for (std::size_t v = 0; v < names.size(); ++v) {
        const auto levels = plane_gray_levels(model, v);
        if (format != plane_format::svg) {
            std::vector<std::uint8_t> pixels(width * height);
            for (std::size_t y = 0; y < height; ++y) {
                for (std::size_t x = 0; x < width; ++x) {
                    pixels[y * width + x] = levels[(y / cell_pixels) * model.cols + x / cell_pixels];
                }
            }
            auto path = directory / (names[v] + ".pgm");
            plot::write_pgm(path, width, height, pixels);
            written.push_back(std::move(path));
        }
        if (format != plane_format::pgm) {
            const double cell = static_cast<double>(cell_pixels);
            std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                              "\" height=\"" + std::to_string(height + cell_pixels) + "\">\n";
            svg += "<text x=\"2\" y=\"" + plot::num(0.75 * cell, 1) + "\" font-size=\"" + plot::num(0.6 * cell, 1) +
                   "\">" + names[v] + "</text>\n";
            for (std::size_t u = 0; u < model.units(); ++u) {
                const double x = static_cast<double>(u % model.cols) * cell;
                const double y = static_cast<double>(u / model.cols + 1) * cell;
                svg += "<rect x=\"" + plot::num(x) + "\" y=\"" + plot::num(y) + "\" width=\"" + plot::num(cell) +
                       "\" height=\"" + plot::num(cell) + "\" fill=\"" + plot::gray_hex(levels[u]) +
                       "\" stroke=\"#808080\" stroke-width=\"0.5\"/>\n";
                auto dot = [&](std::size_t count, double cx, const char* colour) {
                    if (count == 0 || max_count == 0) {
                        return;
                    }
                    const double r = 0.25 * cell * std::sqrt(static_cast<double>(count) / static_cast<double>(max_count));
                    svg += "<circle cx=\"" + plot::num(cx) + "\" cy=\"" + plot::num(y + 0.5 * cell) + "\" r=\"" +
                           plot::num(r) + "\" fill=\"" + colour + "\"/>\n";
                };
                dot(healthy[u], x + 0.3 * cell, "#00a000");
                dot(anomalous[u], x + 0.7 * cell, "#e00000");
            }
            svg += "</svg>\n";
            auto path = directory / (names[v] + ".svg");
            plot::write_text(path, svg);
            written.push_back(std::move(path));
        }
    }
    return written;
}

}  // namespace hmsom
