#include "hmsom/correction.hpp"

#include "hmsom/error.hpp"

#include <algorithm>
#include <cmath>

namespace hmsom {

const std::vector<std::string>& correction_regressors() {
    static const std::vector<std::string> names{"N1", "Temp3", "SP", "ALT"};
    return names;
}

std::size_t correction_model::engine_index(engine_id engine) const {
    auto it = std::lower_bound(engines.begin(), engines.end(), engine);
    if (it == engines.end() || *it != engine) {
        throw data_error("engine " + std::to_string(engine) + " was not seen when the correction model was fitted");
    }
    return static_cast<std::size_t>(it - engines.begin());
}

double correction_model::predict(std::size_t k, engine_id engine, std::size_t cluster, std::span<const double> x,
                                 double age_value) const {
    const auto& e = effects.at(k);
    if (cluster >= clusters) {
        throw data_error("cluster label " + std::to_string(cluster) + " out of range");
    }
    double y = e.mu + e.alpha[engine_index(engine)] + e.beta[cluster];
    for (std::size_t m = 0; m < x.size(); ++m) {
        y += e.gamma(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cluster)) * x[m];
    }
    return y + e.gamma5 * age_value;
}

namespace {

struct design_layout {
    std::size_t engines;
    std::size_t clusters;
    std::size_t regressors;

    [[nodiscard]] std::size_t alpha_col(std::size_t e) const { return e; }  // e >= 1
    [[nodiscard]] std::size_t beta_col(std::size_t k) const { return engines - 1 + k; }  // k >= 1
    [[nodiscard]] std::size_t gamma_col(std::size_t m, std::size_t k) const {
        return engines + clusters - 1 + m * clusters + k;
    }
    [[nodiscard]] std::size_t age_col() const { return engines + clusters - 1 + regressors * clusters; }
    [[nodiscard]] std::size_t width() const { return age_col() + 1; }
};

design_layout layout_of(const correction_model& m) {
    return {m.engines.size(), m.clusters, m.regressors.size()};
}

void check_labels(std::span<const std::size_t> labels, std::size_t rows, std::size_t clusters) {
    if (labels.size() != rows) {
        throw data_error("expected " + std::to_string(rows) + " cluster labels, got " + std::to_string(labels.size()));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= clusters) {
            throw data_error("row " + std::to_string(i) + ": cluster label " + std::to_string(labels[i]) +
                             " out of range for " + std::to_string(clusters) + " clusters");
        }
    }
}

}  // namespace

std::vector<std::string> design_column_names(const correction_model& model) {
    const auto lay = layout_of(model);
    std::vector<std::string> names(lay.width());
    names[0] = "mu";
    for (std::size_t e = 1; e < lay.engines; ++e) {
        names[lay.alpha_col(e)] = "alpha[engine " + std::to_string(model.engines[e]) + "]";
    }
    for (std::size_t k = 1; k < lay.clusters; ++k) {
        names[lay.beta_col(k)] = "beta[cluster " + std::to_string(k) + "]";
    }
    for (std::size_t m = 0; m < lay.regressors; ++m) {
        for (std::size_t k = 0; k < lay.clusters; ++k) {
            names[lay.gamma_col(m, k)] = "gamma[" + model.regressors[m] + ", cluster " + std::to_string(k) + "]";
        }
    }
    names[lay.age_col()] = "gamma5[" + model.age + "]";
    return names;
}

correction_model fit_correction(const data_table& table, std::span<const std::size_t> labels, std::size_t clusters) {
    if (clusters == 0) {
        throw usage_error("correction model needs at least one cluster");
    }
    check_labels(labels, table.size(), clusters);

    correction_model model;
    model.outputs = table.schema.names_with(variable_role::operational);
    model.regressors = correction_regressors();
    const auto engine_set = table.engine_ids();
    model.engines.assign(engine_set.begin(), engine_set.end());
    model.clusters = clusters;

    std::vector<std::size_t> cluster_count(clusters, 0);
    for (auto l : labels) {
        ++cluster_count[l];
    }
    for (std::size_t k = 0; k < clusters; ++k) {
        if (cluster_count[k] == 0) {
            throw data_error("cluster " + std::to_string(k) + " has no observations");
        }
    }

    const auto lay = layout_of(model);
    const auto n = static_cast<Eigen::Index>(table.size());
    const auto x = table.columns(model.regressors);
    const auto age = table.column(model.age);
    const auto y = table.columns(model.outputs);

    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(lay.width()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const auto e = model.engine_index(row.engine);
        const auto k = labels[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        if (e > 0) {
            design(i, static_cast<Eigen::Index>(lay.alpha_col(e))) = 1.0;
        }
        if (k > 0) {
            design(i, static_cast<Eigen::Index>(lay.beta_col(k))) = 1.0;
        }
        for (std::size_t m = 0; m < lay.regressors; ++m) {
            design(i, static_cast<Eigen::Index>(lay.gamma_col(m, k))) = x(i, static_cast<Eigen::Index>(m));
        }
        design(i, static_cast<Eigen::Index>(lay.age_col())) = age[static_cast<std::size_t>(i)];
    }

    // Column equilibration keeps the rank threshold meaningful when regressors
    // live on very different scales.
    Eigen::VectorXd col_norm = design.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < col_norm.size(); ++j) {
        if (col_norm(j) == 0.0) {
            col_norm(j) = 1.0;
        }
    }
    const Eigen::MatrixXd scaled = design * col_norm.cwiseInverse().asDiagonal();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < scaled.cols()) {
        const auto names = design_column_names(model);
        std::string aliased;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < scaled.cols(); ++j) {
            aliased += (aliased.empty() ? "" : ", ") + names[static_cast<std::size_t>(perm(j))];
        }
        throw data_error("correction design is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                         std::to_string(scaled.cols()) + "); aliased columns: " + aliased);
    }

    model.effects.resize(model.outputs.size());
    model.residual_scale.resize(model.outputs.size());
    for (std::size_t out = 0; out < model.outputs.size(); ++out) {
        const Eigen::VectorXd target = y.col(static_cast<Eigen::Index>(out));
        const Eigen::VectorXd coef = qr.solve(target).cwiseQuotient(col_norm);

        auto& fx = model.effects[out];
        fx.mu = coef(0);
        fx.alpha.assign(lay.engines, 0.0);
        for (std::size_t e = 1; e < lay.engines; ++e) {
            fx.alpha[e] = coef(static_cast<Eigen::Index>(lay.alpha_col(e)));
        }
        fx.beta.assign(lay.clusters, 0.0);
        for (std::size_t k = 1; k < lay.clusters; ++k) {
            fx.beta[k] = coef(static_cast<Eigen::Index>(lay.beta_col(k)));
        }
        fx.gamma.resize(static_cast<Eigen::Index>(lay.regressors), static_cast<Eigen::Index>(lay.clusters));
        for (std::size_t m = 0; m < lay.regressors; ++m) {
            for (std::size_t k = 0; k < lay.clusters; ++k) {
                fx.gamma(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) =
                    coef(static_cast<Eigen::Index>(lay.gamma_col(m, k)));
            }
        }
        fx.gamma5 = coef(static_cast<Eigen::Index>(lay.age_col()));
    }

    const auto raw = compute_residuals(table, labels, model);
    for (std::size_t out = 0; out < model.outputs.size(); ++out) {
        const auto col = raw.values.col(static_cast<Eigen::Index>(out));
        const double mean = col.mean();
        const double ss = (col.array() - mean).square().sum();
        model.residual_scale[out] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
    return model;
}

residual_table compute_residuals(const data_table& table, std::span<const std::size_t> labels,
                                 const correction_model& model) {
    check_labels(labels, table.size(), model.clusters);
    const auto x = table.columns(model.regressors);
    const auto age = table.column(model.age);
    const auto y = table.columns(model.outputs);

    residual_table rt;
    rt.names = model.outputs;
    rt.stage = residual_stage::raw;
    rt.values.resize(y.rows(), y.cols());
    rt.keys.reserve(table.size());
    std::vector<double> xi(model.regressors.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& row = table.rows[i];
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t m = 0; m < xi.size(); ++m) {
            xi[m] = x(r, static_cast<Eigen::Index>(m));
        }
        for (std::size_t k = 0; k < model.outputs.size(); ++k) {
            const auto c = static_cast<Eigen::Index>(k);
            rt.values(r, c) = y(r, c) - model.predict(k, row.engine, labels[i], xi, age[i]);
        }
        rt.keys.push_back({row.engine, row.time, row.time, row.time});
    }
    return rt;
}

residual_table rescale_residuals(const residual_table& rt, const correction_model& model) {
    if (model.residual_scale.size() != static_cast<std::size_t>(rt.values.cols())) {
        throw data_error("residual scale has " + std::to_string(model.residual_scale.size()) + " entries, table has " +
                         std::to_string(rt.values.cols()) + " variables");
    }
    residual_table out = rt;
    for (std::size_t k = 0; k < model.residual_scale.size(); ++k) {
        const double s = model.residual_scale[k];
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw data_error("residual scale of '" + model.outputs[k] + "' is not positive");
        }
        out.values.col(static_cast<Eigen::Index>(k)) /= s;
    }
    out.stage = residual_stage::rescaled;
    return out;
}

residual_table smooth_residuals(const residual_table& rt, std::size_t w, smoothing_scope scope,
                                warning_list* warnings) {
    if (w == 0 || w % 2 == 0) {
        throw usage_error("smoothing width must be odd and positive, got " + std::to_string(w));
    }
    const std::size_t half = w / 2;
    const auto d = rt.values.cols();

    // Contiguous series [begin, end) to smooth independently.
    std::vector<std::pair<std::size_t, std::size_t>> series;
    if (scope == smoothing_scope::global) {
        series.emplace_back(0, rt.size());
    } else {
        std::size_t begin = 0;
        for (std::size_t i = 1; i <= rt.size(); ++i) {
            if (i == rt.size() || rt.keys[i].engine != rt.keys[begin].engine) {
                series.emplace_back(begin, i);
                begin = i;
            }
        }
        for (std::size_t i = 1; i < rt.size(); ++i) {
            const auto& a = rt.keys[i - 1];
            const auto& b = rt.keys[i];
            if (a.engine > b.engine || (a.engine == b.engine && a.time >= b.time)) {
                throw data_error("residual rows must be sorted by (engine, time) before smoothing");
            }
        }
    }

    std::size_t kept = 0;
    for (auto [b, e] : series) {
        if (e - b >= w) {
            kept += e - b - 2 * half;
        } else if (e > b && warnings) {
            warnings->push_back("engine " + std::to_string(rt.keys[b].engine) + " has " + std::to_string(e - b) +
                                " rows, fewer than the smoothing width " + std::to_string(w) + "; dropped");
        }
    }

    residual_table out;
    out.names = rt.names;
    out.stage = residual_stage::smoothed;
    out.values.resize(static_cast<Eigen::Index>(kept), d);
    out.keys.reserve(kept);
    const double width = static_cast<double>(w);
    Eigen::Index r = 0;
    for (auto [b, e] : series) {
        if (e - b < w) {
            continue;
        }
        for (std::size_t c = b + half; c + half < e; ++c) {
            for (Eigen::Index j = 0; j < d; ++j) {
                double sum = 0.0;
                for (std::size_t t = c - half; t <= c + half; ++t) {
                    sum += rt.values(static_cast<Eigen::Index>(t), j);
                }
                out.values(r, j) = sum / width;
            }
            const auto& centre = rt.keys[c];
            out.keys.push_back({centre.engine, centre.time, rt.keys[c - half].window_first, rt.keys[c + half].window_last});
            ++r;
        }
    }
    return out;
}

}  // namespace hmsom
