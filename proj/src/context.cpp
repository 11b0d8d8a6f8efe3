#include "hmsom/context.hpp"

#include "hmsom/error.hpp"
#include "hmsom/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace hmsom {

namespace {

constexpr double ridge_factor = 1e-6;

Eigen::MatrixXd sample_covariance(const row_matrix& data) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centred = data.rowwise() - mean;
    return centred.transpose() * centred / static_cast<double>(std::max<Eigen::Index>(data.rows(), 1));
}

std::vector<kernels::gaussian_component> factorize(const context_model& model) {
    std::vector<kernels::gaussian_component> out;
    out.reserve(model.clusters());
    for (std::size_t k = 0; k < model.clusters(); ++k) {
        const auto& c = model.components[k];
        Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
        if (llt.info() != Eigen::Success) {
            throw data_error("context component " + std::to_string(k) + " has a singular covariance");
        }
        out.push_back({std::log(c.weight), c.mean, llt.matrixL()});
    }
    return out;
}

std::size_t argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
    std::size_t best = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k) {
        if (v(k) > v(static_cast<Eigen::Index>(best))) {
            best = static_cast<std::size_t>(k);
        }
    }
    return best;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) {
        return m;
    }
    return m + std::log((v.array() - m).exp().sum());
}

/// k-means++ seeding: first centre uniform, the rest proportional to squared
/// distance from the nearest chosen centre.
std::vector<Eigen::Index> kmeans_pp(const row_matrix& data, std::size_t k, std::mt19937_64& rng) {
    const Eigen::Index n = data.rows();
    const auto d = static_cast<std::size_t>(data.cols());
    std::vector<Eigen::Index> centres;
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    centres.push_back(first(rng));
    std::vector<double> dist2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    while (centres.size() < k) {
        const auto* c = data.row(centres.back()).data();
        for (Eigen::Index i = 0; i < n; ++i) {
            dist2[static_cast<std::size_t>(i)] =
                std::min(dist2[static_cast<std::size_t>(i)], kernels::squared_distance(data.row(i).data(), c, d));
        }
        const double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
        if (total > 0.0) {
            std::discrete_distribution<Eigen::Index> pick(dist2.begin(), dist2.end());
            centres.push_back(pick(rng));
        } else {
            centres.push_back(first(rng));
        }
    }
    return centres;
}

void regularize(Eigen::MatrixXd& cov, double fallback_ridge) {
    const double dim = static_cast<double>(cov.rows());
    double ridge = ridge_factor * cov.trace() / dim;
    if (!(ridge > 0.0)) {
        ridge = fallback_ridge;
    }
    cov.diagonal().array() += ridge;
}

struct em_state {
    std::vector<context_component> components;
};

em_state m_step(const row_matrix& data, const Eigen::MatrixXd& resp, covariance_type cov_type, double fallback_ridge,
                const em_state& previous) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    em_state next;
    for (Eigen::Index k = 0; k < resp.cols(); ++k) {
        const double nk = resp.col(k).sum();
        context_component c;
        if (nk < 1e-10) {
            // Component lost all mass; keep its parameters and a floor weight.
            c = previous.components[static_cast<std::size_t>(k)];
            c.weight = 1e-10;
            next.components.push_back(std::move(c));
            continue;
        }
        c.weight = nk / static_cast<double>(n);
        c.mean = (data.transpose() * resp.col(k)) / nk;
        const Eigen::MatrixXd centred = data.rowwise() - c.mean.transpose();
        c.covariance = Eigen::MatrixXd::Zero(d, d);
        if (cov_type == covariance_type::full) {
            c.covariance = centred.transpose() * resp.col(k).asDiagonal() * centred / nk;
        } else {
            for (Eigen::Index j = 0; j < d; ++j) {
                c.covariance(j, j) = (centred.col(j).array().square() * resp.col(k).array()).sum() / nk;
            }
        }
        regularize(c.covariance, fallback_ridge);
        next.components.push_back(std::move(c));
    }
    const double total = std::accumulate(next.components.begin(), next.components.end(), 0.0,
                                         [](double s, const context_component& c) { return s + c.weight; });
    for (auto& c : next.components) {
        c.weight /= total;
    }
    return next;
}

context_fit fit_gmm_once(const row_matrix& data, const context_options& opt, std::mt19937_64& rng) {
    const Eigen::Index n = data.rows();
    const auto k = opt.clusters;
    const auto centres = kmeans_pp(data, k, rng);

    const Eigen::MatrixXd global_cov = sample_covariance(data);
    const double fallback_ridge = std::max(ridge_factor * global_cov.trace() / static_cast<double>(data.cols()), 1e-12);

    // Hard assignment to the seeds provides the starting responsibilities.
    row_matrix seeds(static_cast<Eigen::Index>(k), data.cols());
    for (std::size_t c = 0; c < k; ++c) {
        seeds.row(static_cast<Eigen::Index>(c)) = data.row(centres[c]);
    }
    std::vector<kernels::nearest_unit> nearest(static_cast<std::size_t>(n));
    kernels::find_bmus_parallel(data, seeds, nearest);
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        resp(i, static_cast<Eigen::Index>(nearest[static_cast<std::size_t>(i)].unit)) = 1.0;
    }
    em_state seed_state;
    for (std::size_t c = 0; c < k; ++c) {
        seed_state.components.push_back({1.0 / static_cast<double>(k), seeds.row(static_cast<Eigen::Index>(c)).transpose(),
                                         global_cov + fallback_ridge * Eigen::MatrixXd::Identity(data.cols(), data.cols())});
    }
    em_state state = m_step(data, resp, opt.covariance, fallback_ridge, seed_state);

    context_fit fit;
    fit.model.method = context_method::gmm_em;
    fit.model.covariance = opt.covariance;
    fit.converged = false;
    Eigen::MatrixXd terms;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        fit.model.components = state.components;
        const auto factors = factorize(fit.model);
        kernels::mixture_log_terms_parallel(data, factors, terms);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lse = log_sum_exp(terms.row(i));
            ll += lse;
            resp.row(i) = (terms.row(i).array() - lse).exp();
        }
        fit.log_likelihood.push_back(ll);
        fit.iterations = it + 1;
        if (it > 0 && ll - fit.log_likelihood[it - 1] < opt.tolerance) {
            fit.converged = true;
            break;
        }
        state = m_step(data, resp, opt.covariance, fallback_ridge, state);
    }
    fit.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        fit.labels[static_cast<std::size_t>(i)] = argmax_lowest(resp.row(i));
    }
    return fit;
}

context_fit fit_gmm(const row_matrix& data, const context_options& opt) {
    std::mt19937_64 rng(opt.seed);
    context_fit best = fit_gmm_once(data, opt, rng);
    for (std::size_t r = 1; r < opt.restarts; ++r) {
        auto fit = fit_gmm_once(data, opt, rng);
        if (fit.log_likelihood.back() > best.log_likelihood.back()) {
            best = std::move(fit);
        }
    }
    return best;
}

/// Index into the condensed upper triangle, i < j.
inline std::size_t tri(std::size_t i, std::size_t j, std::size_t n) noexcept {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

context_fit fit_ward(const row_matrix& data, const context_options& opt) {
    const auto n = static_cast<std::size_t>(data.rows());
    const auto d = static_cast<std::size_t>(data.cols());
    // Lance-Williams Ward recurrence on squared Euclidean distances; a stored
    // value equals twice the SSE increase of merging the pair.
    std::vector<double> dist(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[tri(i, j, n)] = kernels::squared_distance(data.row(static_cast<Eigen::Index>(i)).data(),
                                                           data.row(static_cast<Eigen::Index>(j)).data(), d);
        }
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return i < j ? dist[tri(i, j, n)] : dist[tri(j, i, n)]; };

    std::vector<bool> active(n, true);
    std::vector<double> size(n, 1.0);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::vector<std::size_t> nn(n, 0);
    std::vector<double> nn_dist(n, std::numeric_limits<double>::infinity());

    auto refresh = [&](std::size_t i) {
        nn_dist[i] = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && active[j] && at(i, j) < nn_dist[i]) {
                nn_dist[i] = at(i, j);
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        refresh(i);
    }

    context_fit fit;
    fit.model.method = context_method::ward_hac;
    for (std::size_t remaining = n; remaining > opt.clusters; --remaining) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && (best == n || nn_dist[i] < nn_dist[best])) {
                best = i;
            }
        }
        const std::size_t a = std::min(best, nn[best]);
        const std::size_t b = std::max(best, nn[best]);
        const double dab = at(a, b);
        fit.merge_costs.push_back(0.5 * dab);

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) {
                continue;
            }
            const double nk = size[k];
            at(a, k) = ((size[a] + nk) * at(a, k) + (size[b] + nk) * at(b, k) - nk * dab) / (size[a] + size[b] + nk);
        }
        active[b] = false;
        parent[b] = a;
        size[a] += size[b];

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) {
                continue;
            }
            if (nn[k] == a || nn[k] == b) {
                refresh(k);
            } else if (at(a, k) < nn_dist[k]) {
                nn_dist[k] = at(a, k);
                nn[k] = a;
            }
        }
        refresh(a);
    }

    auto root = [&](std::size_t i) {
        while (parent[i] != i) {
            i = parent[i];
        }
        return i;
    };
    std::vector<std::size_t> label_of_root(n, n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
            label_of_root[i] = next++;
        }
    }
    fit.labels.resize(n);
    fit.model.components.resize(next);
    for (auto& c : fit.model.components) {
        c.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto l = label_of_root[root(i)];
        fit.labels[i] = l;
        fit.model.components[l].mean += data.row(static_cast<Eigen::Index>(i)).transpose();
        fit.model.components[l].weight += 1.0;
    }
    for (auto& c : fit.model.components) {
        c.mean /= c.weight;
        c.weight /= static_cast<double>(n);
    }
    return fit;
}

}  // namespace

context_fit fit_context(const row_matrix& env, const context_options& options, std::vector<std::string> variables) {
    if (options.clusters == 0) {
        throw usage_error("number of context clusters must be at least 1");
    }
    if (static_cast<std::size_t>(env.rows()) < options.clusters) {
        throw usage_error("cannot form " + std::to_string(options.clusters) + " context clusters from " +
                          std::to_string(env.rows()) + " rows");
    }
    if (!env.allFinite()) {
        throw data_error("environmental matrix contains non-finite values");
    }
    auto fit = options.method == context_method::gmm_em ? fit_gmm(env, options) : fit_ward(env, options);
    if (variables.empty()) {
        for (Eigen::Index j = 0; j < env.cols(); ++j) {
            variables.push_back("x" + std::to_string(j));
        }
    }
    fit.model.variables = std::move(variables);
    fit.model.explained_variance = explained_variance(env, fit.labels, options.clusters);
    return fit;
}

Eigen::VectorXd context_posterior(std::span<const double> sample, const context_model& model) {
    if (model.method != context_method::gmm_em) {
        throw usage_error("posterior responsibilities are defined for mixture models only");
    }
    if (sample.size() != model.dimension()) {
        throw data_error("sample has " + std::to_string(sample.size()) + " values, context model expects " +
                         std::to_string(model.dimension()));
    }
    row_matrix x = Eigen::Map<const Eigen::RowVectorXd>(sample.data(), static_cast<Eigen::Index>(sample.size()));
    Eigen::MatrixXd terms;
    kernels::mixture_log_terms_serial(x, factorize(model), terms);
    const double lse = log_sum_exp(terms.row(0));
    return (terms.row(0).array() - lse).exp().transpose();
}

std::vector<std::size_t> assign_context(const row_matrix& samples, const context_model& model) {
    if (model.clusters() == 0) {
        throw data_error("context model has no clusters");
    }
    if (static_cast<std::size_t>(samples.cols()) != model.dimension()) {
        throw data_error("samples have " + std::to_string(samples.cols()) + " columns, context model expects " +
                         std::to_string(model.dimension()));
    }
    std::vector<std::size_t> labels(static_cast<std::size_t>(samples.rows()));
    if (model.method == context_method::gmm_em) {
        Eigen::MatrixXd terms;
        kernels::mixture_log_terms_parallel(samples, factorize(model), terms);
        for (Eigen::Index i = 0; i < samples.rows(); ++i) {
            labels[static_cast<std::size_t>(i)] = argmax_lowest(terms.row(i));
        }
    } else {
        row_matrix centroids(static_cast<Eigen::Index>(model.clusters()), samples.cols());
        for (std::size_t k = 0; k < model.clusters(); ++k) {
            centroids.row(static_cast<Eigen::Index>(k)) = model.components[k].mean.transpose();
        }
        std::vector<kernels::nearest_unit> nearest(labels.size());
        kernels::find_bmus_parallel(samples, centroids, nearest);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            labels[i] = nearest[i].unit;
        }
    }
    return labels;
}

std::size_t assign_context(std::span<const double> sample, const context_model& model) {
    row_matrix x = Eigen::Map<const Eigen::RowVectorXd>(sample.data(), static_cast<Eigen::Index>(sample.size()));
    return assign_context(x, model).front();
}

double explained_variance(const row_matrix& data, std::span<const std::size_t> labels, std::size_t clusters) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const double total = (data.rowwise() - mean).squaredNorm();
    if (total == 0.0) {
        return 0.0;
    }
    row_matrix sums = row_matrix::Zero(static_cast<Eigen::Index>(clusters), data.cols());
    std::vector<double> counts(clusters, 0.0);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto l = labels[static_cast<std::size_t>(i)];
        sums.row(static_cast<Eigen::Index>(l)) += data.row(i);
        counts[l] += 1.0;
    }
    double within = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto l = labels[static_cast<std::size_t>(i)];
        within += (data.row(i) - sums.row(static_cast<Eigen::Index>(l)) / counts[l]).squaredNorm();
    }
    return std::clamp(1.0 - within / total, 0.0, 1.0);
}

std::vector<double> explained_variance_scan(const row_matrix& env, context_options options, std::size_t k_max) {
    std::vector<double> out;
    k_max = std::min<std::size_t>(k_max, static_cast<std::size_t>(env.rows()));
    for (std::size_t k = 1; k <= k_max; ++k) {
        options.clusters = k;
        out.push_back(fit_context(env, options).model.explained_variance);
    }
    return out;
}

}  // namespace hmsom
