#pragma once

// Independent reference implementations used to check the library. They
// favour the most direct formulation over speed.

#include "hmsom/correction.hpp"
#include "hmsom/schema.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

using hmsom::data_table;
using hmsom::engine_id;
using hmsom::row_matrix;

/// Coefficients of one output flattened as
/// [mu, alpha(engines 2..E), beta(clusters 1..K-1), gamma(regressor-major, cluster), gamma5].
inline std::vector<double> flatten(const hmsom::linear_effects& fx, std::size_t engines, std::size_t clusters) {
    std::vector<double> v{fx.mu};
    for (std::size_t e = 1; e < engines; ++e) {
        v.push_back(fx.alpha[e]);
    }
    for (std::size_t k = 1; k < clusters; ++k) {
        v.push_back(fx.beta[k]);
    }
    for (Eigen::Index m = 0; m < fx.gamma.rows(); ++m) {
        for (Eigen::Index k = 0; k < fx.gamma.cols(); ++k) {
            v.push_back(fx.gamma(m, k));
        }
    }
    v.push_back(fx.gamma5);
    return v;
}

/// Generator truth re-expressed with the smallest engine id and cluster 0 as
/// reference levels. The shifts move into the intercept.
inline std::vector<double> aligned_truth(const hmsom::correction_model& truth, std::size_t output,
                                         const std::vector<engine_id>& engines) {
    const auto& fx = truth.effects[output];
    const double a0 = fx.alpha[truth.engine_index(engines.front())];
    const double b0 = fx.beta[0];
    hmsom::linear_effects aligned = fx;
    aligned.mu = fx.mu + a0 + b0;
    aligned.alpha.assign(engines.size(), 0.0);
    for (std::size_t e = 0; e < engines.size(); ++e) {
        aligned.alpha[e] = fx.alpha[truth.engine_index(engines[e])] - a0;
    }
    for (auto& b : aligned.beta) {
        b -= b0;
    }
    return flatten(aligned, engines.size(), truth.clusters);
}

struct ols_result {
    std::vector<std::vector<double>> coef;  // per output, flattened
    std::vector<std::vector<double>> se;    // analytic standard errors
};

/// Least squares by SVD of the column-equilibrated design, with
/// cov = sigma^2 (X'X)^-1 and sigma^2 = RSS / (n - p).
inline ols_result ols(const data_table& t, const std::vector<std::size_t>& labels, std::size_t clusters) {
    const std::vector<std::string> regressors{"N1", "Temp3", "SP", "ALT"};
    std::vector<engine_id> engines;
    for (const auto& r : t.rows) {
        engines.push_back(r.engine);
    }
    std::sort(engines.begin(), engines.end());
    engines.erase(std::unique(engines.begin(), engines.end()), engines.end());
    std::map<engine_id, std::size_t> eidx;
    for (std::size_t e = 0; e < engines.size(); ++e) {
        eidx[engines[e]] = e;
    }
    const std::size_t p = 1 + (engines.size() - 1) + (clusters - 1) + regressors.size() * clusters + 1;
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        const auto k = labels[static_cast<std::size_t>(i)];
        Eigen::Index c = 0;
        x(i, c++) = 1.0;
        for (std::size_t e = 1; e < engines.size(); ++e) {
            x(i, c++) = eidx[row.engine] == e ? 1.0 : 0.0;
        }
        for (std::size_t b = 1; b < clusters; ++b) {
            x(i, c++) = k == b ? 1.0 : 0.0;
        }
        for (const auto& name : regressors) {
            const double v = row.values[t.schema.index_of(name)];
            for (std::size_t b = 0; b < clusters; ++b) {
                x(i, c++) = k == b ? v : 0.0;
            }
        }
        x(i, c++) = row.values[t.schema.index_of("AGE")];
    }
    const Eigen::VectorXd scale = x.colwise().norm().transpose();
    const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd inv_s = svd.singularValues().cwiseInverse();
    const Eigen::MatrixXd v = svd.matrixV();
    const Eigen::MatrixXd xtx_inv = v * inv_s.cwiseAbs2().asDiagonal() * v.transpose();

    ols_result out;
    for (const auto& name : t.schema.names_with(hmsom::variable_role::operational)) {
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            y(i) = t.rows[static_cast<std::size_t>(i)].values[t.schema.index_of(name)];
        }
        const Eigen::VectorXd bs = v * inv_s.asDiagonal() * (svd.matrixU().transpose() * y);
        const double rss = (y - xs * bs).squaredNorm();
        const double sigma2 = rss / static_cast<double>(n - static_cast<Eigen::Index>(p));
        const Eigen::VectorXd b = bs.cwiseQuotient(scale);
        std::vector<double> coef(b.data(), b.data() + b.size());
        std::vector<double> se(p);
        for (std::size_t j = 0; j < p; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            se[j] = std::sqrt(sigma2 * xtx_inv(jj, jj)) / scale(jj);
        }
        out.coef.push_back(std::move(coef));
        out.se.push_back(std::move(se));
    }
    return out;
}

/// Centred moving average by explicit window sums over one series.
inline std::vector<std::vector<double>> moving_average(const std::vector<std::vector<double>>& series, std::size_t w) {
    std::vector<std::vector<double>> out;
    if (series.size() < w) {
        return out;
    }
    for (std::size_t c = w / 2; c + w / 2 < series.size(); ++c) {
        std::vector<double> m(series[c].size(), 0.0);
        for (std::size_t i = c - w / 2; i <= c + w / 2; ++i) {
            for (std::size_t j = 0; j < m.size(); ++j) {
                m[j] += series[i][j];
            }
        }
        for (auto& v : m) {
            v /= static_cast<double>(w);
        }
        out.push_back(m);
    }
    return out;
}

struct scan_hit {
    double distance = std::numeric_limits<double>::infinity();
    std::size_t unit = 0;
};

/// Exhaustive nearest-prototype scan, summing squared differences in coordinate order.
inline scan_hit exhaustive_nearest(const double* x, const row_matrix& prototypes) {
    scan_hit best;
    for (Eigen::Index u = 0; u < prototypes.rows(); ++u) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < prototypes.cols(); ++j) {
            const double d = x[j] - prototypes(u, j);
            s += d * d;
        }
        if (s < best.distance) {
            best = {s, static_cast<std::size_t>(u)};
        }
    }
    return best;
}

/// One k-means (Lloyd) iteration: assign to the nearest centre, move each
/// non-empty centre to the mean of its members.
inline row_matrix lloyd_step(const row_matrix& data, const row_matrix& centres) {
    row_matrix sum = row_matrix::Zero(centres.rows(), centres.cols());
    std::vector<double> count(static_cast<std::size_t>(centres.rows()), 0.0);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto hit = exhaustive_nearest(data.row(i).data(), centres);
        sum.row(static_cast<Eigen::Index>(hit.unit)) += data.row(i);
        count[hit.unit] += 1.0;
    }
    row_matrix out = centres;
    for (Eigen::Index u = 0; u < centres.rows(); ++u) {
        if (count[static_cast<std::size_t>(u)] > 0.0) {
            out.row(u) = sum.row(u) / count[static_cast<std::size_t>(u)];
        }
    }
    return out;
}

/// Nearest-rank percentile from a full sort, for an integral percent p; the
/// rank ceil(p n / 100) is computed in integer arithmetic.
inline double sorted_percentile(std::vector<double> v, unsigned p) {
    std::sort(v.begin(), v.end());
    const std::size_t rank = (static_cast<std::size_t>(p) * v.size() + 99) / 100;
    return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

}  // namespace oracle
