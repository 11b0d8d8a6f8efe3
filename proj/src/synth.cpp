#include "hmsom/synth.hpp"

#include "hmsom/error.hpp"

#include <cmath>
#include <random>

namespace hmsom {

namespace {

// Regime centres over (ALT [kft], Temp3 [degC], SP [Mach], N1 [%]).
constexpr double regime_centres[5][4] = {
    {31.0, -45.0, 0.76, 84.0},
    {35.0, -55.0, 0.80, 88.0},
    {39.0, -60.0, 0.84, 92.0},
    {33.0, -35.0, 0.82, 90.0},
    {37.0, -65.0, 0.78, 86.0},
};
constexpr double regime_spread[4] = {0.2, 0.75, 0.003, 0.3};
// Typical global spread of each environmental variable, used to size slopes.
constexpr double env_scale[4] = {3.0, 10.0, 0.03, 3.0};
constexpr double output_base[6] = {650.0, 95.0, -40.0, 30.0, 400.0, 1.2};

}  // namespace

generator_config default_generator_config(std::uint64_t seed, std::uint64_t coefficient_seed) {
    generator_config cfg;
    cfg.seed = seed;
    const std::size_t regimes = 5;

    for (std::size_t k = 0; k < regimes; ++k) {
        Eigen::VectorXd mean(4);
        for (int j = 0; j < 4; ++j) {
            mean(j) = regime_centres[k][j];
        }
        Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(4, 4);
        corr(0, 1) = corr(1, 0) = -0.5;  // colder air higher up
        corr(2, 3) = corr(3, 2) = 0.4;   // faster with more fan speed
        const Eigen::Vector4d sd(regime_spread[0], regime_spread[1], regime_spread[2], regime_spread[3]);
        cfg.context_means.push_back(mean);
        cfg.context_covariances.push_back(sd.asDiagonal() * corr * sd.asDiagonal());
    }

    std::mt19937_64 rng(coefficient_seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> age0(1000.0, 5000.0);

    auto& truth = cfg.true_correction;
    truth.outputs = operational_names();
    truth.regressors = correction_regressors();
    truth.clusters = regimes;
    for (std::size_t e = 1; e <= cfg.n_engines; ++e) {
        truth.engines.push_back(static_cast<engine_id>(e));
    }
    // Regressor m of the correction model maps to this environmental column.
    const int env_column_of_regressor[4] = {3, 1, 2, 0};  // N1, Temp3, SP, ALT
    for (std::size_t out = 0; out < truth.outputs.size(); ++out) {
        linear_effects fx;
        fx.mu = output_base[out] + z(rng);
        for (std::size_t e = 0; e < cfg.n_engines; ++e) {
            fx.alpha.push_back(0.5 * z(rng));
        }
        for (std::size_t k = 0; k < regimes; ++k) {
            fx.beta.push_back(0.5 * z(rng));
        }
        fx.gamma.resize(4, static_cast<Eigen::Index>(regimes));
        for (int m = 0; m < 4; ++m) {
            for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(regimes); ++k) {
                fx.gamma(m, k) = z(rng) / env_scale[env_column_of_regressor[m]];
            }
        }
        fx.gamma5 = z(rng) / 1000.0;
        truth.effects.push_back(std::move(fx));
    }
    for (std::size_t e = 0; e < cfg.n_engines; ++e) {
        cfg.age_start.push_back(std::round(age0(rng)));
    }
    return cfg;
}

generated_data generate(const generator_config& cfg) {
    if (cfg.n_engines < 2) {
        throw usage_error("generator needs at least two engines");
    }
    if (cfg.regimes == 0 || cfg.context_means.size() != cfg.regimes ||
        cfg.context_covariances.size() != cfg.regimes) {
        throw usage_error("generator needs one mean and one covariance per regime");
    }
    if (!cfg.regime_weights.empty() && cfg.regime_weights.size() != cfg.regimes) {
        throw usage_error("regime_weights must have one entry per regime");
    }
    const auto& truth = cfg.true_correction;
    if (truth.clusters != cfg.regimes || truth.engines.size() != cfg.n_engines ||
        truth.effects.size() != truth.outputs.size() || cfg.age_start.size() != cfg.n_engines) {
        throw usage_error("true correction coefficients do not match the generator dimensions");
    }
    if (!(cfg.noise_std >= 0.0)) {
        throw usage_error("noise_std must be non-negative");
    }

    const auto s = default_schema();
    const auto env_names = s.names_with(variable_role::environmental);
    const auto dim = static_cast<Eigen::Index>(env_names.size());

    std::vector<Eigen::MatrixXd> chol;
    for (std::size_t k = 0; k < cfg.regimes; ++k) {
        const auto& c = cfg.context_covariances[k];
        if (c.rows() != dim || c.cols() != dim || cfg.context_means[k].size() != dim) {
            throw usage_error("regime " + std::to_string(k) + " parameters must be " + std::to_string(dim) +
                              "-dimensional");
        }
        if (!c.isApprox(c.transpose(), 1e-12)) {
            throw data_error("covariance of regime " + std::to_string(k) + " is not symmetric");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() != Eigen::Success) {
            throw data_error("covariance of regime " + std::to_string(k) + " is not positive definite");
        }
        chol.push_back(llt.matrixL());
    }

    std::vector<engine_id> active = cfg.active_engines;
    if (active.empty()) {
        for (std::size_t e = 1; e <= cfg.n_engines; ++e) {
            active.push_back(static_cast<engine_id>(e));
        }
    }
    for (auto e : active) {
        if (e < 1 || static_cast<std::size_t>(e) > cfg.n_engines) {
            throw usage_error("active engine " + std::to_string(e) + " outside 1.." + std::to_string(cfg.n_engines));
        }
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> weights = cfg.regime_weights;
    if (weights.empty()) {
        weights.assign(cfg.regimes, 1.0);
    }
    std::discrete_distribution<std::size_t> pick_regime(weights.begin(), weights.end());

    // Column positions in the default schema.
    std::vector<std::size_t> out_col;
    for (const auto& name : truth.outputs) {
        out_col.push_back(s.index_of(name));
    }
    std::vector<std::size_t> env_col;
    for (const auto& name : env_names) {
        env_col.push_back(s.index_of(name));
    }
    std::vector<std::size_t> regressor_col;
    for (const auto& name : truth.regressors) {
        regressor_col.push_back(s.index_of(name));
    }
    const auto age_col = s.index_of(truth.age);

    generated_data result;
    result.table.schema = s;
    result.table.rows.reserve(cfg.n_rows);
    result.truth.coefficients = truth;
    result.truth.regimes.reserve(cfg.n_rows);
    result.truth.noise.resize(static_cast<Eigen::Index>(cfg.n_rows), static_cast<Eigen::Index>(truth.outputs.size()));

    const std::size_t per_engine = cfg.n_rows / active.size();
    const std::size_t extra = cfg.n_rows % active.size();
    std::vector<double> regressors(truth.regressors.size());
    Eigen::Index row = 0;
    for (std::size_t a = 0; a < active.size(); ++a) {
        const engine_id engine = active[a];
        const std::size_t count = per_engine + (a < extra ? 1 : 0);
        for (std::size_t t = 0; t < count; ++t) {
            snapshot snap;
            snap.engine = engine;
            snap.time = cfg.time_offset + static_cast<timestamp>(t);
            snap.values.assign(s.size(), 0.0);

            const auto regime = pick_regime(rng);
            Eigen::VectorXd u(dim);
            for (Eigen::Index j = 0; j < dim; ++j) {
                u(j) = z(rng);
            }
            const Eigen::VectorXd env = cfg.context_means[regime] + chol[regime] * u;
            for (Eigen::Index j = 0; j < dim; ++j) {
                snap.values[env_col[static_cast<std::size_t>(j)]] = env(j);
            }
            const double age = cfg.age_start[static_cast<std::size_t>(engine - 1)] +
                               cfg.age_rate * static_cast<double>(snap.time);
            snap.values[age_col] = age;
            for (std::size_t m = 0; m < regressors.size(); ++m) {
                regressors[m] = snap.values[regressor_col[m]];
            }
            for (std::size_t k = 0; k < truth.outputs.size(); ++k) {
                const double eps = cfg.noise_std * z(rng);
                result.truth.noise(row, static_cast<Eigen::Index>(k)) = eps;
                snap.values[out_col[k]] = truth.predict(k, engine, regime, regressors, age) + eps;
            }
            result.truth.regimes.push_back(regime);
            result.table.rows.push_back(std::move(snap));
            ++row;
        }
    }
    if (!result.table.is_sorted()) {
        throw usage_error("active engines must be listed in increasing order");
    }
    return result;
}

}  // namespace hmsom
