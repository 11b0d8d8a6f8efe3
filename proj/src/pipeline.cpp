#include "hmsom/pipeline.hpp"

#include "hmsom/error.hpp"

#include <utility>

namespace hmsom {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const data_error& e) {
        throw data_error(std::string(name) + ": " + e.what());
    } catch (const usage_error& e) {
        throw usage_error(std::string(name) + ": " + e.what());
    }
}

void check_schema(const data_table& table, const model_bundle& bundle) {
    if (table.schema.variables.size() != bundle.schema.variables.size()) {
        throw data_error("table schema does not match the model schema");
    }
    for (std::size_t j = 0; j < table.schema.variables.size(); ++j) {
        const auto& a = table.schema.variables[j];
        const auto& b = bundle.schema.variables[j];
        if (a.name != b.name || a.role != b.role) {
            throw data_error("table column '" + a.name + "' does not match model column '" + b.name + "'");
        }
    }
}

}  // namespace

training_result train_pipeline(const data_table& train, const pipeline_config& config) {
    training_result out;
    auto& bundle = out.bundle;
    auto& report = out.report;
    bundle.schema = train.schema;
    bundle.config = config;
    report.rows = train.size();

    const auto normalized = stage("normalize", [&] {
        validate(train);
        if (!train.is_sorted()) {
            throw data_error("training table must be sorted by (engine, time)");
        }
        bundle.norm = normalize_fit(train);
        return normalize_apply(train, bundle.norm);
    });

    const auto env_names = train.schema.names_with(variable_role::environmental);
    auto context = stage("context", [&] {
        return fit_context(normalized.columns(env_names), config.context, env_names);
    });
    bundle.context = std::move(context.model);
    out.context_labels = std::move(context.labels);
    out.log_likelihood = std::move(context.log_likelihood);
    report.explained_variance = bundle.context.explained_variance;
    report.em_iterations = context.iterations;
    if (config.context.method == context_method::gmm_em && !context.converged) {
        report.warnings.push_back("EM stopped after " + std::to_string(context.iterations) +
                                  " iterations without converging");
    }

    out.residuals = stage("correction", [&] {
        bundle.correction = fit_correction(normalized, out.context_labels, config.context.clusters);
        bundle.correction.smoothing_width = config.smoothing_width;
        bundle.correction.scope = config.smoothing;
        const auto raw = compute_residuals(normalized, out.context_labels, bundle.correction);
        const auto rescaled = rescale_residuals(raw, bundle.correction);
        return smooth_residuals(rescaled, config.smoothing_width, config.smoothing, &report.warnings);
    });
    report.smoothed_rows = out.residuals.size();

    stage("som", [&] {
        som_training_report som_report;
        bundle.som = train_som(out.residuals.values, config.som, &som_report);
        report.initial_quantization_error = som_report.initial_quantization_error;
        report.final_quantization_error = som_report.final_quantization_error;
        report.warnings.insert(report.warnings.end(), som_report.warnings.begin(), som_report.warnings.end());
        out.distances = distances_to_map(out.residuals.values, bundle.som, config.som.parallel);
    });

    stage("calibrate", [&] {
        bundle.thresholds = calibrate(out.distances, bundle.som.units(), config.percentile, config.min_local_count);
    });
    report.local_fallbacks = bundle.thresholds.fallback_count();
    return out;
}

projection project(const data_table& test, const model_bundle& bundle) {
    if (bundle.format != bundle_format) {
        throw data_error("unsupported bundle format '" + bundle.format + "'");
    }
    projection out;
    const auto normalized = stage("normalize", [&] {
        check_schema(test, bundle);
        validate(test);
        for (auto e : test.engine_ids()) {
            static_cast<void>(bundle.correction.engine_index(e));
        }
        if (test.is_sorted()) {
            return normalize_apply(test, bundle.norm);
        }
        auto sorted = test;
        sort_rows(sorted);
        return normalize_apply(sorted, bundle.norm);
    });
    out.context_labels = stage("context", [&] {
        return assign_context(normalized.columns(bundle.context.variables), bundle.context);
    });
    out.residuals = stage("correction", [&] {
        const auto raw = compute_residuals(normalized, out.context_labels, bundle.correction);
        const auto rescaled = rescale_residuals(raw, bundle.correction);
        return smooth_residuals(rescaled, bundle.correction.smoothing_width, bundle.correction.scope, &out.warnings);
    });
    out.distances = stage("som", [&] { return distances_to_map(out.residuals.values, bundle.som); });
    return out;
}

std::vector<row_verdict> decide_all(const projection& p, const model_bundle& bundle, detection_mode mode) {
    std::vector<row_verdict> out;
    out.reserve(p.distances.size());
    for (std::size_t i = 0; i < p.distances.size(); ++i) {
        out.push_back({p.residuals.keys[i], decide(p.distances[i], bundle.thresholds, mode)});
    }
    return out;
}

std::vector<row_verdict> test_pipeline(const data_table& test, const model_bundle& bundle, detection_mode mode) {
    return decide_all(project(test, bundle), bundle, mode);
}

std::map<std::string, double> residual_scale_in_table_units(const model_bundle& bundle) {
    std::map<std::string, double> out;
    const auto& c = bundle.correction;
    for (std::size_t k = 0; k < c.outputs.size(); ++k) {
        double sd = 1.0;
        for (std::size_t j = 0; j < bundle.norm.names.size(); ++j) {
            if (bundle.norm.names[j] == c.outputs[k]) {
                sd = bundle.norm.stddev[j];
            }
        }
        out[c.outputs[k]] = c.residual_scale[k] * sd;
    }
    return out;
}

eval_report run_defect_benchmark(const data_table& test, const model_bundle& bundle, const benchmark_options& options) {
    const auto scale = residual_scale_in_table_units(bundle);
    std::vector<eval_row> rows;
    for (std::size_t i = 0; i < options.signatures.size(); ++i) {
        const auto sig = scale_signature(options.signatures[i], scale);
        const auto corrupted = inject(test, sig, options.window, options.seed + i, options.shape);
        const auto p = project(corrupted.table, bundle);
        const std::vector<injection_record> truth{corrupted.record};
        const auto global = decide_all(p, bundle, detection_mode::global);
        const auto local = decide_all(p, bundle, detection_mode::local);
        rows.push_back({sig.name, score(global, truth, options.labeling, sig.name),
                        score(local, truth, options.labeling, sig.name)});
    }
    return make_report(std::move(rows));
}

}  // namespace hmsom
