#pragma once

#include "hmsom/context.hpp"
#include "hmsom/correction.hpp"
#include "hmsom/detect.hpp"
#include "hmsom/eval.hpp"
#include "hmsom/inject.hpp"
#include "hmsom/schema.hpp"
#include "hmsom/som.hpp"

#include <map>
#include <string>
#include <vector>

namespace hmsom {

struct pipeline_config {
    context_options context;
    som_options som;
    std::size_t smoothing_width = 7;
    smoothing_scope smoothing = smoothing_scope::engine;
    double percentile = 99.0;
    std::size_t min_local_count = 10;
};

inline constexpr const char* bundle_format = "hmsom-bundle/1";

/// Everything the test phase needs; immutable once trained.
struct model_bundle {
    std::string format = bundle_format;
    hmsom::schema schema;
    normalization norm;
    context_model context;
    correction_model correction;
    som_model som;
    detector_thresholds thresholds;
    pipeline_config config;
};

struct train_report {
    std::size_t rows = 0;
    std::size_t smoothed_rows = 0;
    double explained_variance = 0.0;
    std::size_t em_iterations = 0;
    double initial_quantization_error = 0.0;
    double final_quantization_error = 0.0;
    std::size_t local_fallbacks = 0;
    warning_list warnings;
};

struct training_result {
    model_bundle bundle;
    train_report report;
    residual_table residuals;  // smoothed training residuals
    std::vector<map_distance> distances;
    std::vector<std::size_t> context_labels;
    std::vector<double> log_likelihood;
};

/// normalize -> cluster contexts -> fit correction -> residuals -> rescale ->
/// smooth -> SOM -> calibrate. Errors carry the failing stage's name.
[[nodiscard]] training_result train_pipeline(const data_table& train, const pipeline_config& config);

struct projection {
    residual_table residuals;  // smoothed
    std::vector<map_distance> distances;
    std::vector<std::size_t> context_labels;  // per row of the (engine, time)-sorted input
    warning_list warnings;
};

/// Test-phase transform with the bundle's coefficients only. Rows may come in
/// any order; they are processed sorted by (engine, time).
[[nodiscard]] projection project(const data_table& test, const model_bundle& bundle);

[[nodiscard]] std::vector<row_verdict> decide_all(const projection& p, const model_bundle& bundle,
                                                  detection_mode mode);

[[nodiscard]] std::vector<row_verdict> test_pipeline(const data_table& test, const model_bundle& bundle,
                                                     detection_mode mode);

/// One residual standard deviation of each operational variable, expressed in
/// the raw units of the input table.
[[nodiscard]] std::map<std::string, double> residual_scale_in_table_units(const model_bundle& bundle);

struct benchmark_options {
    /// Offsets in residual standard deviations; converted to table units with
    /// the bundle before injection.
    std::vector<signature> signatures = default_signature_set();
    std::size_t window = 30;
    defect_shape shape = defect_shape::step;
    truth_labeling labeling = truth_labeling::centre;
    std::uint64_t seed = 1;
};

/// Injects each signature into its own copy of `test` (seed + index), runs the
/// test phase and scores both decision rules.
[[nodiscard]] eval_report run_defect_benchmark(const data_table& test, const model_bundle& bundle,
                                               const benchmark_options& options);

}  // namespace hmsom
