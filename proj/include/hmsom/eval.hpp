#pragma once

#include "hmsom/correction.hpp"
#include "hmsom/detect.hpp"
#include "hmsom/inject.hpp"

#include <span>
#include <string>
#include <vector>

namespace hmsom {

/// Verdict for one (smoothed) residual row.
struct row_verdict {
    residual_key key;
    verdict result;
};

/// Which smoothed rows count as anomalous.
enum class truth_labeling {
    centre,  // the row's own snapshot was corrupted
    overlap  // any snapshot in the row's smoothing window was corrupted
};

struct detection_score {
    std::string name;
    std::size_t rows = 0;
    std::size_t anomalies = 0;
    std::size_t detections = 0;
    std::size_t true_detections = 0;
    std::size_t false_detections = 0;  // detections on healthy rows
    /// true_detections / anomalies; 0 without anomalies.
    double tpr = 0.0;
    /// false_detections / detections; 0 without detections.
    double pfa = 0.0;
};

/// Per-row ground truth for a verdict list.
[[nodiscard]] std::vector<bool> anomaly_labels(std::span<const row_verdict> verdicts,
                                               std::span<const injection_record> truth,
                                               truth_labeling labeling = truth_labeling::centre);

/// Throws data_error when a record's rows are not covered by the verdicts.
[[nodiscard]] detection_score score(std::span<const row_verdict> verdicts, std::span<const injection_record> truth,
                                    truth_labeling labeling = truth_labeling::centre, std::string name = {});

/// Counts summed over several scores, rates recomputed from the sums.
[[nodiscard]] detection_score pool(std::span<const detection_score> scores, std::string name = "Overall");

/// One row per defect with a global and a local column.
struct eval_row {
    std::string defect;
    detection_score global;
    detection_score local;
};

struct eval_report {
    std::vector<eval_row> rows;
    eval_row overall;
};

[[nodiscard]] eval_report make_report(std::vector<eval_row> rows);
[[nodiscard]] std::string report_csv(const eval_report& report);
[[nodiscard]] std::string report_text(const eval_report& report);

}  // namespace hmsom
