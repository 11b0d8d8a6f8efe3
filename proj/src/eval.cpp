#include "hmsom/eval.hpp"

#include "hmsom/error.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

namespace hmsom {

std::vector<bool> anomaly_labels(std::span<const row_verdict> verdicts, std::span<const injection_record> truth,
                                 truth_labeling labeling) {
    std::map<engine_id, std::set<timestamp>> injected;
    for (const auto& rec : truth) {
        injected[rec.engine].insert(rec.times.begin(), rec.times.end());
    }
    std::vector<bool> labels(verdicts.size(), false);
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& k = verdicts[i].key;
        auto it = injected.find(k.engine);
        if (it == injected.end()) {
            continue;
        }
        if (labeling == truth_labeling::centre) {
            labels[i] = it->second.contains(k.time);
        } else {
            auto lo = it->second.lower_bound(k.window_first);
            labels[i] = lo != it->second.end() && *lo <= k.window_last;
        }
    }
    return labels;
}

detection_score score(std::span<const row_verdict> verdicts, std::span<const injection_record> truth,
                      truth_labeling labeling, std::string name) {
    std::map<engine_id, std::pair<timestamp, timestamp>> span;
    for (const auto& v : verdicts) {
        auto [it, fresh] = span.try_emplace(v.key.engine, v.key.window_first, v.key.window_last);
        if (!fresh) {
            it->second.first = std::min(it->second.first, v.key.window_first);
            it->second.second = std::max(it->second.second, v.key.window_last);
        }
    }
    for (const auto& rec : truth) {
        auto it = span.find(rec.engine);
        if (it == span.end()) {
            throw data_error("injection '" + rec.signature + "' targets engine " + std::to_string(rec.engine) +
                             ", which has no verdicts");
        }
        for (auto t : rec.times) {
            if (t < it->second.first || t > it->second.second) {
                throw data_error("injection '" + rec.signature + "' row (engine " + std::to_string(rec.engine) +
                                 ", time " + std::to_string(t) + ") is not covered by the verdicts");
            }
        }
    }

    const auto labels = anomaly_labels(verdicts, truth, labeling);
    detection_score s;
    s.name = std::move(name);
    s.rows = verdicts.size();
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const bool flagged = !verdicts[i].result.healthy;
        s.anomalies += labels[i] ? 1 : 0;
        if (flagged) {
            ++s.detections;
            (labels[i] ? s.true_detections : s.false_detections) += 1;
        }
    }
    s.tpr = s.anomalies ? static_cast<double>(s.true_detections) / static_cast<double>(s.anomalies) : 0.0;
    s.pfa = s.detections ? static_cast<double>(s.false_detections) / static_cast<double>(s.detections) : 0.0;
    return s;
}

detection_score pool(std::span<const detection_score> scores, std::string name) {
    detection_score s;
    s.name = std::move(name);
    for (const auto& x : scores) {
        s.rows += x.rows;
        s.anomalies += x.anomalies;
        s.detections += x.detections;
        s.true_detections += x.true_detections;
        s.false_detections += x.false_detections;
    }
    s.tpr = s.anomalies ? static_cast<double>(s.true_detections) / static_cast<double>(s.anomalies) : 0.0;
    s.pfa = s.detections ? static_cast<double>(s.false_detections) / static_cast<double>(s.detections) : 0.0;
    return s;
}

eval_report make_report(std::vector<eval_row> rows) {
    eval_report r;
    std::vector<detection_score> g;
    std::vector<detection_score> l;
    for (const auto& row : rows) {
        g.push_back(row.global);
        l.push_back(row.local);
    }
    r.overall = {"Overall", pool(g), pool(l)};
    r.rows = std::move(rows);
    return r;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string csv_line(const eval_row& row) {
    auto part = [](const detection_score& s) {
        return fixed(s.tpr, 6) + "," + fixed(s.pfa, 6) + "," + std::to_string(s.anomalies) + "," +
               std::to_string(s.detections) + "," + std::to_string(s.true_detections) + "," +
               std::to_string(s.false_detections);
    };
    return row.defect + "," + part(row.global) + "," + part(row.local) + "\n";
}

}  // namespace

std::string report_csv(const eval_report& report) {
    std::string out =
        "defect,global_tpr,global_pfa,global_anomalies,global_detections,global_true_detections,global_false_detections,"
        "local_tpr,local_pfa,local_anomalies,local_detections,local_true_detections,local_false_detections\n";
    for (const auto& row : report.rows) {
        out += csv_line(row);
    }
    out += csv_line(report.overall);
    return out;
}

std::string report_text(const eval_report& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s | %8s %8s | %8s %8s\n", "", "Global", "", "Local", "");
    out += line;
    std::snprintf(line, sizeof(line), "%-12s | %8s %8s | %8s %8s\n", "Defect", "tpr", "pfa", "tpr", "pfa");
    out += line;
    out += std::string(52, '-') + "\n";
    auto add = [&](const eval_row& r) {
        std::snprintf(line, sizeof(line), "%-12s | %7.1f%% %7.1f%% | %7.1f%% %7.1f%%\n", r.defect.c_str(),
                      100.0 * r.global.tpr, 100.0 * r.global.pfa, 100.0 * r.local.tpr, 100.0 * r.local.pfa);
        out += line;
    };
    for (const auto& r : report.rows) {
        add(r);
    }
    out += std::string(52, '-') + "\n";
    add(report.overall);
    out += "pfa = detections on healthy rows / all detections\n";
    return out;
}

}  // namespace hmsom
