#pragma once

#include "hmsom/eval.hpp"
#include "hmsom/inject.hpp"
#include "hmsom/pipeline.hpp"
#include "hmsom/synth.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

/// JSON and CSV persistence for models and run artifacts. Numbers are written
/// in shortest round-trip form, so a save/load cycle is lossless.
namespace hmsom::io {

[[nodiscard]] std::string bundle_to_json(const model_bundle& bundle);
/// Refuses documents whose format string differs from bundle_format.
[[nodiscard]] model_bundle bundle_from_json(std::string_view text);
void save_bundle(const model_bundle& bundle, const std::filesystem::path& path);
[[nodiscard]] model_bundle load_bundle(const std::filesystem::path& path);

[[nodiscard]] std::string ground_truth_to_json(const ground_truth& truth);

[[nodiscard]] std::string records_to_json(const std::vector<injection_record>& records);
[[nodiscard]] std::vector<injection_record> records_from_json(std::string_view text);

/// {"name": "...", "offsets": {"FF": 0.8, ...}}
[[nodiscard]] signature signature_from_json(std::string_view text);
[[nodiscard]] std::string signature_to_json(const signature& sig);

/// engine,timestamp,distance,bmu,threshold,healthy,rule,window_first,window_last
[[nodiscard]] std::string verdicts_to_csv(const std::vector<row_verdict>& verdicts);
[[nodiscard]] std::vector<row_verdict> verdicts_from_csv(std::string_view text);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

[[nodiscard]] std::string format_double(double v);

}  // namespace hmsom::io
