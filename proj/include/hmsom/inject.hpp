#pragma once

#include "hmsom/schema.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hmsom {

/// Defect signature: additive offsets on operational variables, in the units
/// of the table being corrupted.
struct signature {
    std::string name;
    std::vector<std::pair<std::string, double>> offsets;
};

enum class defect_shape {
    step,  // constant offset over the window
    ramp   // offset grows linearly to its full value at the last row
};

struct injection_record {
    std::string signature;
    engine_id engine = 0;
    timestamp start = 0;
    std::size_t length = 0;
    std::vector<std::size_t> rows;  // table row indices
    std::vector<timestamp> times;
    std::vector<std::pair<std::string, double>> offsets;
    defect_shape shape = defect_shape::step;
};

struct injection_result {
    data_table table;
    injection_record record;
};

/// Throws usage_error when the signature is all zero or names a variable that
/// is not operational in `s`.
void validate_signature(const signature& sig, const schema& s);

/// Adds the signature to `window` consecutive rows of one engine. The window is
/// drawn uniformly among all positions where it fits.
[[nodiscard]] injection_result inject(const data_table& table, const signature& sig, std::size_t window,
                                      std::uint64_t seed, defect_shape shape = defect_shape::step);

/// Subtracts a recorded injection.
[[nodiscard]] data_table remove_injection(const data_table& table, const injection_record& record);

/// Offset added to row `position` (0-based within the window) for a unit offset.
[[nodiscard]] double shape_factor(defect_shape shape, std::size_t position, std::size_t window) noexcept;

/// Twelve synthetic defects, "Defect 1".."Defect 12": six single-variable and
/// six multi-variable signatures. Offsets are expressed in residual standard
/// deviations, with magnitudes spread evenly over [min_amplitude, max_amplitude].
[[nodiscard]] std::vector<signature> default_signature_set(double min_amplitude = 2.0, double max_amplitude = 4.0);

/// Multiplies each offset by scale[variable]; variables missing from the map
/// are an error.
[[nodiscard]] signature scale_signature(const signature& sig, const std::map<std::string, double>& scale);

}  // namespace hmsom
