#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hmsom::plot {

/// Binary (P5) portable graymap, row-major pixels.
void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels);

struct pgm_image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
};

[[nodiscard]] pgm_image read_pgm(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Fixed-precision number formatting for SVG attributes; no locale, no exponent.
[[nodiscard]] std::string num(double v, int precision = 2);

[[nodiscard]] std::string gray_hex(std::uint8_t level);

/// Distance of each sample to the map against the global interval [0, upper]
/// drawn as a light-blue band. Flagged samples are green stars when `anomalous`
/// confirms them and red crosses otherwise; unflagged samples are gray dots.
[[nodiscard]] std::string distance_plot_svg(const std::vector<double>& distances, const std::vector<bool>& flagged,
                                            const std::vector<bool>* anomalous, double upper);

}  // namespace hmsom::plot
