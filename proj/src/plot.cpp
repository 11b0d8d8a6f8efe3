#include "hmsom/plot.hpp"

#include "hmsom/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hmsom::plot {

void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != width * height) {
        throw usage_error("pixel buffer does not match image size");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

pgm_image read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open '" + path.string() + "'");
    }
    std::string magic;
    pgm_image img;
    int maxval = 0;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P5" || maxval != 255) {
        throw data_error("'" + path.string() + "' is not an 8-bit binary PGM");
    }
    in.get();
    img.pixels.resize(img.width * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!in) {
        throw data_error("'" + path.string() + "' is truncated");
    }
    return img;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::string num(double v, int precision) {
    if (!std::isfinite(v)) {
        return "0";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::string gray_hex(std::uint8_t level) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", level, level, level);
    return buf;
}

std::string distance_plot_svg(const std::vector<double>& distances, const std::vector<bool>& flagged,
                              const std::vector<bool>* anomalous, double upper) {
    constexpr double width = 900.0;
    constexpr double height = 400.0;
    constexpr double left = 50.0;
    constexpr double right = 10.0;
    constexpr double top = 20.0;
    constexpr double bottom = 30.0;
    double ymax = upper;
    for (double d : distances) {
        ymax = std::max(ymax, d);
    }
    ymax = ymax > 0.0 ? 1.05 * ymax : 1.0;
    const double n = static_cast<double>(std::max<std::size_t>(distances.size(), 2) - 1);
    auto px = [&](std::size_t i) { return left + (width - left - right) * static_cast<double>(i) / n; };
    auto py = [&](double d) { return top + (height - top - bottom) * (1.0 - d / ymax); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
                      num(height, 0) + "\">\n";
    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(py(upper)) + "\" width=\"" + num(width - left - right) +
           "\" height=\"" + num(py(0.0) - py(upper)) + "\" fill=\"#add8e6\" fill-opacity=\"0.6\"/>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(py(0.0)) + "\" x2=\"" + num(width - right) + "\" y2=\"" +
           num(py(0.0)) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(py(0.0)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"4\" y=\"" + num(py(upper) + 4) + "\" font-size=\"10\">" + num(upper, 3) + "</text>\n";
    svg += "<text x=\"4\" y=\"" + num(top + 4) + "\" font-size=\"10\">" + num(ymax, 3) + "</text>\n";
    svg += "<text x=\"" + num(width / 2 - 60) + "\" y=\"" + num(height - 8) +
           "\" font-size=\"11\">sample index</text>\n";
    for (std::size_t i = 0; i < distances.size(); ++i) {
        const double x = px(i);
        const double y = py(distances[i]);
        const bool hit = i < flagged.size() && flagged[i];
        if (!hit) {
            svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"1.2\" fill=\"#606060\"/>\n";
        } else if (anomalous && i < anomalous->size() && (*anomalous)[i]) {
            svg += "<text x=\"" + num(x - 3.5) + "\" y=\"" + num(y + 3.5) +
                   "\" font-size=\"10\" fill=\"#00a000\">*</text>\n";
        } else {
            svg += "<path d=\"M" + num(x - 3) + "," + num(y - 3) + "L" + num(x + 3) + "," + num(y + 3) + "M" +
                   num(x - 3) + "," + num(y + 3) + "L" + num(x + 3) + "," + num(y - 3) +
                   "\" stroke=\"#e00000\" stroke-width=\"1.2\"/>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace hmsom::plot
