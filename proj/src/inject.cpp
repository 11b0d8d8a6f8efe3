#include "hmsom/inject.hpp"

#include "hmsom/error.hpp"

#include <random>

namespace hmsom {

void validate_signature(const signature& sig, const schema& s) {
    bool any = false;
    for (const auto& [name, offset] : sig.offsets) {
        const auto j = s.find(name);
        if (!j || s.variables[*j].role != variable_role::operational) {
            throw usage_error("signature '" + sig.name + "' targets '" + name + "', which is not an operational variable");
        }
        if (!std::isfinite(offset)) {
            throw usage_error("signature '" + sig.name + "' has a non-finite offset");
        }
        any = any || offset != 0.0;
    }
    if (!any) {
        throw usage_error("signature '" + sig.name + "' has no nonzero offset");
    }
}

double shape_factor(defect_shape shape, std::size_t position, std::size_t window) noexcept {
    if (shape == defect_shape::step) {
        return 1.0;
    }
    return static_cast<double>(position + 1) / static_cast<double>(window);
}

injection_result inject(const data_table& table, const signature& sig, std::size_t window, std::uint64_t seed,
                        defect_shape shape) {
    validate_signature(sig, table.schema);
    if (window == 0) {
        throw usage_error("injection window must be positive");
    }
    if (!table.is_sorted()) {
        throw data_error("table must be sorted by (engine, time) before injection");
    }

    // Every start index whose window stays inside one engine's series.
    std::vector<std::size_t> starts;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= table.size(); ++i) {
        if (i == table.size() || table.rows[i].engine != table.rows[begin].engine) {
            for (std::size_t s = begin; s + window <= i; ++s) {
                starts.push_back(s);
            }
            begin = i;
        }
    }
    if (starts.empty()) {
        throw data_error("no engine has " + std::to_string(window) + " consecutive rows for the injection window");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
    const auto first = starts[pick(rng)];

    injection_result out{table, {}};
    auto& rec = out.record;
    rec.signature = sig.name;
    rec.engine = table.rows[first].engine;
    rec.start = table.rows[first].time;
    rec.length = window;
    rec.offsets = sig.offsets;
    rec.shape = shape;
    for (std::size_t p = 0; p < window; ++p) {
        const auto i = first + p;
        rec.rows.push_back(i);
        rec.times.push_back(table.rows[i].time);
        const double f = shape_factor(shape, p, window);
        for (const auto& [name, offset] : sig.offsets) {
            out.table.rows[i].values[table.schema.index_of(name)] += f * offset;
        }
    }
    return out;
}

data_table remove_injection(const data_table& table, const injection_record& record) {
    data_table out = table;
    for (std::size_t p = 0; p < record.rows.size(); ++p) {
        auto& row = out.rows.at(record.rows[p]);
        if (row.engine != record.engine || row.time != record.times[p]) {
            throw data_error("injection record does not match the table at row " + std::to_string(record.rows[p]));
        }
        const double f = shape_factor(record.shape, p, record.length);
        for (const auto& [name, offset] : record.offsets) {
            row.values[table.schema.index_of(name)] -= f * offset;
        }
    }
    return out;
}

std::vector<signature> default_signature_set(double min_amplitude, double max_amplitude) {
    if (!(min_amplitude > 0.0) || max_amplitude < min_amplitude) {
        throw usage_error("signature amplitudes must satisfy 0 < min <= max");
    }
    // Unit directions; +1/-1 per affected variable.
    const std::vector<std::vector<std::pair<std::string, double>>> patterns = {
        {{"EXH", 1}},
        {{"N2", -1}},
        {{"Temp1", 1}},
        {{"Pres", -1}},
        {{"Temp2", 1}},
        {{"FF", 1}},
        {{"EXH", 1}, {"FF", 1}},
        {{"N2", -1}, {"Pres", -1}},
        {{"Temp1", 1}, {"Temp2", 1}},
        {{"EXH", 1}, {"N2", -1}, {"FF", 1}},
        {{"Pres", 1}, {"Temp2", -1}},
        {{"EXH", 1}, {"N2", 1}, {"Temp1", -1}, {"Pres", 1}, {"Temp2", 1}, {"FF", -1}},
    };
    std::vector<signature> out;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const double amp = min_amplitude + (max_amplitude - min_amplitude) * static_cast<double>(i) /
                                               static_cast<double>(patterns.size() - 1);
        signature s;
        s.name = "Defect " + std::to_string(i + 1);
        for (const auto& [name, dir] : patterns[i]) {
            s.offsets.emplace_back(name, dir * amp);
        }
        out.push_back(std::move(s));
    }
    return out;
}

signature scale_signature(const signature& sig, const std::map<std::string, double>& scale) {
    signature out = sig;
    for (auto& [name, offset] : out.offsets) {
        auto it = scale.find(name);
        if (it == scale.end()) {
            throw usage_error("no scale for signature variable '" + name + "'");
        }
        offset *= it->second;
    }
    return out;
}

}  // namespace hmsom
