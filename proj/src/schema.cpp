#include "hmsom/schema.hpp"

#include "hmsom/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace hmsom {

std::optional<std::size_t> schema::find(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t schema::index_of(std::string_view name) const {
    if (auto i = find(name)) {
        return *i;
    }
    throw data_error("unknown variable '" + std::string(name) + "'");
}

std::vector<std::size_t> schema::indices_with(variable_role role) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].role == role) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::string> schema::names_with(variable_role role) const {
    std::vector<std::string> out;
    for (const auto& v : variables) {
        if (v.role == role) {
            out.push_back(v.name);
        }
    }
    return out;
}

schema default_schema() {
    schema s;
    for (const auto& name : operational_names()) {
        s.variables.push_back({name, variable_role::operational});
    }
    for (const char* name : {"ALT", "Temp3", "SP", "N1"}) {
        s.variables.push_back({name, variable_role::environmental});
    }
    s.variables.push_back({"AGE", variable_role::categorical});
    return s;
}

const std::vector<std::string>& operational_names() {
    static const std::vector<std::string> names{"EXH", "N2", "Temp1", "Pres", "Temp2", "FF"};
    return names;
}

std::vector<double> data_table::column(std::string_view name) const {
    const auto j = schema.index_of(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.values[j]);
    }
    return out;
}

row_matrix data_table::columns(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) {
        idx.push_back(schema.index_of(n));
    }
    row_matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < idx.size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[idx[j]];
        }
    }
    return m;
}

std::set<engine_id> data_table::engine_ids() const {
    std::set<engine_id> out;
    for (const auto& r : rows) {
        out.insert(r.engine);
    }
    return out;
}

namespace {

bool key_less(const snapshot& a, const snapshot& b) {
    return a.engine != b.engine ? a.engine < b.engine : a.time < b.time;
}

}  // namespace

bool data_table::is_sorted() const {
    return std::is_sorted(rows.begin(), rows.end(), key_less);
}

void sort_rows(data_table& table) {
    std::stable_sort(table.rows.begin(), table.rows.end(), key_less);
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        const auto& a = table.rows[i - 1];
        const auto& b = table.rows[i];
        if (a.engine == b.engine && a.time == b.time) {
            throw data_error("duplicate (engine, time) key (" + std::to_string(a.engine) + ", " +
                             std::to_string(a.time) + ")");
        }
    }
}

void validate(const data_table& table) {
    const auto& s = table.schema;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        if (r.values.size() != s.size()) {
            throw data_error("row " + std::to_string(i) + ": expected " + std::to_string(s.size()) +
                             " values, got " + std::to_string(r.values.size()));
        }
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (!std::isfinite(r.values[j])) {
                throw data_error("row " + std::to_string(i) + ", column " + s.variables[j].name +
                                 ": non-finite value");
            }
        }
        if (!s.engines.empty() && !s.engines.contains(r.engine)) {
            throw data_error("row " + std::to_string(i) + ", column " + s.engine_column + ": unknown engine id " +
                             std::to_string(r.engine));
        }
    }
    std::set<std::pair<engine_id, timestamp>> keys;
    for (const auto& r : table.rows) {
        if (!keys.emplace(r.engine, r.time).second) {
            throw data_error("duplicate (engine, time) key (" + std::to_string(r.engine) + ", " +
                             std::to_string(r.time) + ")");
        }
    }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        out.push_back(field);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (text.empty()) {
        return false;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

data_table parse_csv(std::string_view text, const schema& s, std::string_view source) {
    const std::string where(source);
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start < text.size()) {
            auto nl = text.find('\n', start);
            if (nl == std::string_view::npos) {
                nl = text.size();
            }
            auto line = text.substr(start, nl - start);
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            lines.push_back(line);
            start = nl + 1;
        }
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw data_error(where + ": missing header row");
    }

    const auto header = split_fields(lines.front());
    std::map<std::string, std::size_t, std::less<>> position;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!position.emplace(std::string(header[c]), c).second) {
            throw data_error(where + ": duplicate column '" + std::string(header[c]) + "'");
        }
    }
    auto require = [&](const std::string& name) {
        auto it = position.find(name);
        if (it == position.end()) {
            throw data_error(where + ": missing column '" + name + "'");
        }
        return it->second;
    };
    const auto eng_col = require(s.engine_column);
    const auto time_col = require(s.time_column);
    std::vector<std::size_t> var_cols;
    for (const auto& v : s.variables) {
        var_cols.push_back(require(v.name));
    }
    if (header.size() != s.size() + 2) {
        for (const auto& h : header) {
            if (h != s.engine_column && h != s.time_column && !s.find(h)) {
                throw data_error(where + ": unexpected column '" + std::string(h) + "'");
            }
        }
    }

    data_table table;
    table.schema = s;
    table.rows.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) {
            continue;
        }
        const auto fields = split_fields(lines[li]);
        const auto row_label = where + ": row " + std::to_string(li);
        if (fields.size() != header.size()) {
            throw data_error(row_label + ": expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        snapshot snap;
        if (!parse_number(fields[eng_col], snap.engine)) {
            throw data_error(row_label + ", column " + s.engine_column + ": not an integer engine id '" +
                             std::string(fields[eng_col]) + "'");
        }
        if (!s.engines.empty() && !s.engines.contains(snap.engine)) {
            throw data_error(row_label + ", column " + s.engine_column + ": unknown engine id " +
                             std::to_string(snap.engine));
        }
        if (!parse_number(fields[time_col], snap.time)) {
            throw data_error(row_label + ", column " + s.time_column + ": not an integer timestamp '" +
                             std::string(fields[time_col]) + "'");
        }
        snap.values.resize(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
            const auto field = fields[var_cols[j]];
            if (!parse_number(field, snap.values[j]) || !std::isfinite(snap.values[j])) {
                throw data_error(row_label + ", column " + s.variables[j].name + ": non-numeric value '" +
                                 std::string(field) + "'");
            }
        }
        table.rows.push_back(std::move(snap));
    }
    sort_rows(table);
    return table;
}

data_table load_table(const std::filesystem::path& path, const schema& s) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), s, path.string());
}

std::string to_csv(const data_table& table) {
    const auto& s = table.schema;
    std::string out = s.engine_column + "," + s.time_column;
    for (const auto& v : s.variables) {
        out += ',';
        out += v.name;
    }
    out += '\n';
    for (const auto& r : table.rows) {
        out += std::to_string(r.engine);
        out += ',';
        out += std::to_string(r.time);
        for (double v : r.values) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void save_table(const data_table& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    out << to_csv(table);
}

split_result split_train_test(const data_table& table, std::size_t n_train, std::uint64_t seed) {
    if (n_train == 0 || n_train >= table.size()) {
        throw usage_error("n_train must lie in (0, " + std::to_string(table.size()) + "), got " +
                          std::to_string(n_train));
    }
    std::vector<std::size_t> order(table.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    split_result out;
    out.train.schema = table.schema;
    out.test.schema = table.schema;
    std::vector<bool> in_train(table.size(), false);
    for (std::size_t i = 0; i < n_train; ++i) {
        in_train[order[i]] = true;
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
        (in_train[i] ? out.train : out.test).rows.push_back(table.rows[i]);
    }
    sort_rows(out.train);
    sort_rows(out.test);

    const auto train_engines = out.train.engine_ids();
    const auto test_engines = out.test.engine_ids();
    for (auto e : table.engine_ids()) {
        if (!train_engines.contains(e)) {
            out.warnings.push_back("engine " + std::to_string(e) + " absent from the training split");
        }
        if (!test_engines.contains(e)) {
            out.warnings.push_back("engine " + std::to_string(e) + " absent from the test split");
        }
    }
    return out;
}

normalization normalize_fit(const data_table& table, const std::vector<std::string>& names) {
    if (table.size() < 2) {
        throw data_error("normalization needs at least two rows");
    }
    normalization out;
    out.names = names;
    for (const auto& name : names) {
        const auto col = table.column(name);
        const double n = static_cast<double>(col.size());
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : col) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(ss / (n - 1.0));
        if (!(sd > 0.0)) {
            throw data_error("variable '" + name + "' has zero standard deviation");
        }
        out.mean.push_back(mean);
        out.stddev.push_back(sd);
    }
    return out;
}

normalization normalize_fit(const data_table& table) {
    std::vector<std::string> names;
    for (const auto& v : table.schema.variables) {
        names.push_back(v.name);
    }
    return normalize_fit(table, names);
}

namespace {

template <typename F>
data_table transform_columns(const data_table& table, const normalization& coeffs, F f) {
    data_table out = table;
    for (std::size_t k = 0; k < coeffs.names.size(); ++k) {
        const auto j = table.schema.index_of(coeffs.names[k]);
        for (auto& r : out.rows) {
            r.values[j] = f(r.values[j], coeffs.mean[k], coeffs.stddev[k]);
        }
    }
    return out;
}

}  // namespace

data_table normalize_apply(const data_table& table, const normalization& coeffs) {
    return transform_columns(table, coeffs, [](double x, double m, double s) { return (x - m) / s; });
}

data_table denormalize(const data_table& table, const normalization& coeffs) {
    return transform_columns(table, coeffs, [](double z, double m, double s) { return z * s + m; });
}

}  // namespace hmsom
