#include "hmsom/serialize.hpp"

#include "hmsom/error.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hmsom::io {

using json = nlohmann::ordered_json;

namespace {

// Enum spellings shared by the bundle and the CLI.
std::string to_string(context_method m) { return m == context_method::gmm_em ? "gmm" : "hac"; }
std::string to_string(covariance_type c) { return c == covariance_type::full ? "full" : "diagonal"; }
std::string to_string(som_init i) { return i == som_init::pca_grid ? "pca" : "random"; }
std::string to_string(smoothing_scope s) { return s == smoothing_scope::engine ? "engine" : "global"; }
std::string to_string(detection_mode m) { return m == detection_mode::global ? "global" : "local"; }
std::string to_string(defect_shape s) { return s == defect_shape::step ? "step" : "ramp"; }
std::string to_string(variable_role r) {
    switch (r) {
        case variable_role::operational: return "operational";
        case variable_role::environmental: return "environmental";
        case variable_role::categorical: return "categorical";
    }
    return "categorical";
}

template <typename E>
E parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, E>> choices) {
    for (const auto& [name, value] : choices) {
        if (text == name) {
            return value;
        }
    }
    throw data_error("unrecognised value '" + text + "'");
}

json matrix_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw data_error("ragged matrix in JSON");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json schema_json(const schema& s) {
    json vars = json::array();
    for (const auto& v : s.variables) {
        vars.push_back({{"name", v.name}, {"role", to_string(v.role)}});
    }
    json j = {{"engine_column", s.engine_column}, {"time_column", s.time_column}, {"variables", vars}};
    j["engines"] = std::vector<engine_id>(s.engines.begin(), s.engines.end());
    return j;
}

schema schema_from(const json& j) {
    schema s;
    s.engine_column = j.at("engine_column").get<std::string>();
    s.time_column = j.at("time_column").get<std::string>();
    for (const auto& v : j.at("variables")) {
        s.variables.push_back({v.at("name").get<std::string>(),
                               parse_enum<variable_role>(v.at("role").get<std::string>(),
                                                         {{"operational", variable_role::operational},
                                                          {"environmental", variable_role::environmental},
                                                          {"categorical", variable_role::categorical}})});
    }
    for (auto e : j.at("engines").get<std::vector<engine_id>>()) {
        s.engines.insert(e);
    }
    return s;
}

json context_json(const context_model& m) {
    json comps = json::array();
    for (const auto& c : m.components) {
        json cj = {{"weight", c.weight}, {"mean", vector_json(c.mean)}};
        if (c.covariance.size() > 0) {
            cj["covariance"] = matrix_json(c.covariance);
        }
        comps.push_back(std::move(cj));
    }
    return {{"method", to_string(m.method)},       {"covariance", to_string(m.covariance)},
            {"variables", m.variables},            {"explained_variance", m.explained_variance},
            {"components", comps}};
}

context_model context_from(const json& j) {
    context_model m;
    m.method = parse_enum<context_method>(j.at("method").get<std::string>(),
                                          {{"gmm", context_method::gmm_em}, {"hac", context_method::ward_hac}});
    m.covariance = parse_enum<covariance_type>(j.at("covariance").get<std::string>(),
                                               {{"full", covariance_type::full}, {"diagonal", covariance_type::diagonal}});
    m.variables = j.at("variables").get<std::vector<std::string>>();
    m.explained_variance = j.at("explained_variance").get<double>();
    for (const auto& cj : j.at("components")) {
        context_component c;
        c.weight = cj.at("weight").get<double>();
        c.mean = vector_from(cj.at("mean"));
        if (cj.contains("covariance")) {
            c.covariance = matrix_from(cj.at("covariance"));
        }
        m.components.push_back(std::move(c));
    }
    return m;
}

json correction_json(const correction_model& m) {
    json effects = json::object();
    for (std::size_t k = 0; k < m.outputs.size(); ++k) {
        const auto& fx = m.effects[k];
        effects[m.outputs[k]] = {{"mu", fx.mu},
                                 {"alpha", fx.alpha},
                                 {"beta", fx.beta},
                                 {"gamma", matrix_json(fx.gamma)},
                                 {"gamma5", fx.gamma5},
                                 {"residual_scale", m.residual_scale.empty() ? 0.0 : m.residual_scale[k]}};
    }
    return {{"outputs", m.outputs},
            {"regressors", m.regressors},
            {"age", m.age},
            {"engines", m.engines},
            {"clusters", m.clusters},
            {"smoothing_width", m.smoothing_width},
            {"smoothing_scope", to_string(m.scope)},
            {"effects", effects}};
}

correction_model correction_from(const json& j) {
    correction_model m;
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.regressors = j.at("regressors").get<std::vector<std::string>>();
    m.age = j.at("age").get<std::string>();
    m.engines = j.at("engines").get<std::vector<engine_id>>();
    m.clusters = j.at("clusters").get<std::size_t>();
    m.smoothing_width = j.at("smoothing_width").get<std::size_t>();
    m.scope = parse_enum<smoothing_scope>(j.at("smoothing_scope").get<std::string>(),
                                          {{"engine", smoothing_scope::engine}, {"global", smoothing_scope::global}});
    for (const auto& name : m.outputs) {
        const auto& e = j.at("effects").at(name);
        linear_effects fx;
        fx.mu = e.at("mu").get<double>();
        fx.alpha = e.at("alpha").get<std::vector<double>>();
        fx.beta = e.at("beta").get<std::vector<double>>();
        fx.gamma = matrix_from(e.at("gamma"));
        fx.gamma5 = e.at("gamma5").get<double>();
        m.effects.push_back(std::move(fx));
        m.residual_scale.push_back(e.at("residual_scale").get<double>());
    }
    return m;
}

json som_options_json(const som_options& o) {
    return {{"rows", o.rows},           {"cols", o.cols},
            {"epochs", o.epochs},       {"sigma_start", o.sigma_start},
            {"sigma_end", o.sigma_end}, {"init", to_string(o.init)},
            {"seed", o.seed}};
}

som_options som_options_from(const json& j) {
    som_options o;
    o.rows = j.at("rows").get<std::size_t>();
    o.cols = j.at("cols").get<std::size_t>();
    o.epochs = j.at("epochs").get<std::size_t>();
    o.sigma_start = j.at("sigma_start").get<double>();
    o.sigma_end = j.at("sigma_end").get<double>();
    o.init = parse_enum<som_init>(j.at("init").get<std::string>(),
                                  {{"pca", som_init::pca_grid}, {"random", som_init::random_samples}});
    o.seed = j.at("seed").get<std::uint64_t>();
    return o;
}

json thresholds_json(const detector_thresholds& t) {
    json local = json::array();
    for (const auto& u : t.local_upper) {
        local.push_back(u ? json(*u) : json(nullptr));
    }
    return {{"percentile", t.percentile}, {"min_local_count", t.min_local_count}, {"global_upper", t.global_upper},
            {"local_upper", local},       {"local_count", t.local_count}};
}

detector_thresholds thresholds_from(const json& j) {
    detector_thresholds t;
    t.percentile = j.at("percentile").get<double>();
    t.min_local_count = j.at("min_local_count").get<std::size_t>();
    t.global_upper = j.at("global_upper").get<double>();
    for (const auto& u : j.at("local_upper")) {
        t.local_upper.push_back(u.is_null() ? std::nullopt : std::optional<double>(u.get<double>()));
    }
    t.local_count = j.at("local_count").get<std::vector<std::size_t>>();
    return t;
}

json config_json(const pipeline_config& c) {
    return {{"context",
             {{"clusters", c.context.clusters},
              {"method", to_string(c.context.method)},
              {"covariance", to_string(c.context.covariance)},
              {"seed", c.context.seed},
              {"max_iterations", c.context.max_iterations},
              {"tolerance", c.context.tolerance},
              {"restarts", c.context.restarts}}},
            {"som", som_options_json(c.som)},
            {"smoothing_width", c.smoothing_width},
            {"smoothing_scope", to_string(c.smoothing)},
            {"percentile", c.percentile},
            {"min_local_count", c.min_local_count}};
}

pipeline_config config_from(const json& j) {
    pipeline_config c;
    const auto& cj = j.at("context");
    c.context.clusters = cj.at("clusters").get<std::size_t>();
    c.context.method = parse_enum<context_method>(cj.at("method").get<std::string>(),
                                                  {{"gmm", context_method::gmm_em}, {"hac", context_method::ward_hac}});
    c.context.covariance = parse_enum<covariance_type>(
        cj.at("covariance").get<std::string>(), {{"full", covariance_type::full}, {"diagonal", covariance_type::diagonal}});
    c.context.seed = cj.at("seed").get<std::uint64_t>();
    c.context.max_iterations = cj.at("max_iterations").get<std::size_t>();
    c.context.tolerance = cj.at("tolerance").get<double>();
    c.context.restarts = cj.at("restarts").get<std::size_t>();
    c.som = som_options_from(j.at("som"));
    c.smoothing_width = j.at("smoothing_width").get<std::size_t>();
    c.smoothing = parse_enum<smoothing_scope>(j.at("smoothing_scope").get<std::string>(),
                                              {{"engine", smoothing_scope::engine}, {"global", smoothing_scope::global}});
    c.percentile = j.at("percentile").get<double>();
    c.min_local_count = j.at("min_local_count").get<std::size_t>();
    return c;
}

json record_json(const injection_record& r) {
    json offsets = json::object();
    for (const auto& [name, v] : r.offsets) {
        offsets[name] = v;
    }
    return {{"signature", r.signature}, {"engine", r.engine}, {"start", r.start}, {"length", r.length},
            {"shape", to_string(r.shape)}, {"offsets", offsets}, {"rows", r.rows}, {"times", r.times}};
}

injection_record record_from(const json& j) {
    injection_record r;
    r.signature = j.at("signature").get<std::string>();
    r.engine = j.at("engine").get<engine_id>();
    r.start = j.at("start").get<timestamp>();
    r.length = j.at("length").get<std::size_t>();
    r.shape = parse_enum<defect_shape>(j.at("shape").get<std::string>(),
                                       {{"step", defect_shape::step}, {"ramp", defect_shape::ramp}});
    for (const auto& [name, v] : j.at("offsets").items()) {
        r.offsets.emplace_back(name, v.get<double>());
    }
    r.rows = j.at("rows").get<std::vector<std::size_t>>();
    r.times = j.at("times").get<std::vector<timestamp>>();
    if (r.rows.size() != r.length || r.times.size() != r.length) {
        throw data_error("injection record '" + r.signature + "' lists " + std::to_string(r.times.size()) +
                         " rows for a window of " + std::to_string(r.length));
    }
    return r;
}

json parse(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string(what) + ": " + e.what());
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string bundle_to_json(const model_bundle& b) {
    json j;
    j["format"] = b.format;
    j["schema"] = schema_json(b.schema);
    j["normalization"] = {{"names", b.norm.names}, {"mean", b.norm.mean}, {"stddev", b.norm.stddev}};
    j["context"] = context_json(b.context);
    j["correction"] = correction_json(b.correction);
    j["som"] = {{"rows", b.som.rows},
                {"cols", b.som.cols},
                {"training", som_options_json(b.som.training)},
                {"prototypes", matrix_json(b.som.prototypes)}};
    j["thresholds"] = thresholds_json(b.thresholds);
    j["config"] = config_json(b.config);
    return j.dump(1) + "\n";
}

model_bundle bundle_from_json(std::string_view text) {
    const auto j = parse(text, "bundle");
    try {
        model_bundle b;
        b.format = j.at("format").get<std::string>();
        if (b.format != bundle_format) {
            throw data_error("bundle format '" + b.format + "' is not supported (expected '" + bundle_format + "')");
        }
        b.schema = schema_from(j.at("schema"));
        const auto& n = j.at("normalization");
        b.norm.names = n.at("names").get<std::vector<std::string>>();
        b.norm.mean = n.at("mean").get<std::vector<double>>();
        b.norm.stddev = n.at("stddev").get<std::vector<double>>();
        b.context = context_from(j.at("context"));
        b.correction = correction_from(j.at("correction"));
        const auto& s = j.at("som");
        b.som.rows = s.at("rows").get<std::size_t>();
        b.som.cols = s.at("cols").get<std::size_t>();
        b.som.training = som_options_from(s.at("training"));
        b.som.prototypes = matrix_from(s.at("prototypes"));
        if (static_cast<std::size_t>(b.som.prototypes.rows()) != b.som.units()) {
            throw data_error("bundle SOM has " + std::to_string(b.som.prototypes.rows()) + " prototypes for a " +
                             std::to_string(b.som.rows) + "x" + std::to_string(b.som.cols) + " grid");
        }
        b.thresholds = thresholds_from(j.at("thresholds"));
        b.config = config_from(j.at("config"));
        return b;
    } catch (const json::exception& e) {
        throw data_error(std::string("bundle: ") + e.what());
    }
}

void save_bundle(const model_bundle& bundle, const std::filesystem::path& path) {
    write_file(path, bundle_to_json(bundle));
}

model_bundle load_bundle(const std::filesystem::path& path) {
    return bundle_from_json(read_file(path));
}

std::string ground_truth_to_json(const ground_truth& truth) {
    json j;
    j["regimes"] = truth.regimes;
    j["coefficients"] = correction_json(truth.coefficients);
    j["noise"] = matrix_json(truth.noise);
    return j.dump(1) + "\n";
}

std::string records_to_json(const std::vector<injection_record>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        arr.push_back(record_json(r));
    }
    return arr.dump(1) + "\n";
}

std::vector<injection_record> records_from_json(std::string_view text) {
    const auto j = parse(text, "injection record");
    try {
        std::vector<injection_record> out;
        if (j.is_array()) {
            for (const auto& r : j) {
                out.push_back(record_from(r));
            }
        } else {
            out.push_back(record_from(j));
        }
        return out;
    } catch (const json::exception& e) {
        throw data_error(std::string("injection record: ") + e.what());
    }
}

signature signature_from_json(std::string_view text) {
    const auto j = parse(text, "signature");
    try {
        signature s;
        s.name = j.at("name").get<std::string>();
        for (const auto& [name, v] : j.at("offsets").items()) {
            s.offsets.emplace_back(name, v.get<double>());
        }
        return s;
    } catch (const json::exception& e) {
        throw data_error(std::string("signature: ") + e.what());
    }
}

std::string signature_to_json(const signature& sig) {
    json offsets = json::object();
    for (const auto& [name, v] : sig.offsets) {
        offsets[name] = v;
    }
    return json{{"name", sig.name}, {"offsets", offsets}}.dump(1) + "\n";
}

std::string verdicts_to_csv(const std::vector<row_verdict>& verdicts) {
    std::string out = "engine,timestamp,distance,bmu,threshold,healthy,rule,window_first,window_last\n";
    for (const auto& v : verdicts) {
        out += std::to_string(v.key.engine) + "," + std::to_string(v.key.time) + "," + format_double(v.result.distance) +
               "," + std::to_string(v.result.bmu) + "," + format_double(v.result.threshold) + "," +
               (v.result.healthy ? "1" : "0") + "," + to_string(v.result.rule) + "," +
               std::to_string(v.key.window_first) + "," + std::to_string(v.key.window_last) + "\n";
    }
    return out;
}

namespace {

template <typename T>
T field_as(std::string_view text, std::size_t line, const char* column) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw data_error("verdicts line " + std::to_string(line) + ", column " + column + ": cannot parse '" +
                         std::string(text) + "'");
    }
    return value;
}

}  // namespace

std::vector<row_verdict> verdicts_from_csv(std::string_view text) {
    std::vector<row_verdict> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (lineno == 1 || line.empty()) {
            continue;
        }
        std::vector<std::string_view> f;
        std::string_view rest(line);
        while (true) {
            const auto c = rest.find(',');
            f.push_back(rest.substr(0, c));
            if (c == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(c + 1);
        }
        if (f.size() != 9) {
            throw data_error("verdicts line " + std::to_string(lineno) + ": expected 9 fields");
        }
        row_verdict v;
        v.key.engine = field_as<engine_id>(f[0], lineno, "engine");
        v.key.time = field_as<timestamp>(f[1], lineno, "timestamp");
        v.result.distance = field_as<double>(f[2], lineno, "distance");
        v.result.bmu = field_as<std::size_t>(f[3], lineno, "bmu");
        v.result.threshold = field_as<double>(f[4], lineno, "threshold");
        v.result.healthy = field_as<int>(f[5], lineno, "healthy") != 0;
        v.result.rule = parse_enum<detection_mode>(std::string(f[6]),
                                                   {{"global", detection_mode::global}, {"local", detection_mode::local}});
        v.key.window_first = field_as<timestamp>(f[7], lineno, "window_first");
        v.key.window_last = field_as<timestamp>(f[8], lineno, "window_last");
        out.push_back(v);
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    out << text;
}

}  // namespace hmsom::io
