#include "hmsom/cli.hpp"

#include "hmsom/error.hpp"
#include "hmsom/pipeline.hpp"
#include "hmsom/plot.hpp"
#include "hmsom/serialize.hpp"
#include "hmsom/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace hmsom {

namespace {

namespace fs = std::filesystem;

/// Config file reader for JSON documents. Objects become sections, so
/// {"train": {"k": 4}} sets `train --k 4`.
class json_config : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("invalid JSON config: ") + e.what());
        }
        if (!j.is_object()) {
            throw CLI::ConversionError("JSON config must be an object");
        }
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_boolean()) {
            return v.get<bool>() ? "true" : "false";
        }
        if (v.is_number()) {
            return v.dump();
        }
        throw CLI::ConversionError("unsupported JSON config value " + v.dump());
    }

    static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto sub = parents;
                sub.push_back(key);
                collect(value, sub, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) {
                    item.inputs.push_back(scalar(v));
                }
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

bool wants_json_config(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        std::string path;
        if (a == "--config" && i + 1 < argc) {
            path = argv[i + 1];
        } else if (a.rfind("--config=", 0) == 0) {
            path = a.substr(9);
        } else {
            continue;
        }
        auto ext = fs::path(path).extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        return ext == ".json";
    }
    return false;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
    const auto x = text.find_first_of("xX");
    try {
        if (x != std::string::npos) {
            std::size_t used_r = 0;
            std::size_t used_c = 0;
            const auto r = std::stoul(text.substr(0, x), &used_r);
            const auto c = std::stoul(text.substr(x + 1), &used_c);
            if (used_r == x && used_c == text.size() - x - 1 && r > 0 && c > 0) {
                return {r, c};
            }
        }
    } catch (const std::exception&) {
    }
    throw usage_error("--som expects ROWSxCOLS, got '" + text + "'");
}

template <typename E>
E enum_of(const std::string& text, const std::map<std::string, E>& names) {
    const auto it = names.find(text);
    if (it == names.end()) {
        throw usage_error("unknown value '" + text + "'");
    }
    return it->second;
}

const std::map<std::string, detection_mode> mode_names{{"global", detection_mode::global},
                                                       {"local", detection_mode::local}};
const std::map<std::string, defect_shape> shape_names{{"step", defect_shape::step}, {"ramp", defect_shape::ramp}};
const std::map<std::string, truth_labeling> labeling_names{{"centre", truth_labeling::centre},
                                                           {"overlap", truth_labeling::overlap}};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> operational_outputs(const model_bundle& bundle) { return bundle.correction.outputs; }

/// Built-in names ("Defect 3", "defect3", "3") or a JSON file.
std::pair<signature, bool> resolve_signature(const std::string& spec, double lo, double hi) {
    if (fs::path(spec).extension() == ".json" || fs::exists(spec)) {
        return {io::signature_from_json(io::read_file(spec)), false};
    }
    std::string key = lower(spec);
    key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
    if (key.rfind("defect", 0) == 0) {
        key = key.substr(6);
    }
    std::string known;
    for (const auto& sig : default_signature_set(lo, hi)) {
        if (lower(sig.name).substr(7) == key) {
            return {sig, true};
        }
        known += (known.empty() ? "" : ", ") + sig.name;
    }
    throw usage_error("unknown signature '" + spec + "' (built-in: " + known + ")");
}

struct options {
    std::uint64_t seed = 1;
    std::string mode = "global";

    struct {
        std::string out;
        std::string truth;
        std::size_t rows = 2472;
        std::size_t engines = 16;
        double noise_std = 0.05;
        std::uint64_t coefficient_seed = 2024;
        std::vector<engine_id> only_engines;
        timestamp time_offset = 0;
        std::size_t split = 0;
        std::string train_out;
        std::string test_out;
    } generate;

    struct {
        std::string data;
        std::string bundle;
        std::size_t k = 5;
        std::string context_method = "gmm";
        std::string covariance = "full";
        std::size_t em_restarts = 4;
        std::string som = "7x7";
        std::size_t epochs = 50;
        std::string som_init = "pca";
        std::size_t smoothing_width = 7;
        std::string smoothing_scope = "engine";
        double percentile = 99.0;
        std::size_t min_local_count = 10;
        bool scan = false;
        std::size_t scan_max = 10;
    } train;

    struct {
        std::string data;
        std::string signature;
        std::size_t window = 30;
        std::string bundle;
        std::string units = "auto";
        double amplitude_min = 2.0;
        double amplitude_max = 4.0;
        std::string shape = "step";
        std::string out;
        std::string record;
    } inject;

    struct {
        std::string bundle;
        std::string data;
        std::string out;
        std::string plot;
        std::string truth;
    } detect;

    struct {
        std::string bundle;
        std::string data;
        std::size_t window = 30;
        double amplitude_min = 3.0;
        double amplitude_max = 4.0;
        std::string shape = "step";
        std::string labeling = "centre";
        std::vector<std::string> verdicts;
        std::vector<std::string> truth;
        std::string out;
        std::string text;
    } eval;

    struct {
        std::string bundle;
        std::string out_dir;
        std::string format = "both";
        std::string data;
        std::string truth;
        std::size_t cell = 16;
    } maps;
};

int cmd_generate(const options& o, std::ostream& out) {
    const auto& g = o.generate;
    auto cfg = default_generator_config(o.seed, g.coefficient_seed);
    cfg.n_rows = g.rows;
    if (g.engines != cfg.n_engines) {
        // Coefficients exist for the default fleet only; restrict it instead.
        if (g.engines > cfg.n_engines || g.engines == 0) {
            throw usage_error("--engines must be between 1 and " + std::to_string(cfg.n_engines));
        }
        for (std::size_t e = 1; e <= g.engines; ++e) {
            cfg.active_engines.push_back(static_cast<engine_id>(e));
        }
    }
    if (!g.only_engines.empty()) {
        cfg.active_engines = g.only_engines;
    }
    cfg.noise_std = g.noise_std;
    cfg.time_offset = g.time_offset;
    const auto data = generate(cfg);
    save_table(data.table, g.out);
    out << "wrote " << data.table.size() << " rows to " << g.out << "\n";
    if (!g.truth.empty()) {
        io::write_file(g.truth, io::ground_truth_to_json(data.truth));
        out << "wrote ground truth to " << g.truth << "\n";
    }
    if (g.split > 0) {
        if (g.train_out.empty() || g.test_out.empty()) {
            throw usage_error("--split needs --train-out and --test-out");
        }
        const auto parts = split_train_test(data.table, g.split, o.seed);
        save_table(parts.train, g.train_out);
        save_table(parts.test, g.test_out);
        out << "split " << parts.train.size() << " train / " << parts.test.size() << " test rows\n";
        for (const auto& w : parts.warnings) {
            out << "warning: " << w << "\n";
        }
    }
    return 0;
}

int cmd_train(const options& o, std::ostream& out) {
    const auto& t = o.train;
    pipeline_config cfg;
    cfg.context.clusters = t.k;
    cfg.context.method = enum_of<context_method>(t.context_method,
                                                 {{"gmm", context_method::gmm_em}, {"hac", context_method::ward_hac}});
    cfg.context.covariance = enum_of<covariance_type>(
        t.covariance, {{"full", covariance_type::full}, {"diagonal", covariance_type::diagonal}});
    cfg.context.seed = o.seed;
    cfg.context.restarts = t.em_restarts;
    std::tie(cfg.som.rows, cfg.som.cols) = parse_grid(t.som);
    cfg.som.epochs = t.epochs;
    cfg.som.init = enum_of<som_init>(t.som_init, {{"pca", som_init::pca_grid}, {"random", som_init::random_samples}});
    cfg.som.seed = o.seed;
    cfg.smoothing_width = t.smoothing_width;
    cfg.smoothing = enum_of<smoothing_scope>(t.smoothing_scope,
                                             {{"engine", smoothing_scope::engine}, {"global", smoothing_scope::global}});
    cfg.percentile = t.percentile;
    cfg.min_local_count = t.min_local_count;

    const auto table = load_table(t.data);
    if (t.scan) {
        const auto env_names = table.schema.names_with(variable_role::environmental);
        const auto norm = normalize_fit(table);
        const auto env = normalize_apply(table, norm).columns(env_names);
        const auto curve = explained_variance_scan(env, cfg.context, t.scan_max);
        out << "K  explained_variance\n";
        for (std::size_t k = 0; k < curve.size(); ++k) {
            out << k + 1 << "  " << plot::num(curve[k], 4) << "\n";
        }
    }
    const auto result = train_pipeline(table, cfg);
    io::save_bundle(result.bundle, t.bundle);
    const auto& r = result.report;
    const auto& th = result.bundle.thresholds;
    double lo = th.global_upper;
    double hi = th.global_upper;
    for (const auto& u : th.local_upper) {
        if (u) {
            lo = std::min(lo, *u);
            hi = std::max(hi, *u);
        }
    }
    out << "training rows:        " << r.rows << "\n"
        << "smoothed residuals:   " << r.smoothed_rows << "\n"
        << "context clusters:     " << cfg.context.clusters << " (" << t.context_method << ")\n"
        << "explained variance:   " << plot::num(r.explained_variance, 4) << "\n";
    if (cfg.context.method == context_method::gmm_em) {
        out << "EM iterations:        " << r.em_iterations << "\n";
    }
    out << "map:                  " << cfg.som.rows << "x" << cfg.som.cols << ", " << cfg.som.epochs << " epochs\n"
        << "quantization error:   " << plot::num(r.initial_quantization_error, 4) << " -> "
        << plot::num(r.final_quantization_error, 4) << "\n"
        << "global interval:      [0, " << plot::num(th.global_upper, 4) << "]\n"
        << "local uppers:         " << plot::num(lo, 4) << " .. " << plot::num(hi, 4) << " (" << r.local_fallbacks
        << " units fall back to global)\n"
        << "bundle:               " << t.bundle << "\n";
    for (const auto& w : r.warnings) {
        out << "warning: " << w << "\n";
    }
    return 0;
}

int cmd_inject(const options& o, std::ostream& out, std::ostream& err) {
    const auto& in = o.inject;
    auto [sig, builtin] = resolve_signature(in.signature, in.amplitude_min, in.amplitude_max);
    bool residual_units = false;
    if (in.units == "residual") {
        residual_units = true;
    } else if (in.units == "auto") {
        residual_units = builtin && !in.bundle.empty();
    }
    if (residual_units) {
        if (in.bundle.empty()) {
            throw usage_error("--units residual needs --bundle");
        }
        sig = scale_signature(sig, residual_scale_in_table_units(io::load_bundle(in.bundle)));
    } else if (builtin) {
        err << "note: offsets of '" << sig.name << "' applied in table units; pass --bundle to scale them\n";
    }
    const auto table = load_table(in.data);
    const auto result = inject(table, sig, in.window, o.seed, enum_of(in.shape, shape_names));
    save_table(result.table, in.out);
    io::write_file(in.record, io::records_to_json({result.record}));
    out << "injected '" << sig.name << "' into engine " << result.record.engine << " at time "
        << result.record.start << " (" << result.record.length << " rows)\n";
    return 0;
}

std::vector<bool> flags_of(const std::vector<row_verdict>& verdicts) {
    std::vector<bool> f;
    f.reserve(verdicts.size());
    for (const auto& v : verdicts) {
        f.push_back(!v.result.healthy);
    }
    return f;
}

int cmd_detect(const options& o, std::ostream& out) {
    const auto& d = o.detect;
    const auto bundle = io::load_bundle(d.bundle);
    const auto table = load_table(d.data);
    const auto mode = enum_of(o.mode, mode_names);
    const auto p = project(table, bundle);
    const auto verdicts = decide_all(p, bundle, mode);
    io::write_file(d.out, io::verdicts_to_csv(verdicts));
    const auto flags = flags_of(verdicts);
    const auto flagged = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    out << flagged << " of " << verdicts.size() << " rows flagged (" << o.mode << " mode)\n";

    std::vector<injection_record> truth;
    std::vector<bool> labels;
    if (!d.truth.empty()) {
        truth = io::records_from_json(io::read_file(d.truth));
        labels = anomaly_labels(verdicts, truth);
        const auto s = score(verdicts, truth);
        out << "tpr " << plot::num(s.tpr, 4) << ", pfa " << plot::num(s.pfa, 4) << "\n";
    }
    if (!d.plot.empty()) {
        std::vector<double> dist;
        dist.reserve(p.distances.size());
        for (const auto& m : p.distances) {
            dist.push_back(m.distance);
        }
        plot::write_text(d.plot, plot::distance_plot_svg(dist, flags, truth.empty() ? nullptr : &labels,
                                                         bundle.thresholds.global_upper));
    }
    for (const auto& w : p.warnings) {
        out << "warning: " << w << "\n";
    }
    return 0;
}

void write_report(const eval_report& report, const options& o, std::ostream& out) {
    if (!o.eval.out.empty()) {
        io::write_file(o.eval.out, report_csv(report));
    }
    const auto text = report_text(report);
    if (!o.eval.text.empty()) {
        io::write_file(o.eval.text, text);
    }
    out << text;
}

int cmd_eval(const options& o, std::ostream& out) {
    const auto& e = o.eval;
    if (!e.verdicts.empty() || !e.truth.empty()) {
        if (e.verdicts.size() != e.truth.size()) {
            throw usage_error("--verdicts and --truth must be given in pairs");
        }
        std::vector<eval_row> rows;
        for (std::size_t i = 0; i < e.verdicts.size(); ++i) {
            const auto verdicts = io::verdicts_from_csv(io::read_file(e.verdicts[i]));
            const auto truth = io::records_from_json(io::read_file(e.truth[i]));
            const std::string name = truth.empty() ? e.truth[i] : truth.front().signature;
            const auto s = score(verdicts, truth, enum_of(e.labeling, labeling_names), name);
            const bool local = !verdicts.empty() && verdicts.front().result.rule == detection_mode::local;
            auto it = std::find_if(rows.begin(), rows.end(), [&](const eval_row& r) { return r.defect == name; });
            if (it == rows.end()) {
                rows.push_back({name, {}, {}});
                rows.back().global.name = name;
                rows.back().local.name = name;
                it = rows.end() - 1;
            }
            (local ? it->local : it->global) = s;
        }
        write_report(make_report(std::move(rows)), o, out);
        return 0;
    }
    if (e.bundle.empty() || e.data.empty()) {
        throw usage_error("eval needs --bundle and --data, or --verdicts/--truth pairs");
    }
    benchmark_options bo;
    bo.signatures = default_signature_set(e.amplitude_min, e.amplitude_max);
    bo.window = e.window;
    bo.shape = enum_of(e.shape, shape_names);
    bo.labeling = enum_of(e.labeling, labeling_names);
    bo.seed = o.seed;
    write_report(run_defect_benchmark(load_table(e.data), io::load_bundle(e.bundle), bo), o, out);
    return 0;
}

int cmd_export_maps(const options& o, std::ostream& out) {
    const auto& m = o.maps;
    const auto bundle = io::load_bundle(m.bundle);
    const auto format = enum_of<plane_format>(
        m.format, {{"pgm", plane_format::pgm}, {"svg", plane_format::svg}, {"both", plane_format::both}});
    plane_overlay overlay;
    const bool with_overlay = !m.data.empty();
    if (with_overlay) {
        const auto p = project(load_table(m.data), bundle);
        const auto verdicts = decide_all(p, bundle, enum_of(o.mode, mode_names));
        for (const auto& d : p.distances) {
            overlay.bmu.push_back(d.bmu);
        }
        if (!m.truth.empty()) {
            overlay.anomaly = anomaly_labels(verdicts, io::records_from_json(io::read_file(m.truth)));
        } else {
            overlay.anomaly = flags_of(verdicts);
        }
    } else if (!m.truth.empty()) {
        throw usage_error("--truth needs --data");
    }
    fs::create_directories(m.out_dir);
    const auto files = export_component_planes(bundle.som, operational_outputs(bundle), m.out_dir, format,
                                               with_overlay ? &overlay : nullptr, m.cell);
    for (const auto& f : files) {
        out << f.string() << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    options o;
    CLI::App app{"Health-monitoring anomaly detection with self-organizing maps", "hmsom"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML or JSON file with option values; command-line flags take precedence");
    if (wants_json_config(argc, argv)) {
        app.config_formatter(std::make_shared<json_config>());
    }
    app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
    app.add_option("--mode", o.mode, "Decision rule")->check(CLI::IsMember({"global", "local"}))->capture_default_str();

    auto* gen = app.add_subcommand("generate", "Write a synthetic data set and its ground truth");
    auto& g = o.generate;
    gen->add_option("--out", g.out, "Data CSV")->required();
    gen->add_option("--truth", g.truth, "Ground-truth JSON");
    gen->add_option("--rows", g.rows, "Number of rows")->capture_default_str();
    gen->add_option("--engines", g.engines, "Engines 1..N receive rows")->capture_default_str();
    gen->add_option("--only-engines", g.only_engines, "Explicit engine ids receiving rows");
    gen->add_option("--noise-std", g.noise_std, "Noise standard deviation")->capture_default_str();
    gen->add_option("--coefficient-seed", g.coefficient_seed, "Seed of the true correction coefficients")
        ->capture_default_str();
    gen->add_option("--time-offset", g.time_offset, "First timestamp")->capture_default_str();
    gen->add_option("--split", g.split, "Also write a random train/test split with this many training rows");
    gen->add_option("--train-out", g.train_out, "Training CSV for --split");
    gen->add_option("--test-out", g.test_out, "Test CSV for --split");

    auto* train = app.add_subcommand("train", "Fit the pipeline and write a model bundle");
    auto& t = o.train;
    train->add_option("--data", t.data, "Training CSV")->required();
    train->add_option("--bundle", t.bundle, "Output bundle JSON")->required();
    train->add_option("--k", t.k, "Context clusters")->capture_default_str();
    train->add_option("--context-method", t.context_method, "Context clustering")
        ->check(CLI::IsMember({"gmm", "hac"}))
        ->capture_default_str();
    train->add_option("--covariance", t.covariance, "GMM covariance")
        ->check(CLI::IsMember({"full", "diagonal"}))
        ->capture_default_str();
    train->add_option("--em-restarts", t.em_restarts, "EM runs from independent seedings")->capture_default_str();
    train->add_option("--som", t.som, "Map size ROWSxCOLS")->capture_default_str();
    train->add_option("--epochs", t.epochs, "Batch SOM epochs")->capture_default_str();
    train->add_option("--som-init", t.som_init, "Prototype initialization")
        ->check(CLI::IsMember({"pca", "random"}))
        ->capture_default_str();
    train->add_option("--smoothing-width", t.smoothing_width, "Moving-average width")->capture_default_str();
    train->add_option("--smoothing-scope", t.smoothing_scope, "Smooth per engine or over the concatenated series")
        ->check(CLI::IsMember({"engine", "global"}))
        ->capture_default_str();
    train->add_option("--percentile", t.percentile, "Upper interval percentile")->capture_default_str();
    train->add_option("--min-local-count", t.min_local_count, "Training samples needed for a local interval")
        ->capture_default_str();
    train->add_flag("--explained-variance-scan", t.scan, "Print explained variance for K = 1..--scan-max");
    train->add_option("--scan-max", t.scan_max, "Largest K of the scan")->capture_default_str();

    auto* inj = app.add_subcommand("inject", "Corrupt a table with a defect signature");
    auto& in = o.inject;
    inj->add_option("--data", in.data, "Input CSV")->required();
    inj->add_option("--signature", in.signature, "Built-in name (\"Defect 3\") or signature JSON")->required();
    inj->add_option("--window", in.window, "Consecutive rows to corrupt")->capture_default_str();
    inj->add_option("--bundle", in.bundle, "Bundle whose residual spread scales built-in signatures");
    inj->add_option("--units", in.units, "Offset units: table, residual (needs --bundle) or auto")
        ->check(CLI::IsMember({"auto", "table", "residual"}))
        ->capture_default_str();
    inj->add_option("--amplitude-min", in.amplitude_min, "Smallest built-in amplitude")->capture_default_str();
    inj->add_option("--amplitude-max", in.amplitude_max, "Largest built-in amplitude")->capture_default_str();
    inj->add_option("--shape", in.shape, "Defect shape")->check(CLI::IsMember({"step", "ramp"}))->capture_default_str();
    inj->add_option("--out", in.out, "Corrupted CSV")->required();
    inj->add_option("--record", in.record, "Injection record JSON")->required();

    auto* det = app.add_subcommand("detect", "Score a table against a bundle");
    auto& d = o.detect;
    det->add_option("--bundle", d.bundle, "Model bundle")->required();
    det->add_option("--data", d.data, "Test CSV")->required();
    det->add_option("--out", d.out, "Verdict CSV")->required();
    det->add_option("--plot", d.plot, "Distance plot SVG");
    det->add_option("--truth", d.truth, "Injection record JSON, to score and colour the plot");

    auto* ev = app.add_subcommand("eval", "Detection and false-alarm rates per defect");
    auto& e = o.eval;
    ev->add_option("--bundle", e.bundle, "Model bundle (benchmark mode)");
    ev->add_option("--data", e.data, "Healthy test CSV (benchmark mode)");
    ev->add_option("--window", e.window, "Defect window")->capture_default_str();
    ev->add_option("--amplitude-min", e.amplitude_min, "Smallest defect amplitude, residual std")
        ->capture_default_str();
    ev->add_option("--amplitude-max", e.amplitude_max, "Largest defect amplitude, residual std")
        ->capture_default_str();
    ev->add_option("--shape", e.shape, "Defect shape")->check(CLI::IsMember({"step", "ramp"}))->capture_default_str();
    ev->add_option("--labeling", e.labeling, "Which smoothed rows count as anomalous")
        ->check(CLI::IsMember({"centre", "overlap"}))
        ->capture_default_str();
    ev->add_option("--verdicts", e.verdicts, "Verdict CSVs to score");
    ev->add_option("--truth", e.truth, "Injection records, one per verdict CSV");
    ev->add_option("--out", e.out, "Report CSV");
    ev->add_option("--text", e.text, "Report text file");

    auto* maps = app.add_subcommand("export-maps", "Write component planes of the map");
    auto& m = o.maps;
    maps->add_option("--bundle", m.bundle, "Model bundle")->required();
    maps->add_option("--out-dir", m.out_dir, "Output directory")->required();
    maps->add_option("--format", m.format, "Image format")
        ->check(CLI::IsMember({"pgm", "svg", "both"}))
        ->capture_default_str();
    maps->add_option("--data", m.data, "Table whose samples are overlaid on the SVG planes");
    maps->add_option("--truth", m.truth, "Injection records labelling the overlay");
    maps->add_option("--cell", m.cell, "Pixels per unit in PGM output")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 0;
    } catch (const CLI::ParseError& ex) {
        err << "error: " << ex.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    try {
        if (gen->parsed()) {
            return cmd_generate(o, out);
        }
        if (train->parsed()) {
            return cmd_train(o, out);
        }
        if (inj->parsed()) {
            return cmd_inject(o, out, err);
        }
        if (det->parsed()) {
            return cmd_detect(o, out);
        }
        if (ev->parsed()) {
            return cmd_eval(o, out);
        }
        if (maps->parsed()) {
            return cmd_export_maps(o, out);
        }
    } catch (const usage_error& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace hmsom
