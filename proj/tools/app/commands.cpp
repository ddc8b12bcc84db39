#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "spectracal/baselines.hpp"
#include "spectracal/calibration.hpp"
#include "spectracal/cube_io.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/eval/segment.hpp"

namespace spectracal::app {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

// Dataset geometry wins over a separately supplied config; anything else must agree.
RunConfig for_dataset(const RunConfig& config, const Dataset& data) {
    const RunConfig& d = data.config;
    if (!(config.grid.grid() == d.grid.grid()) || config.scene.height != d.scene.height ||
        config.scene.width != d.scene.width)
        throw ConfigError("config grid or scene size differs from the dataset's");
    return config;
}

}  // namespace

Dataset cmd_synth(const RunConfig& config, const fs::path& out) {
    Dataset d = synthesize(config);
    ensure_dir(out);
    write_dataset(d, out);
    return d;
}

illum::FitResult cmd_fit(const fs::path& csv, const RunConfig& config, const fs::path& out_json,
                         std::ostream& log) {
    std::ifstream in(csv);
    if (!in) throw Error("cannot read " + csv.string());
    std::vector<double> nm;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError(csv.string() + ":" + std::to_string(line_no) + ": expected two columns");
        const std::string a = line.substr(0, comma);
        const std::string b = line.substr(comma + 1);
        char* end_a = nullptr;
        char* end_b = nullptr;
        const double x = std::strtod(a.c_str(), &end_a);
        const double y = std::strtod(b.c_str(), &end_b);
        const bool ok_a = end_a != a.c_str() && *end_a == '\0';
        const bool ok_b = end_b != b.c_str() && *end_b == '\0';
        if (!ok_a || !ok_b) {
            if (nm.empty() && values.empty() && line_no == 1) continue;  // header
            throw FormatError(csv.string() + ":" + std::to_string(line_no) + ": not numeric");
        }
        nm.push_back(x);
        values.push_back(y);
    }
    if (nm.size() < 4) throw FormatError(csv.string() + ": need at least 4 samples");
    const Spectrum target(std::move(values), WavelengthGrid(std::move(nm)));
    illum::FitOptions opts = config.fit;
    opts.seed = stream(config, "fit").seed();
    const auto r = illum::fit_halogen(target, opts);
    log << std::setprecision(10) << "a=" << r.params.a << " b=" << r.params.b << " c=" << r.params.c
        << " d=" << r.params.d << " rmse=" << r.rmse << " converged_starts=" << r.converged_starts
        << '\n';
    if (!out_json.empty()) {
        write_json_file(out_json, {{"a", r.params.a},
                                   {"b", r.params.b},
                                   {"c", r.params.c},
                                   {"d", r.params.d},
                                   {"rmse", r.rmse},
                                   {"converged_starts", r.converged_starts}});
    }
    return r;
}

TrainOutputs cmd_train(const fs::path& dataset, const RunConfig& config, const fs::path& out,
                       std::ostream& log) {
    const Dataset data = read_dataset(dataset);
    const RunConfig cfg = for_dataset(config, data);
    const auto scenes = data.scenes_for(data.split.train_scenes);
    const auto bank = data.bank.subset(data.split.train_illuminants);
    const nn::Network network(cfg.net);
    Rng init_rng = stream(cfg, "train").fork(0);
    nn::NetParams init = network.init_params(init_rng);
    nn::TrainConfig tc = cfg.train;
    tc.seed = stream(cfg, "train").fork(1).seed();

    const auto start = std::chrono::steady_clock::now();
    auto result = nn::train(network, std::move(init), bank, scenes, tc, [&](std::size_t e, double loss) {
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log << "epoch " << e << "/" << tc.epochs << " loss " << std::setprecision(6) << loss
            << " (" << std::fixed << std::setprecision(1) << t << " s)" << std::defaultfloat << '\n'
            << std::flush;
    });

    ensure_dir(out);
    TrainOutputs o{std::move(result), out / "model.scnp", out / "loss.csv"};
    nn::write_params(o.result.params, o.model);
    nlohmann::json meta{{"kind", "model"},
                        {"net", nn::to_json(cfg.net)},
                        {"train", to_json(cfg)["train"]},
                        {"seed", cfg.seed},
                        {"train_scenes", data.split.train_scenes},
                        {"train_illuminants", data.split.train_illuminants},
                        {"parameters", o.result.params.count()}};
    write_meta(o.model, meta);
    nn::write_loss_csv(o.result.loss_curve, o.loss_csv);
    return o;
}

CalibrationMethod parse_calibration_method(const std::string& text) {
    CalibrationMethod m;
    const std::string prefix = "whitetile:";
    if (text.rfind(prefix, 0) == 0) {
        m.method = eval::Method::WhiteTile;
        m.white = text.substr(prefix.size());
        if (m.white.empty()) throw ParameterError("whitetile needs a path: whitetile:PATH");
        return m;
    }
    if (text == "whitetile") throw ParameterError("whitetile needs a path: whitetile:PATH");
    if (text == "none") throw ParameterError("method 'none' is only available in evaluate");
    m.method = eval::method_from_string(text);
    return m;
}

LoadedModel load_model(const fs::path& path) {
    if (!fs::exists(path)) throw Error("model file not found: " + path.string());
    auto meta = read_meta(path);
    if (!meta || !meta->contains("net"))
        throw FormatError("model metadata missing: " + meta_path(path).string());
    nn::Network network(nn::net_config_from_json(meta->at("net")));
    nn::NetParams params = nn::read_params(path);
    if (!network.matches(params)) throw FormatError("model parameters do not match its metadata");
    return {std::move(network), std::move(params), std::move(*meta)};
}

void cmd_calibrate(const CalibrationMethod& method, const fs::path& input, const fs::path& output,
                   const fs::path& model, double top_fraction) {
    const HsiCube raw = read_cube(input);
    HsiCube result = raw;
    switch (method.method) {
        case eval::Method::Neural: {
            if (model.empty()) throw ParameterError("the neural method needs --model");
            const auto m = load_model(model);
            result = nn::recalibrate(m.network, m.params, raw);
            break;
        }
        case eval::Method::WhiteTile:
            result = calibrate(raw, WhiteRefImage(read_cube(method.white)));
            break;
        case eval::Method::Grayworld:
            result = baselines::apply_global(raw, baselines::grayworld(raw));
            break;
        case eval::Method::Maxrgb:
            result = baselines::apply_global(raw, baselines::maxrgb(raw));
            break;
        case eval::Method::Specular:
            result = baselines::apply_global(raw, baselines::specular_highlight(raw, top_fraction));
            break;
        case eval::Method::None:
            break;
    }
    if (output.has_parent_path()) ensure_dir(output.parent_path());
    write_cube(result, output);
}

eval::EvalReport cmd_evaluate(const fs::path& dataset, const fs::path& model, const RunConfig& config,
                              const fs::path& out, std::ostream& log) {
    const Dataset data = read_dataset(dataset);
    const RunConfig cfg = for_dataset(config, data);
    cfg.benchmark.validate();
    const auto test_scenes = data.scenes_for(data.split.test_scenes);
    const auto train_scenes = data.scenes_for(data.split.train_scenes);
    const auto test_bank = data.bank.subset(data.split.test_illuminants);
    const auto basis = illum::chromophore_basis(cfg.scene.grid);

    eval::BenchmarkInputs in;
    in.scenes = test_scenes;
    for (auto id : data.split.test_scenes) in.scene_ids.push_back(static_cast<std::int64_t>(id));
    in.test_bank = &test_bank;
    in.train_illuminant_ids = data.split.train_illuminants;
    in.centroids = eval::class_centroids(train_scenes);
    in.basis = &basis;

    std::optional<LoadedModel> loaded;
    const bool wants_neural = std::find(cfg.benchmark.methods.begin(), cfg.benchmark.methods.end(),
                                        eval::Method::Neural) != cfg.benchmark.methods.end();
    if (wants_neural) {
        if (model.empty()) throw ConfigError("the neural method needs a model");
        loaded = load_model(model);
        in.network = &loaded->network;
        in.params = &loaded->params;
        try {
            in.train_illuminant_ids = loaded->meta.at("train_illuminants").get<std::vector<std::size_t>>();
        } catch (const nlohmann::json::exception&) {
            throw FormatError("model metadata lacks train_illuminants");
        }
    }
    eval::BenchmarkConfig bc = cfg.benchmark;
    bc.seed = stream(cfg, "benchmark").seed();
    const auto start = std::chrono::steady_clock::now();
    eval::EvalReport report = eval::run_benchmark(in, bc);
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log << report.cases.size() << " cases in " << std::fixed << std::setprecision(1) << t << " s"
        << std::defaultfloat << '\n';

    ensure_dir(out);
    eval::write_cases_csv(report.cases, report.n_classes, out / "cases.csv");
    write_json_file(out / "report.json", eval::report_to_json(report));
    return report;
}

eval::EvalReport cmd_report(const fs::path& input, const fs::path& output, std::ostream& log) {
    const fs::path csv = fs::is_directory(input) ? input / "cases.csv" : input;
    auto [rows, n_classes] = eval::read_cases_csv(csv);
    eval::EvalReport report;
    report.n_classes = n_classes;
    report.groups = eval::aggregate(rows, n_classes);
    const fs::path stored = csv.parent_path() / "report.json";
    if (fs::exists(stored)) {
        const auto previous = eval::report_from_json(read_json_file(stored));
        report.tau = previous.tau;
        if (previous.n_classes != report.n_classes || previous.groups != report.groups)
            throw Error("re-aggregated summary differs from " + stored.string());
        log << "summary matches " << stored.string() << '\n';
    }
    report.cases = std::move(rows);
    if (!output.empty()) write_json_file(output, eval::report_to_json(report));
    return report;
}

void print_summary(const eval::EvalReport& report, std::ostream& out) {
    out << std::left << std::setw(10) << "method" << std::setw(20) << "scenario" << std::right
        << std::setw(7) << "cases" << std::setw(11) << "cosine" << std::setw(9) << "dsc"
        << std::setw(9) << "nsd" << std::setw(10) << "mae_oxy" << std::setw(10) << "mae_tha"
        << std::setw(10) << "mae_h2o" << '\n';
    for (const auto& g : report.groups) {
        out << std::left << std::setw(10) << g.method << std::setw(20) << g.scenario << std::right
            << std::setw(7) << g.cases << std::fixed << std::setprecision(6) << std::setw(11)
            << g.cosine_sim << std::setprecision(4) << std::setw(9) << g.dsc_mean << std::setw(9)
            << g.nsd_mean << std::setw(10) << g.mae_oxy << std::setw(10) << g.mae_total_absorber
            << std::setw(10) << g.mae_water << std::defaultfloat << '\n';
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Stray-light robust hyperspectral calibration toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "spectracal 0.1.0");
    app.footer("Default configuration (every key optional; unknown keys are rejected):\n" +
               to_json([] {
                   RunConfig c;
                   c.resolve();
                   return c;
               }()).dump(2) +
               "\n\nEnvironment: SPECTRACAL_THREADS caps worker threads.\n"
               "Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.");

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string dataset;
    std::string model;
    std::string input;
    std::string output;
    std::string method = "neural";

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override the root seed");
        sub->add_option("--out", out_dir, "Output directory (default: config 'output')");
    };
    auto* synth = app.add_subcommand("synth", "Generate scenes, illuminant bank and split");
    common(synth);
    auto* fit = app.add_subcommand("fit", "Fit the halogen model to a spectrum CSV");
    common(fit);
    fit->add_option("--input", input, "CSV of wavelength_nm,intensity")->required();
    fit->add_option("--output", output, "Parameter JSON (default: <out>/fit.json)");
    auto* trn = app.add_subcommand("train", "Train the neural white-reference estimator");
    common(trn);
    trn->add_option("--dataset", dataset, "Dataset directory (default: <out>)");
    auto* cal = app.add_subcommand("calibrate", "Recalibrate one raw cube");
    common(cal);
    cal->add_option("--input", input, "Raw HSIC cube")->required();
    cal->add_option("--output", output, "Calibrated HSIC cube")->required();
    cal->add_option("--method", method, "neural | grayworld | maxrgb | specular | whitetile:PATH")
        ->capture_default_str();
    cal->add_option("--model", model, "Model file for the neural method");
    auto* evl = app.add_subcommand("evaluate", "Benchmark all methods on the held-out split");
    common(evl);
    evl->add_option("--dataset", dataset, "Dataset directory (default: <out>)");
    evl->add_option("--model", model, "Model file (default: <out>/model.scnp)");
    auto* rep = app.add_subcommand("report", "Re-aggregate a per-case CSV");
    common(rep);
    rep->add_option("--input", input, "cases.csv or the directory holding it")->required();
    rep->add_option("--output", output, "Write the re-aggregated summary JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        } else {
            cfg.resolve();
        }
        if (sub->count("--seed")) cfg.seed = seed;
        const fs::path out = out_dir.empty() ? cfg.output : fs::path(out_dir);
        const fs::path data_dir = dataset.empty() ? out : fs::path(dataset);

        if (sub == synth) {
            const Dataset d = cmd_synth(cfg, out);
            std::cout << "wrote " << d.scenes.size() << " scenes and " << d.bank.size()
                      << " illuminants to " << out.string() << '\n';
        } else if (sub == fit) {
            cmd_fit(input, cfg, output.empty() ? fs::path{} : fs::path(output), std::cout);
        } else if (sub == trn) {
            if (config_path.empty()) {
                cfg = read_dataset(data_dir).config;
                if (sub->count("--seed")) cfg.seed = seed;
            }
            const auto o = cmd_train(data_dir, cfg, out, std::cerr);
            const double final_loss = o.result.loss_curve.empty() ? 0.0 : o.result.loss_curve.back();
            std::cout << "model " << o.model.string() << " final loss " << final_loss << '\n';
            if (!std::isfinite(final_loss)) {
                std::cerr << "error: final training loss is not finite\n";
                return kExitRuntime;
            }
        } else if (sub == cal) {
            CalibrationMethod m;
            try {
                m = parse_calibration_method(method);
            } catch (const Error& e) {
                std::cerr << "usage error: " << e.what() << '\n';
                return kExitUsage;
            }
            cmd_calibrate(m, input, output, model, cfg.benchmark.top_fraction);
        } else if (sub == evl) {
            if (config_path.empty()) {
                cfg = read_dataset(data_dir).config;
                if (sub->count("--seed")) cfg.seed = seed;
            }
            const fs::path model_path = model.empty() ? out / "model.scnp" : fs::path(model);
            const auto report = cmd_evaluate(data_dir, model_path, cfg, out, std::cerr);
            print_summary(report, std::cout);
        } else if (sub == rep) {
            const auto report = cmd_report(input, output, std::cerr);
            print_summary(report, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace spectracal::app
