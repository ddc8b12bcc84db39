#include "spectracal/eval/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "spectracal/baselines.hpp"
#include "spectracal/calibration.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/eval/metrics.hpp"
#include "spectracal/eval/unmix.hpp"
#include "spectracal/parallel.hpp"
#include "spectracal/rng.hpp"

namespace spectracal::eval {

std::string to_string(Method m) {
    switch (m) {
        case Method::None: return "none";
        case Method::WhiteTile: return "whitetile";
        case Method::Grayworld: return "grayworld";
        case Method::Maxrgb: return "maxrgb";
        case Method::Specular: return "specular";
        case Method::Neural: return "neural";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    for (Method m : all_methods()) {
        if (to_string(m) == s) return m;
    }
    throw ParameterError("unknown method '" + s + "'");
}

std::vector<Method> all_methods() {
    return {Method::None, Method::WhiteTile, Method::Grayworld,
            Method::Maxrgb, Method::Specular, Method::Neural};
}

void BenchmarkConfig::validate() const {
    if (methods.empty()) throw ConfigError("benchmark method list is empty");
    std::set<Method> seen(methods.begin(), methods.end());
    if (seen.size() != methods.size()) throw ConfigError("benchmark methods repeat");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("benchmark tau must be >= 0");
    if (!(top_fraction > 0.0 && top_fraction <= 1.0))
        throw ConfigError("benchmark top_fraction must be in (0, 1]");
    if (!(path_length > 0.0)) throw ConfigError("benchmark path_length must be positive");
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double CaseRow::dsc_mean() const { return mean_of(dsc); }
double CaseRow::nsd_mean() const { return mean_of(nsd); }

const GroupSummary& EvalReport::group(const std::string& method, const std::string& scenario) const {
    for (const auto& g : groups) {
        if (g.method == method && g.scenario == scenario) return g;
    }
    throw std::out_of_range("no report group " + method + "/" + scenario);
}

std::vector<GroupSummary> aggregate(std::span<const CaseRow> rows, std::size_t n_classes) {
    struct Acc {
        std::vector<std::int64_t> scene_order;
        std::map<std::int64_t, std::vector<const CaseRow*>> by_scene;
        std::size_t cases = 0;
    };
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, Acc> accs;
    auto push = [&](const std::string& method, const std::string& scenario, const CaseRow& r) {
        auto key = std::make_pair(method, scenario);
        auto [it, fresh] = accs.try_emplace(key);
        if (fresh) keys.push_back(key);
        auto& acc = it->second;
        auto& list = acc.by_scene[r.scene_id];
        if (list.empty()) acc.scene_order.push_back(r.scene_id);
        list.push_back(&r);
        ++acc.cases;
    };
    for (const auto& r : rows) {
        if (r.dsc.size() != n_classes || r.nsd.size() != n_classes)
            throw DimensionError("case row has the wrong number of classes");
        push(r.method, r.scenario, r);
        if (r.scenario != kAllScenarios && r.scenario != kReferenceScenario)
            push(r.method, kAllScenarios, r);
    }
    // Reference rows form their own "all" group too, so every method has one.
    for (const auto& r : rows) {
        if (r.scenario == kReferenceScenario) push(r.method, kAllScenarios, r);
    }

    std::vector<GroupSummary> out;
    for (const auto& key : keys) {
        const auto& acc = accs.at(key);
        GroupSummary g;
        g.method = key.first;
        g.scenario = key.second;
        g.scenes = acc.scene_order.size();
        g.cases = acc.cases;
        g.dsc.assign(n_classes, 0.0);
        g.nsd.assign(n_classes, 0.0);
        for (auto scene : acc.scene_order) {
            const auto& list = acc.by_scene.at(scene);
            const double n = static_cast<double>(list.size());
            double cs = 0.0, dm = 0.0, nm = 0.0, mo = 0.0, mt = 0.0, mw = 0.0;
            std::vector<double> d(n_classes, 0.0), s(n_classes, 0.0);
            for (const CaseRow* r : list) {
                cs += r->cosine_sim;
                dm += r->dsc_mean();
                nm += r->nsd_mean();
                mo += r->mae_oxy;
                mt += r->mae_total_absorber;
                mw += r->mae_water;
                for (std::size_t c = 0; c < n_classes; ++c) {
                    d[c] += r->dsc[c];
                    s[c] += r->nsd[c];
                }
            }
            g.cosine_sim += cs / n;
            g.dsc_mean += dm / n;
            g.nsd_mean += nm / n;
            g.mae_oxy += mo / n;
            g.mae_total_absorber += mt / n;
            g.mae_water += mw / n;
            for (std::size_t c = 0; c < n_classes; ++c) {
                g.dsc[c] += d[c] / n;
                g.nsd[c] += s[c] / n;
            }
        }
        const double ns = static_cast<double>(g.scenes);
        g.cosine_sim /= ns;
        g.dsc_mean /= ns;
        g.nsd_mean /= ns;
        g.mae_oxy /= ns;
        g.mae_total_absorber /= ns;
        g.mae_water /= ns;
        for (std::size_t c = 0; c < n_classes; ++c) {
            g.dsc[c] /= ns;
            g.nsd[c] /= ns;
        }
        out.push_back(std::move(g));
    }
    return out;
}

namespace {

struct SceneReference {
    UnmixResult unmixed;
    std::vector<double> total;
    std::vector<double> water;
};

CaseRow score(const HsiCube& cube, const illum::SceneTruth& truth, const SceneReference& ref,
              const BenchmarkInputs& in, const BenchmarkConfig& cfg) {
    CaseRow row;
    row.cosine_sim = mean_pixel_cosine(cube, truth.cube);
    const LabelMask seg = centroid_segment(cube, in.centroids);
    for (std::size_t c = 0; c < truth.n_classes; ++c) {
        row.dsc.push_back(dsc(seg, truth.labels, static_cast<int>(c)));
        row.nsd.push_back(nsd(seg, truth.labels, static_cast<int>(c), cfg.tau));
    }
    const UnmixResult u = unmix(cube, *in.basis, cfg.path_length);
    row.mae_oxy = mae(u.oxygenation, ref.unmixed.oxygenation);
    row.mae_total_absorber = mae(u.total_hemoglobin(), ref.total);
    row.mae_water = mae(u.water(), ref.water);
    return row;
}

HsiCube scale_to_mean_one(const HsiCube& raw, const Spectrum& l1_illuminant) {
    std::vector<double> v(l1_illuminant.values().begin(), l1_illuminant.values().end());
    for (double& x : v) x *= static_cast<double>(v.size());
    return baselines::apply_global(raw, Spectrum(std::move(v), raw.grid()));
}

HsiCube recalibrate_with(Method m, const HsiCube& raw, const WhiteRefImage& white,
                         const BenchmarkInputs& in, const BenchmarkConfig& cfg) {
    switch (m) {
        case Method::None: return raw;
        case Method::WhiteTile: return calibrate(raw, white);
        case Method::Grayworld: return scale_to_mean_one(raw, baselines::grayworld(raw));
        case Method::Maxrgb: return scale_to_mean_one(raw, baselines::maxrgb(raw));
        case Method::Specular:
            return scale_to_mean_one(raw, baselines::specular_highlight(raw, cfg.top_fraction));
        case Method::Neural: return nn::recalibrate(*in.network, *in.params, raw);
    }
    throw ParameterError("unhandled method");
}

}  // namespace

EvalReport run_benchmark(const BenchmarkInputs& in, const BenchmarkConfig& cfg) {
    cfg.validate();
    if (in.test_bank == nullptr || in.test_bank->empty()) throw ConfigError("no test illuminants");
    if (in.scenes.empty()) throw ConfigError("no test scenes");
    if (in.basis == nullptr) throw ConfigError("no chromophore basis");
    if (in.scene_ids.size() != in.scenes.size()) throw DimensionError("scene ids do not match scenes");
    const std::set<std::size_t> train_ids(in.train_illuminant_ids.begin(),
                                          in.train_illuminant_ids.end());
    for (const auto& item : in.test_bank->items()) {
        if (train_ids.count(item.id))
            throw ConfigError("illuminant " + std::to_string(item.id) +
                              " is in both the training and the test set");
    }
    const bool wants_neural =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::Neural) != cfg.methods.end();
    if (wants_neural && (in.network == nullptr || in.params == nullptr))
        throw ConfigError("neural method requested without a model");
    if (wants_neural && !in.network->matches(*in.params))
        throw ConfigError("model parameters do not match the network layout");

    const std::size_t n_scenes = in.scenes.size();
    const std::size_t n_classes = in.scenes[0].n_classes;
    const std::size_t bank_size = in.test_bank->size();
    const std::size_t per_scene = cfg.illuminants_per_scene == 0
                                      ? bank_size
                                      : std::min(cfg.illuminants_per_scene, bank_size);

    // Illuminant choice per scene: all of them, or a seeded subset.
    std::vector<std::vector<std::size_t>> chosen(n_scenes);
    const Rng root(cfg.seed);
    for (std::size_t s = 0; s < n_scenes; ++s) {
        std::vector<std::size_t> idx(bank_size);
        for (std::size_t k = 0; k < bank_size; ++k) idx[k] = k;
        if (per_scene < bank_size) {
            Rng r = root.fork(s);
            shuffle(idx.begin(), idx.end(), r);
            idx.resize(per_scene);
            std::sort(idx.begin(), idx.end());
        }
        chosen[s] = std::move(idx);
    }

    std::vector<SceneReference> refs(n_scenes);
    std::vector<CaseRow> ref_rows(n_scenes);
    parallel_for(n_scenes, [&](std::size_t s) {
        const auto& truth = in.scenes[s];
        if (truth.n_classes != n_classes) throw DimensionError("scenes disagree on class count");
        auto& r = refs[s];
        r.unmixed = unmix(truth.cube, *in.basis, cfg.path_length);
        r.total = r.unmixed.total_hemoglobin();
        r.water = r.unmixed.water();
        CaseRow row = score(truth.cube, truth, r, in, cfg);
        row.scene_id = in.scene_ids[s];
        row.illuminant_id = -1;
        row.scenario = kReferenceScenario;
        row.method = kReferenceMethod;
        ref_rows[s] = std::move(row);
    });

    std::vector<std::pair<std::size_t, std::size_t>> cases;
    for (std::size_t s = 0; s < n_scenes; ++s) {
        for (std::size_t k : chosen[s]) cases.emplace_back(s, k);
    }
    const std::size_t n_methods = cfg.methods.size();
    std::vector<CaseRow> rows(cases.size() * n_methods);
    parallel_for(cases.size(), [&](std::size_t c) {
        const auto [s, k] = cases[c];
        const auto& truth = in.scenes[s];
        const auto& item = (*in.test_bank)[k];
        const HsiCube raw = simulate_raw(truth.cube, item.white);
        for (std::size_t m = 0; m < n_methods; ++m) {
            const HsiCube out = recalibrate_with(cfg.methods[m], raw, item.white, in, cfg);
            CaseRow row = score(out, truth, refs[s], in, cfg);
            row.scene_id = in.scene_ids[s];
            row.illuminant_id = static_cast<std::int64_t>(item.id);
            row.scenario = illum::to_string(item.provenance);
            row.method = to_string(cfg.methods[m]);
            rows[c * n_methods + m] = std::move(row);
        }
    });

    EvalReport report;
    report.n_classes = n_classes;
    report.tau = cfg.tau;
    report.cases = std::move(ref_rows);
    report.cases.insert(report.cases.end(), std::make_move_iterator(rows.begin()),
                        std::make_move_iterator(rows.end()));
    report.groups = aggregate(report.cases, n_classes);
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw FormatError("bad number '" + s + "'");
    }
    if (used != s.size()) throw FormatError("bad number '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw FormatError("bad integer '" + s + "'");
    }
    if (used != s.size()) throw FormatError("bad integer '" + s + "'");
    return v;
}

std::vector<std::string> header_columns(std::size_t n_classes) {
    std::vector<std::string> cols{"scene_id", "illuminant_id", "scenario", "method", "cosine_sim"};
    for (std::size_t c = 0; c < n_classes; ++c) cols.push_back("dsc_class_" + std::to_string(c));
    for (std::size_t c = 0; c < n_classes; ++c) cols.push_back("nsd_class_" + std::to_string(c));
    for (const char* name : {"mae_oxy", "mae_total_absorber", "mae_water", "dsc_mean", "nsd_mean"})
        cols.emplace_back(name);
    return cols;
}

}  // namespace

void write_cases_csv(std::span<const CaseRow> rows, std::size_t n_classes,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const auto cols = header_columns(n_classes);
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << '\n';
    for (const auto& r : rows) {
        if (r.dsc.size() != n_classes || r.nsd.size() != n_classes)
            throw DimensionError("case row has the wrong number of classes");
        out << r.scene_id << ',' << r.illuminant_id << ',' << r.scenario << ',' << r.method << ','
            << fmt(r.cosine_sim);
        for (double v : r.dsc) out << ',' << fmt(v);
        for (double v : r.nsd) out << ',' << fmt(v);
        out << ',' << fmt(r.mae_oxy) << ',' << fmt(r.mae_total_absorber) << ',' << fmt(r.mae_water)
            << ',' << fmt(r.dsc_mean()) << ',' << fmt(r.nsd_mean()) << '\n';
    }
    if (!out) throw Error("failed writing " + path.string());
}

std::pair<std::vector<CaseRow>, std::size_t> read_cases_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty cases CSV");
    const auto head = split_csv(line);
    if (head.size() < 10 || (head.size() - 10) % 2 != 0) throw FormatError("unexpected CSV header");
    const std::size_t n_classes = (head.size() - 10) / 2;
    if (head != header_columns(n_classes)) throw FormatError("unexpected CSV header");
    std::vector<CaseRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != head.size())
            throw FormatError("line " + std::to_string(line_no) + ": wrong column count");
        CaseRow r;
        r.scene_id = parse_int(cells[0]);
        r.illuminant_id = parse_int(cells[1]);
        r.scenario = cells[2];
        r.method = cells[3];
        r.cosine_sim = parse_double(cells[4]);
        for (std::size_t c = 0; c < n_classes; ++c) r.dsc.push_back(parse_double(cells[5 + c]));
        for (std::size_t c = 0; c < n_classes; ++c)
            r.nsd.push_back(parse_double(cells[5 + n_classes + c]));
        r.mae_oxy = parse_double(cells[5 + 2 * n_classes]);
        r.mae_total_absorber = parse_double(cells[6 + 2 * n_classes]);
        r.mae_water = parse_double(cells[7 + 2 * n_classes]);
        rows.push_back(std::move(r));
    }
    return {std::move(rows), n_classes};
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : report.groups) {
        groups.push_back({{"method", g.method},
                          {"scenario", g.scenario},
                          {"scenes", g.scenes},
                          {"cases", g.cases},
                          {"cosine_sim", g.cosine_sim},
                          {"dsc_class", g.dsc},
                          {"nsd_class", g.nsd},
                          {"dsc_mean", g.dsc_mean},
                          {"nsd_mean", g.nsd_mean},
                          {"mae_oxy", g.mae_oxy},
                          {"mae_total_absorber", g.mae_total_absorber},
                          {"mae_water", g.mae_water}});
    }
    return {{"n_classes", report.n_classes},
            {"tau", report.tau},
            {"aggregation", "mean per scene, then mean over scenes"},
            {"groups", std::move(groups)}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.n_classes = j.at("n_classes").get<std::size_t>();
        r.tau = j.at("tau").get<double>();
        for (const auto& gj : j.at("groups")) {
            GroupSummary g;
            g.method = gj.at("method").get<std::string>();
            g.scenario = gj.at("scenario").get<std::string>();
            g.scenes = gj.at("scenes").get<std::size_t>();
            g.cases = gj.at("cases").get<std::size_t>();
            g.cosine_sim = gj.at("cosine_sim").get<double>();
            g.dsc = gj.at("dsc_class").get<std::vector<double>>();
            g.nsd = gj.at("nsd_class").get<std::vector<double>>();
            g.dsc_mean = gj.at("dsc_mean").get<double>();
            g.nsd_mean = gj.at("nsd_mean").get<double>();
            g.mae_oxy = gj.at("mae_oxy").get<double>();
            g.mae_total_absorber = gj.at("mae_total_absorber").get<double>();
            g.mae_water = gj.at("mae_water").get<double>();
            r.groups.push_back(std::move(g));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad report JSON: ") + e.what());
    }
}

}  // namespace spectracal::eval
