#include "config.hpp"

#include <fstream>
#include <set>

#include "spectracal/cube_io.hpp"
#include "spectracal/errors.hpp"

namespace spectracal::app {

namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects any it was not asked about.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    template <typename T>
    void read(const char* key, T& target) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            target = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + " has the wrong type");
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    Section child(const char* key) {
        seen_.insert(key);
        return Section(j_.contains(key) ? j_.at(key) : empty_object(), where(key));
    }

    const json& raw(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) throw ConfigError("unknown key " + where(item.key()));
        }
    }

    std::string where(const std::string& key = {}) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    static const json& empty_object() {
        static const json e = json::object();
        return e;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_interval(Section& s, const char* key, illum::Interval& iv) {
    std::vector<double> v{iv.lo, iv.hi};
    s.read(key, v);
    if (v.size() != 2) throw ConfigError(s.where(key) + " must be [lo, hi]");
    iv = {v[0], v[1]};
}

void read_range(Section& s, const char* key, double& lo, double& hi) {
    illum::Interval iv{lo, hi};
    read_interval(s, key, iv);
    lo = iv.lo;
    hi = iv.hi;
}

}  // namespace

void RunConfig::resolve() {
    const WavelengthGrid g = grid.grid();
    scene.grid = g;
    bank.grid = g;
    bank.height = scene.height;
    bank.width = scene.width;
    net.height = scene.height;
    net.width = scene.width;
    net.bands = grid.bands;
    benchmark.path_length = scene.path_length;
}

std::size_t RunConfig::bank_size() const {
    return bank.n_sim + bank.n_mix + (bank.emit_measured ? bank.n_led_pool : 0);
}

void RunConfig::validate() const {
    try {
        (void)grid.grid();
        if (scene_count == 0) throw ConfigError("scenes.count must be positive");
        scene.validate();
        bank.validate();
        net.validate();
        train.validate();
        benchmark.validate();
        if (split.test_scenes == 0 || split.test_scenes >= scene_count)
            throw ConfigError("split.test_scenes must be in [1, scenes.count)");
        if (split.test_illuminants == 0 || split.test_illuminants >= bank_size())
            throw ConfigError("split.test_illuminants must be in [1, bank size)");
        if (fit.starts < 1 || fit.max_iterations < 1)
            throw ConfigError("fit.starts and fit.max_iterations must be positive");
        if (output.empty()) throw ConfigError("output must not be empty");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    Section root(j, "");
    root.read("seed", c.seed);
    {
        Section s = root.child("grid");
        s.read("start_nm", c.grid.start_nm);
        s.read("step_nm", c.grid.step_nm);
        s.read("bands", c.grid.bands);
        s.finish();
    }
    {
        Section s = root.child("scenes");
        s.read("count", c.scene_count);
        s.read("height", c.scene.height);
        s.read("width", c.scene.width);
        s.read("regions", c.scene.regions);
        s.read("variation", c.scene.variation);
        s.read("field_modes", c.scene.field_modes);
        s.read("path_length", c.scene.path_length);
        s.read("base_scatter", c.scene.base_scatter);
        if (s.has("classes")) {
            const json& arr = s.raw("classes");
            if (!arr.is_array()) throw ConfigError("scenes.classes must be an array");
            c.scene.classes.clear();
            for (std::size_t k = 0; k < arr.size(); ++k) {
                Section cs(arr[k], "scenes.classes[" + std::to_string(k) + "]");
                illum::TissueComposition t{};
                cs.read("oxy", t.oxy);
                cs.read("deoxy", t.deoxy);
                cs.read("water", t.water);
                cs.finish();
                c.scene.classes.push_back(t);
            }
        }
        s.finish();
    }
    {
        Section s = root.child("bank");
        s.read("n_sim", c.bank.n_sim);
        s.read("n_mix", c.bank.n_mix);
        s.read("n_led_pool", c.bank.n_led_pool);
        s.read("emit_measured", c.bank.emit_measured);
        s.read("clusters", c.bank.clusters);
        s.read("kappa", c.bank.kappa);
        read_range(s, "stray", c.bank.stray_min, c.bank.stray_max);
        read_range(s, "alpha", c.bank.alpha_lo, c.bank.alpha_hi);
        s.read("min_relative_intensity", c.bank.min_relative_intensity);
        s.read("max_attempts", c.bank.max_attempts);
        Section r = s.child("ranges");
        read_interval(r, "a", c.bank.ranges.a);
        read_interval(r, "b", c.bank.ranges.b);
        read_interval(r, "c", c.bank.ranges.c);
        read_interval(r, "d", c.bank.ranges.d);
        r.finish();
        s.finish();
    }
    {
        Section s = root.child("split");
        s.read("test_scenes", c.split.test_scenes);
        s.read("test_illuminants", c.split.test_illuminants);
        s.finish();
    }
    {
        Section s = root.child("net");
        s.read("encoder_widths", c.net.encoder_widths);
        s.read("blocks_per_stage", c.net.blocks_per_stage);
        s.read("kernel", c.net.kernel);
        s.read("head_width", c.net.head_width);
        s.read("skip_connections", c.net.skip_connections);
        s.read("residual_init_scale", c.net.residual_init_scale);
        std::string out = c.net.output == nn::OutputActivation::Softplus ? "softplus" : "identity";
        s.read("output", out);
        if (out == "softplus") {
            c.net.output = nn::OutputActivation::Softplus;
        } else if (out == "identity") {
            c.net.output = nn::OutputActivation::Identity;
        } else {
            throw ConfigError("net.output must be softplus or identity");
        }
        s.finish();
    }
    {
        Section s = root.child("train");
        s.read("epochs", c.train.epochs);
        s.read("batch_size", c.train.batch_size);
        s.read("lr_start", c.train.lr_start);
        s.read("lr_end", c.train.lr_end);
        s.read("beta1", c.train.beta1);
        s.read("beta2", c.train.beta2);
        s.read("epsilon", c.train.adam_epsilon);
        s.read("augment", c.train.augment);
        s.finish();
    }
    {
        Section s = root.child("fit");
        s.read("starts", c.fit.starts);
        s.read("max_iterations", c.fit.max_iterations);
        s.finish();
    }
    {
        Section s = root.child("benchmark");
        if (s.has("methods")) {
            std::vector<std::string> names;
            s.read("methods", names);
            c.benchmark.methods.clear();
            for (const auto& n : names) {
                try {
                    c.benchmark.methods.push_back(eval::method_from_string(n));
                } catch (const Error& e) {
                    throw ConfigError(std::string("benchmark.methods: ") + e.what());
                }
            }
        }
        s.read("tau", c.benchmark.tau);
        s.read("top_fraction", c.benchmark.top_fraction);
        s.read("illuminants_per_scene", c.benchmark.illuminants_per_scene);
        s.finish();
    }
    std::string out = c.output.string();
    root.read("output", out);
    c.output = out;
    root.finish();

    c.fit.ranges = c.bank.ranges;
    c.resolve();
    c.validate();
    return c;
}

nlohmann::json to_json(const RunConfig& c) {
    json classes = json::array();
    for (const auto& t : c.scene.classes)
        classes.push_back({{"oxy", t.oxy}, {"deoxy", t.deoxy}, {"water", t.water}});
    json methods = json::array();
    for (auto m : c.benchmark.methods) methods.push_back(eval::to_string(m));
    auto iv = [](const illum::Interval& i) { return json::array({i.lo, i.hi}); };
    return {
        {"seed", c.seed},
        {"grid", {{"start_nm", c.grid.start_nm}, {"step_nm", c.grid.step_nm}, {"bands", c.grid.bands}}},
        {"scenes",
         {{"count", c.scene_count},
          {"height", c.scene.height},
          {"width", c.scene.width},
          {"regions", c.scene.regions},
          {"variation", c.scene.variation},
          {"field_modes", c.scene.field_modes},
          {"path_length", c.scene.path_length},
          {"base_scatter", c.scene.base_scatter},
          {"classes", classes}}},
        {"bank",
         {{"n_sim", c.bank.n_sim},
          {"n_mix", c.bank.n_mix},
          {"n_led_pool", c.bank.n_led_pool},
          {"emit_measured", c.bank.emit_measured},
          {"clusters", c.bank.clusters},
          {"kappa", c.bank.kappa},
          {"stray", {c.bank.stray_min, c.bank.stray_max}},
          {"alpha", {c.bank.alpha_lo, c.bank.alpha_hi}},
          {"min_relative_intensity", c.bank.min_relative_intensity},
          {"max_attempts", c.bank.max_attempts},
          {"ranges",
           {{"a", iv(c.bank.ranges.a)},
            {"b", iv(c.bank.ranges.b)},
            {"c", iv(c.bank.ranges.c)},
            {"d", iv(c.bank.ranges.d)}}}}},
        {"split", {{"test_scenes", c.split.test_scenes}, {"test_illuminants", c.split.test_illuminants}}},
        {"net",
         {{"encoder_widths", c.net.encoder_widths},
          {"blocks_per_stage", c.net.blocks_per_stage},
          {"kernel", c.net.kernel},
          {"head_width", c.net.head_width},
          {"skip_connections", c.net.skip_connections},
          {"residual_init_scale", c.net.residual_init_scale},
          {"output", c.net.output == nn::OutputActivation::Softplus ? "softplus" : "identity"}}},
        {"train",
         {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"lr_start", c.train.lr_start},
          {"lr_end", c.train.lr_end},
          {"beta1", c.train.beta1},
          {"beta2", c.train.beta2},
          {"epsilon", c.train.adam_epsilon},
          {"augment", c.train.augment}}},
        {"fit", {{"starts", c.fit.starts}, {"max_iterations", c.fit.max_iterations}}},
        {"benchmark",
         {{"methods", methods},
          {"tau", c.benchmark.tau},
          {"top_fraction", c.benchmark.top_fraction},
          {"illuminants_per_scene", c.benchmark.illuminants_per_scene}}},
        {"output", c.output.string()},
    };
}

RunConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(j);
}

Rng stream(const RunConfig& config, const char* name) { return Rng::named(config.seed, name); }

}  // namespace spectracal::app
