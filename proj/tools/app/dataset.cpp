#include "dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <optional>

#include "spectracal/cube_io.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/parallel.hpp"

namespace spectracal::app {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 0x5b117;

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> partition(std::size_t n,
                                                                        std::size_t n_test,
                                                                        Rng rng) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::size_t> test(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {std::move(train), std::move(test)};
}

std::string scene_file(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%04zu.hsic", id);
    return buf;
}

}  // namespace

Split make_split(const RunConfig& config) {
    Split s;
    std::tie(s.train_scenes, s.test_scenes) =
        partition(config.scene_count, config.split.test_scenes, stream(config, "scene").fork(kSplitStream));
    std::tie(s.train_illuminants, s.test_illuminants) = partition(
        config.bank_size(), config.split.test_illuminants, stream(config, "bank").fork(kSplitStream));
    return s;
}

std::vector<illum::SceneTruth> Dataset::scenes_for(const std::vector<std::size_t>& ids) const {
    std::vector<illum::SceneTruth> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(scenes.at(id));
    return out;
}

Dataset synthesize(const RunConfig& config) {
    config.validate();
    Dataset d;
    d.config = config;
    std::vector<std::optional<illum::SceneTruth>> scenes(config.scene_count);
    const Rng scene_root = stream(config, "scene");
    parallel_for(config.scene_count, [&](std::size_t k) {
        Rng r = scene_root.fork(k);
        scenes[k] = illum::synth_scene(config.scene, r);
    });
    for (auto& s : scenes) d.scenes.push_back(std::move(*s));
    Rng bank_rng = stream(config, "bank");
    d.bank = illum::generate_bank(config.bank, bank_rng);
    d.split = make_split(config);
    return d;
}

nlohmann::json truth_to_json(const illum::SceneTruth& t) {
    return {{"kind", "scene"},
            {"n_classes", t.n_classes},
            {"height", t.labels.height},
            {"width", t.labels.width},
            {"labels", t.labels.labels},
            {"concentrations", t.concentrations},
            {"oxygenation", t.oxygenation}};
}

illum::SceneTruth truth_from_json(HsiCube cube, const nlohmann::json& j) {
    try {
        illum::SceneTruth t{std::move(cube), {}, 0, {}, {}};
        t.n_classes = j.at("n_classes").get<std::size_t>();
        t.labels = LabelMask(j.at("height").get<std::size_t>(), j.at("width").get<std::size_t>(),
                             j.at("labels").get<std::vector<int>>());
        t.concentrations = j.at("concentrations").get<std::vector<double>>();
        t.oxygenation = j.at("oxygenation").get<std::vector<double>>();
        if (t.labels.height != t.cube.height() || t.labels.width != t.cube.width() ||
            t.concentrations.size() != t.cube.pixels() * illum::kChromophores ||
            t.oxygenation.size() != t.cube.pixels())
            throw FormatError("scene truth does not match its cube");
        for (int l : t.labels.labels) {
            if (l < 0 || static_cast<std::size_t>(l) >= t.n_classes)
                throw FormatError("scene label out of range");
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("scene truth: ") + e.what());
    }
}

void write_dataset(const Dataset& data, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir / "scenes", ec);
    if (ec) throw Error("cannot create " + (dir / "scenes").string() + ": " + ec.message());
    nlohmann::json scenes = nlohmann::json::array();
    for (std::size_t k = 0; k < data.scenes.size(); ++k) {
        const fs::path file = fs::path("scenes") / scene_file(k);
        write_cube(data.scenes[k].cube, dir / file);
        write_meta(dir / file, truth_to_json(data.scenes[k]));
        scenes.push_back({{"id", k}, {"file", file.generic_string()}});
    }
    illum::write_bank(data.bank, dir / "bank");
    illum::write_chromophore_csv(data.config.scene.grid, dir / "chromophores.csv");
    write_json_file(dir / "dataset.json",
                    {{"format", "spectracal-dataset"},
                     {"version", 1},
                     {"config", to_json(data.config)},
                     {"scenes", scenes},
                     {"bank", "bank"},
                     {"chromophores", "chromophores.csv"},
                     {"split",
                      {{"train_scenes", data.split.train_scenes},
                       {"test_scenes", data.split.test_scenes},
                       {"train_illuminants", data.split.train_illuminants},
                       {"test_illuminants", data.split.test_illuminants}}}});
}

Dataset read_dataset(const fs::path& dir) {
    const fs::path index = dir / "dataset.json";
    if (!fs::exists(index)) throw Error("no dataset at " + dir.string() + " (missing dataset.json)");
    const nlohmann::json j = read_json_file(index);
    Dataset d;
    try {
        if (j.at("format").get<std::string>() != "spectracal-dataset")
            throw FormatError("not a dataset index");
        d.config = config_from_json(j.at("config"));
        for (const auto& s : j.at("scenes")) {
            const fs::path file = dir / s.at("file").get<std::string>();
            auto meta = read_meta(file);
            if (!meta) throw FormatError("missing ground truth for " + file.string());
            d.scenes.push_back(truth_from_json(read_cube(file), *meta));
        }
        const auto& sp = j.at("split");
        d.split.train_scenes = sp.at("train_scenes").get<std::vector<std::size_t>>();
        d.split.test_scenes = sp.at("test_scenes").get<std::vector<std::size_t>>();
        d.split.train_illuminants = sp.at("train_illuminants").get<std::vector<std::size_t>>();
        d.split.test_illuminants = sp.at("test_illuminants").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(index.string() + ": " + e.what());
    }
    d.bank = illum::read_bank(dir / j.at("bank").get<std::string>());
    for (auto id : d.split.train_scenes) {
        if (id >= d.scenes.size()) throw FormatError("split references a missing scene");
    }
    for (auto id : d.split.test_scenes) {
        if (id >= d.scenes.size()) throw FormatError("split references a missing scene");
    }
    return d;
}

}  // namespace spectracal::app
