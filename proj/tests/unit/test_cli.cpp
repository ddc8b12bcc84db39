#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/dataset.hpp"
#include "spectracal/calibration.hpp"
#include "spectracal/cube_io.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/illum/halogen.hpp"
#include "support.hpp"

using namespace spectracal;
using namespace spectracal::app;
using testing_support::slurp;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "spectracal");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json tiny_json() {
    return nlohmann::json::parse(R"({
      "seed": 7,
      "grid": {"bands": 8},
      "scenes": {"count": 6, "height": 8, "width": 8, "regions": 4},
      "bank": {"n_sim": 3, "n_mix": 3, "n_led_pool": 4, "clusters": 2},
      "split": {"test_scenes": 2, "test_illuminants": 2},
      "net": {"encoder_widths": [2, 4], "head_width": 2},
      "train": {"epochs": 2, "batch_size": 2, "lr_start": 1e-3, "lr_end": 1e-4},
      "benchmark": {"illuminants_per_scene": 1}
    })");
}

fs::path write_config(const TempDir& dir, const nlohmann::json& j, const std::string& name = "cfg.json") {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

std::string file_digest(const fs::path& root) {
    std::ostringstream all;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) all << fs::relative(f, root).string() << '\n' << slurp(f) << '\n';
    return all.str();
}

}  // namespace

TEST(Config, DefaultsResolveAndValidate) {
    RunConfig c;
    c.resolve();
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.net.bands, 16u);
    EXPECT_EQ(c.bank_size(), 200u);
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, StrictParsingGivesUsageExit) {
    TempDir dir("cfg");
    auto unknown = tiny_json();
    unknown["scenes"]["colour"] = 1;
    auto zero = tiny_json();
    zero["scenes"]["count"] = 0;
    auto empty_methods = tiny_json();
    empty_methods["benchmark"]["methods"] = nlohmann::json::array();
    auto skips = tiny_json();
    skips["net"]["skip_connections"] = true;
    auto wrong_type = tiny_json();
    wrong_type["seed"] = "seven";
    int k = 0;
    for (const auto& j : {unknown, zero, empty_methods, skips, wrong_type}) {
        const auto p = write_config(dir, j, "bad" + std::to_string(k++) + ".json");
        EXPECT_EQ(run({"synth", "--config", p.string(), "--out", (dir / "o").string()}), kExitUsage)
            << j.dump();
    }
    EXPECT_EQ(run({"synth", "--bogus"}), kExitUsage);
    EXPECT_EQ(run({}), kExitUsage);
}

TEST(Synth, ByteIdenticalAcrossRuns) {
    TempDir dir("synth");
    const auto cfg = write_config(dir, tiny_json());
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", (dir / "a").string()}), kExitOk);
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", (dir / "b").string()}), kExitOk);
    EXPECT_EQ(file_digest(dir / "a"), file_digest(dir / "b"));
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--seed", "8", "--out", (dir / "c").string()}),
              kExitOk);
    EXPECT_NE(file_digest(dir / "a"), file_digest(dir / "c"));

    const auto d = read_dataset(dir / "a");
    EXPECT_EQ(d.scenes.size(), 6u);
    EXPECT_EQ(d.bank.size(), 6u);
    EXPECT_EQ(d.split.test_scenes.size(), 2u);
    EXPECT_EQ(d.split.train_illuminants.size(), 4u);
}

TEST(Train, MissingDatasetIsRuntimeError) {
    TempDir dir("train");
    EXPECT_EQ(run({"train", "--dataset", (dir / "nothing").string(), "--out", (dir / "o").string()}),
              kExitRuntime);
}

TEST(Pipeline, TrainCalibrateEvaluateReport) {
    TempDir dir("pipe");
    const auto cfg = write_config(dir, tiny_json());
    const auto run_dir = (dir / "run").string();
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", run_dir}), kExitOk);
    ASSERT_EQ(run({"train", "--out", run_dir}), kExitOk);
    EXPECT_TRUE(fs::exists(dir / "run" / "model.scnp"));
    EXPECT_TRUE(fs::exists(dir / "run" / "model.meta.json"));
    EXPECT_EQ(slurp(dir / "run" / "loss.csv").substr(0, 16), "epoch,mean_loss\n");

    const auto d = read_dataset(dir / "run");
    const auto& scene = d.scenes.front().cube;
    // Power-of-two white values keep the raw product exact in float32 storage.
    std::vector<double> pow2(scene.values().size());
    for (std::size_t k = 0; k < pow2.size(); ++k) pow2[k] = std::ldexp(1.0, static_cast<int>(k % 5) - 2);
    const WhiteRefImage exact_white(HsiCube(scene.height(), scene.width(), scene.grid(), pow2));
    write_cube(simulate_raw(scene, exact_white), dir / "raw_exact.hsic");
    write_cube(exact_white.cube(), dir / "white_exact.hsic");
    ASSERT_EQ(run({"calibrate", "--input", (dir / "raw_exact.hsic").string(), "--output",
                   (dir / "wt_exact.hsic").string(), "--method",
                   "whitetile:" + (dir / "white_exact.hsic").string()}),
              kExitOk);
    const auto exact = read_cube(dir / "wt_exact.hsic");
    for (std::size_t k = 0; k < exact.values().size(); ++k)
        EXPECT_NEAR(exact.values()[k], scene.values()[k], 1e-12 * scene.values()[k]);

    // A bank white: the raw file rounds once to float32.
    const auto& white = d.bank[0].white;
    write_cube(simulate_raw(scene, white), dir / "raw.hsic");
    write_cube(white.cube(), dir / "white.hsic");
    ASSERT_EQ(run({"calibrate", "--input", (dir / "raw.hsic").string(), "--output",
                   (dir / "wt.hsic").string(), "--method", "whitetile:" + (dir / "white.hsic").string()}),
              kExitOk);
    const auto back = read_cube(dir / "wt.hsic");
    for (std::size_t k = 0; k < back.values().size(); ++k)
        EXPECT_NEAR(back.values()[k], scene.values()[k], 0x1p-22 * scene.values()[k]);

    ASSERT_EQ(run({"calibrate", "--input", (dir / "raw.hsic").string(), "--output",
                   (dir / "nn.hsic").string(), "--model", (dir / "run" / "model.scnp").string()}),
              kExitOk);
    ASSERT_EQ(run({"calibrate", "--input", (dir / "raw.hsic").string(), "--output",
                   (dir / "gw.hsic").string(), "--method", "grayworld"}),
              kExitOk);
    EXPECT_TRUE(read_cube(dir / "nn.hsic").congruent(scene));
    EXPECT_EQ(run({"calibrate", "--input", (dir / "raw.hsic").string(), "--output",
                   (dir / "x.hsic").string(), "--method", "bogus"}),
              kExitUsage);
    EXPECT_EQ(run({"calibrate", "--input", (dir / "raw.hsic").string(), "--output",
                   (dir / "x.hsic").string(), "--method", "none"}),
              kExitUsage);

    ASSERT_EQ(run({"evaluate", "--out", run_dir}), kExitOk);
    ASSERT_TRUE(fs::exists(dir / "run" / "cases.csv"));
    ASSERT_TRUE(fs::exists(dir / "run" / "report.json"));
    ASSERT_EQ(run({"report", "--input", run_dir, "--output", (dir / "re.json").string()}), kExitOk);
    const auto original = nlohmann::json::parse(slurp(dir / "run" / "report.json"));
    const auto again = nlohmann::json::parse(slurp(dir / "re.json"));
    EXPECT_EQ(original["groups"], again["groups"]);

    std::ostringstream log;
    const auto rep = cmd_report(dir / "run" / "cases.csv", {}, log);
    EXPECT_EQ(rep.group("whitetile").cosine_sim, 1.0);
    EXPECT_NO_THROW(rep.group("neural"));
}

TEST(Fit, RecoversParametersFromCsv) {
    TempDir dir("fit");
    RunConfig cfg;
    cfg.resolve();
    const illum::HalogenParams truth{1.0, 0.3, 5.0, 1.0};
    const auto s = illum::eval_halogen(truth, WavelengthGrid::full_scale());
    {
        std::ofstream out(dir / "spec.csv");
        out << "wavelength_nm,intensity\n";
        out.precision(17);
        for (std::size_t k = 0; k < s.size(); ++k) out << s.grid()[k] << ',' << s[k] << '\n';
    }
    ASSERT_EQ(run({"fit", "--input", (dir / "spec.csv").string(), "--output",
                   (dir / "fit.json").string(), "--out", dir.path().string()}),
              kExitOk);
    const auto j = nlohmann::json::parse(slurp(dir / "fit.json"));
    const auto fitted = illum::eval_halogen({j["a"], j["b"], j["c"], j["d"]}, s.grid());
    double peak = 0.0, worst = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        peak = std::max(peak, s[k]);
        worst = std::max(worst, std::abs(fitted[k] - s[k]));
    }
    EXPECT_LE(worst, 1e-4 * peak);
    {
        std::ofstream out(dir / "bad.csv");
        out << "wavelength_nm,intensity\n500,1\nfoo,2\n";
    }
    EXPECT_EQ(run({"fit", "--input", (dir / "bad.csv").string(), "--out", dir.path().string()}),
              kExitRuntime);
}

TEST(Config, ShippedConfigsLoad) {
    const fs::path dir = SPECTRACAL_CONFIG_DIR;
    RunConfig defaults;
    defaults.resolve();
    const auto shipped = load_config(dir / "default.json");
    EXPECT_EQ(to_json(shipped), to_json(defaults));
    EXPECT_NO_THROW(load_config(dir / "smoke.json"));
}
