#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <set>

#include "spectracal/calibration.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/illum/bank.hpp"
#include "spectracal/illum/halogen.hpp"
#include "spectracal/illum/scene.hpp"
#include "support.hpp"

using namespace spectracal;
using namespace spectracal::illum;
using testing_support::random_white;
using testing_support::TempDir;

namespace {

WhiteRefImage constant_white(std::size_t h, std::size_t w, const WavelengthGrid& g, double v) {
    return WhiteRefImage(HsiCube::filled(h, w, g, v));
}

double max_relative_rmse(const HalogenParams& p, const Spectrum& target) {
    double peak = 0.0;
    for (double v : target.values()) peak = std::max(peak, v);
    return halogen_rmse(p, target) / peak;
}

}  // namespace

TEST(EvalHalogen, ClosedFormValues) {
    const WavelengthGrid g({1000.0, 2000.0});
    const auto s = eval_halogen({1.0, 0.0, 1.0, 0.0}, g);
    EXPECT_NEAR(s[0], 1.0 / (std::numbers::e - 1.0), 1e-15);
    EXPECT_NEAR(s[0], 0.581977, 1e-6);
    EXPECT_NEAR(s[1], 8.0 / (std::exp(2.0) - 1.0), 1e-15);
    EXPECT_NEAR(s[1], 1.252141, 1e-6);
}

TEST(EvalHalogen, ZeroNumeratorGivesZero) {
    const WavelengthGrid g({500.0, 600.0, 700.0});
    const auto s = eval_halogen({2.0, 1.0, 5.0, 0.0}, g);  // a*0.5 - b == 0
    EXPECT_EQ(s[0], 0.0);
    EXPECT_GT(s[1], 0.0);
}

TEST(EvalHalogen, ConstraintViolations) {
    const auto g = WavelengthGrid::desk_scale();
    EXPECT_THROW(eval_halogen({1.0, 0.6, 5.0, 0.0}, g), DomainError);   // negative numerator at 0.5 um
    EXPECT_THROW(eval_halogen({1.0, 0.0, 2.0, 1.0}, g), DomainError);   // pole at 0.5 um
    EXPECT_FALSE(satisfies_constraints({1.0, 0.0, 2.0, 1.0 - 0.5e-3}, g));
    EXPECT_TRUE(satisfies_constraints({1.0, 0.0, 2.0, 1.0 - 2e-3}, g));
}

TEST(EvalHalogen, FiniteForSampledParamsProperty) {
    const auto g = WavelengthGrid::desk_scale();
    Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        const auto p = sample_halogen(ParamRanges{}, rng.uniform(), g, rng);
        const auto s = eval_halogen(p, g);
        for (double v : s.values()) {
            EXPECT_TRUE(std::isfinite(v));
            EXPECT_GE(v, 0.0);
        }
    }
}

TEST(SampleHalogen, StrayZeroStaysInRanges) {
    const auto g = WavelengthGrid::desk_scale();
    const ParamRanges r;
    Rng rng(12);
    for (int k = 0; k < 300; ++k) {
        const auto p = sample_halogen(r, 0.0, g, rng);
        EXPECT_GE(p.a, r.a.lo);
        EXPECT_LE(p.a, r.a.hi);
        EXPECT_GE(p.b, r.b.lo);
        EXPECT_LE(p.b, r.b.hi);
        EXPECT_GE(p.c, r.c.lo);
        EXPECT_LE(p.c, r.c.hi);
        EXPECT_GE(p.d, r.d.lo);
        EXPECT_LE(p.d, r.d.hi);
        EXPECT_TRUE(satisfies_constraints(p, g));
    }
}

TEST(SampleHalogen, StrayWidensUpperBounds) {
    const auto g = WavelengthGrid::desk_scale();
    const ParamRanges r;
    Rng rng(13);
    double max_c = 0.0;
    for (int k = 0; k < 2000; ++k) max_c = std::max(max_c, sample_halogen(r, 1.0, g, rng).c);
    EXPECT_GT(max_c, r.c.hi);
    EXPECT_LE(max_c, r.c.hi * (1.0 + kDefaultStrayWidening));
}

TEST(SampleHalogen, DegenerateRangesReturnThePoint) {
    ParamRanges r;
    r.a = {1.5, 1.5};
    r.b = {0.2, 0.2};
    r.c = {6.0, 6.0};
    r.d = {1.0, 1.0};
    Rng rng(14);
    const auto p = sample_halogen(r, 0.0, WavelengthGrid::desk_scale(), rng);
    EXPECT_EQ(p, (HalogenParams{1.5, 0.2, 6.0, 1.0}));
}

TEST(SampleHalogen, DeterministicAndBadInputs) {
    const auto g = WavelengthGrid::desk_scale();
    Rng r1(15), r2(15);
    EXPECT_EQ(sample_halogen(ParamRanges{}, 0.3, g, r1), sample_halogen(ParamRanges{}, 0.3, g, r2));
    EXPECT_THROW(sample_halogen(ParamRanges{}, 1.5, g, r1), ParameterError);
    ParamRanges infeasible;
    infeasible.c = {0.1, 0.2};
    infeasible.d = {1.0, 1.0};
    EXPECT_THROW(sample_halogen(infeasible, 0.0, g, r1, 0.5, 50), SamplingError);
}

TEST(ParamRanges, Validation) {
    const auto g = WavelengthGrid::desk_scale();
    EXPECT_NO_THROW(ParamRanges{}.validate(g));
    ParamRanges r;
    r.a = {2.0, 1.0};
    EXPECT_THROW(r.validate(g), ParameterError);
    ParamRanges none;
    none.b = {1.5, 2.0};  // a*lambda - b < 0 at 0.5 um even for a = 2
    EXPECT_THROW(none.validate(g), ParameterError);
}

TEST(FitHalogen, RecoversKnownCurve) {
    const auto g = WavelengthGrid::desk_scale();
    const auto target = eval_halogen({1.0, 0.3, 5.0, 1.0}, g);
    const auto r = fit_halogen(target);
    double peak = 0.0;
    for (double v : target.values()) peak = std::max(peak, v);
    EXPECT_LE(r.rmse, 1e-6 * peak);
    EXPECT_GE(r.converged_starts, 1);
    EXPECT_NEAR(halogen_rmse(r.params, target), r.rmse, 1e-12);
}

TEST(FitHalogen, ReportedRmseIsReproducible) {
    const auto g = WavelengthGrid::desk_scale();
    Rng rng(16);
    const auto p = sample_halogen(ParamRanges{}, 0.0, g, rng);
    const auto fit = fit_halogen(eval_halogen(p, g));
    const auto refit_target = eval_halogen(fit.params, g);
    EXPECT_LE(std::abs(halogen_rmse(fit.params, refit_target)), 1e-12);
    EXPECT_EQ(halogen_rmse(fit.params, eval_halogen(p, g)), halogen_rmse(fit.params, eval_halogen(p, g)));
}

TEST(FitHalogen, ConstantTargetBeatsRandomSearch) {
    const auto g = WavelengthGrid::desk_scale();
    const Spectrum target(std::vector<double>(g.size(), 0.8), g);
    const auto fit = fit_halogen(target);
    Rng rng(17);
    double best = INFINITY;
    for (int k = 0; k < 100; ++k) {
        const auto p = sample_halogen(ParamRanges{}, 0.0, g, rng);
        best = std::min(best, halogen_rmse(p, target));
    }
    EXPECT_LE(fit.rmse, best);
}

TEST(FitHalogen, SelfConsistencyOverSeededDraws) {
    const auto g = WavelengthGrid::desk_scale();
    Rng rng(18);
    for (int k = 0; k < 10; ++k) {
        const auto p = sample_halogen(ParamRanges{}, 0.0, g, rng);
        const auto target = eval_halogen(p, g);
        EXPECT_LE(max_relative_rmse(fit_halogen(target).params, target), 1e-4) << "draw " << k;
    }
}

TEST(FitHalogen, RejectsBadTargets) {
    const auto g = WavelengthGrid::desk_scale();
    EXPECT_THROW(fit_halogen(Spectrum(std::vector<double>(g.size(), 0.0), g)), DomainError);
    std::vector<double> neg(g.size(), 1.0);
    neg[3] = -1.0;
    EXPECT_THROW(fit_halogen(Spectrum(neg, g)), DomainError);
}

TEST(TransferSpatial, Examples) {
    const auto g = testing_support::small_grid(3);
    const Spectrum f({0.5, 1.0, 2.0}, g);
    const auto flat = transfer_spatial(f, constant_white(2, 3, g, 4.0));
    for (std::size_t p = 0; p < flat.cube().pixels(); ++p) {
        for (std::size_t l = 0; l < 3; ++l) EXPECT_DOUBLE_EQ(flat.cube().pixel(p)[l], f[l]);
    }
    Rng rng(19);
    const auto donor = random_white(3, 3, g, rng);
    const auto same = transfer_spatial(mean_spectrum(donor.cube()), donor);
    for (std::size_t k = 0; k < donor.cube().values().size(); ++k)
        EXPECT_NEAR(same.cube().values()[k], donor.cube().values()[k], 1e-12);
}

TEST(TransferSpatial, MeanIdentityProperty) {
    const auto g = WavelengthGrid::desk_scale();
    Rng rng(20);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> f(g.size());
        for (double& v : f) v = rng.uniform(0.01, 3.0);
        const auto donor = make_donor(8, 8, g, DonorConfig{}, rng);
        const auto out = transfer_spatial(Spectrum(f, g), donor);
        const auto m = mean_spectrum(out.cube());
        for (std::size_t l = 0; l < g.size(); ++l) EXPECT_LE(std::abs(m[l] - f[l]), 1e-10);
    }
}

TEST(MixIlluminants, EndpointsAndMidpoint) {
    const auto g = testing_support::small_grid(3);
    Rng rng(21);
    const auto w1 = random_white(2, 2, g, rng);
    const auto w2 = random_white(2, 2, g, rng);
    EXPECT_EQ(mix_illuminants(w1, w2, 1.0), w1);
    EXPECT_EQ(mix_illuminants(w1, w2, 0.0), w2);
    const auto mid = mix_illuminants(constant_white(2, 2, g, 2.0), constant_white(2, 2, g, 4.0), 0.5);
    for (double v : mid.cube().values()) EXPECT_EQ(v, 3.0);
}

TEST(MixIlluminants, ExtrapolationFloorsAtEpsilon) {
    const auto g = testing_support::small_grid(2);
    const auto out = mix_illuminants(constant_white(1, 1, g, 1.0), constant_white(1, 1, g, 3.0), 2.0);
    for (double v : out.cube().values()) EXPECT_EQ(v, kWhiteEpsilon);
    EXPECT_THROW(mix_illuminants(constant_white(1, 1, g, 1.0), constant_white(1, 2, g, 1.0), 0.5),
                 DimensionError);
}

TEST(KMeans, SeparatedGroupsAndNearestCentroidProperty) {
    const auto g = testing_support::small_grid(3);
    IlluminantBank bank;
    Rng rng(22);
    std::vector<int> group;
    for (std::size_t k = 0; k < 12; ++k) {
        const bool red = k % 2 == 0;
        const double jitter = rng.uniform(-0.01, 0.01);
        const std::vector<double> s = red ? std::vector<double>{3.0 + jitter, 1.0, 1.0}
                                          : std::vector<double>{1.0, 1.0, 3.0 + jitter};
        bank.add({k, WhiteRefImage(HsiCube::broadcast(2, 2, g, s)), Provenance::MeasuredSurrogate,
                  std::nullopt, {}});
        group.push_back(red ? 0 : 1);
    }
    const auto clustered = cluster_illuminants(bank, 2, 5);
    for (std::size_t a = 0; a < 12; ++a) {
        for (std::size_t b = 0; b < 12; ++b) {
            EXPECT_EQ(group[a] == group[b], *clustered[a].cluster == *clustered[b].cluster);
        }
    }
    const auto features = cluster_features(bank);
    const auto km = kmeans(features, 2, 5);
    for (std::size_t p = 0; p < features.size(); ++p) {
        double best = INFINITY;
        int arg = -1;
        for (std::size_t c = 0; c < km.centroids.size(); ++c) {
            double d = 0.0;
            for (std::size_t l = 0; l < features[p].size(); ++l) {
                const double e = features[p][l] - km.centroids[c][l];
                d += e * e;
            }
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        EXPECT_EQ(km.assignment[p], arg);
    }
    EXPECT_EQ(cluster_illuminants(bank, 2, 5).items().size(), 12u);
    const auto again = cluster_illuminants(bank, 2, 5);
    for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(again[k].cluster, clustered[k].cluster);
}

TEST(KMeans, KEqualsBankSize) {
    const auto g = testing_support::small_grid(3);
    IlluminantBank bank;
    Rng rng(23);
    for (std::size_t k = 0; k < 5; ++k)
        bank.add({k, random_white(2, 2, g, rng), Provenance::SimulatedHalogen, std::nullopt, {}});
    const auto c = cluster_illuminants(bank, 5, 1);
    std::set<int> ids;
    for (const auto& item : c.items()) ids.insert(*item.cluster);
    EXPECT_EQ(ids.size(), 5u);
    EXPECT_THROW(cluster_illuminants(bank, 6, 1), ParameterError);
    EXPECT_THROW(cluster_illuminants(bank, 1, 1), ParameterError);
}

TEST(GenerateBank, DefaultSizeAndProvenance) {
    BankConfig cfg;
    Rng rng(24);
    const auto bank = generate_bank(cfg, rng);
    ASSERT_EQ(bank.size(), 200u);
    std::size_t halogen = 0;
    std::size_t mixes = 0;
    for (std::size_t k = 0; k < bank.size(); ++k) {
        EXPECT_EQ(bank[k].id, k);
        halogen += bank[k].provenance == Provenance::SimulatedHalogen;
        mixes += bank[k].provenance == Provenance::SimulatedLedMix;
        EXPECT_EQ(bank[k].white.cube().height(), 32u);
        EXPECT_EQ(bank[k].white.cube().bands(), 16u);
        EXPECT_EQ(quantize_to_float(bank[k].white.cube()), bank[k].white.cube());
    }
    EXPECT_EQ(halogen, 100u);
    EXPECT_EQ(mixes, 100u);
}

TEST(GenerateBank, SingleHalogen) {
    BankConfig cfg;
    cfg.n_sim = 1;
    cfg.n_mix = 0;
    Rng rng(25);
    const auto bank = generate_bank(cfg, rng);
    ASSERT_EQ(bank.size(), 1u);
    EXPECT_EQ(bank[0].provenance, Provenance::SimulatedHalogen);
}

TEST(GenerateBank, DeterministicSerialization) {
    BankConfig cfg;
    cfg.height = cfg.width = 8;
    cfg.n_sim = 6;
    cfg.n_mix = 6;
    cfg.n_led_pool = 6;
    cfg.clusters = 3;
    TempDir dir("bank");
    Rng r1(26), r2(26);
    write_bank(generate_bank(cfg, r1), dir / "a");
    write_bank(generate_bank(cfg, r2), dir / "b");
    for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
        const auto name = e.path().filename();
        EXPECT_EQ(testing_support::slurp(e.path()), testing_support::slurp(dir / "b" / name)) << name;
    }
    const auto back = read_bank(dir / "a");
    Rng r3(26);
    const auto fresh = generate_bank(cfg, r3);
    ASSERT_EQ(back.size(), fresh.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        EXPECT_EQ(back[k].white, fresh[k].white);
        EXPECT_EQ(back[k].provenance, fresh[k].provenance);
        EXPECT_EQ(back[k].cluster, fresh[k].cluster);
        EXPECT_EQ(back[k].generation, fresh[k].generation);
    }
}

TEST(GenerateBank, ItemsHaveUnitMeanScale) {
    BankConfig cfg;
    cfg.height = cfg.width = 8;
    cfg.n_sim = 5;
    cfg.n_mix = 5;
    Rng rng(27);
    const auto bank = generate_bank(cfg, rng);
    for (const auto& item : bank.items()) {
        double s = 0.0;
        for (double v : item.white.cube().values()) s += v;
        EXPECT_NEAR(s / static_cast<double>(item.white.cube().values().size()), 1.0, 1e-5);
    }
}

TEST(Provenance, StringRoundTrip) {
    for (auto p : {Provenance::MeasuredSurrogate, Provenance::SimulatedHalogen, Provenance::SimulatedLedMix})
        EXPECT_EQ(provenance_from_string(to_string(p)), p);
    EXPECT_THROW(provenance_from_string("lamp"), FormatError);
}

TEST(SynthScene, ZeroAbsorption) {
    const auto g = WavelengthGrid::desk_scale();
    const auto basis = chromophore_basis(g);
    for (double v : reflectance(basis, {0.0, 0.0, 0.0}, 1.0, 0.01)) EXPECT_DOUBLE_EQ(v, 1.01);
}

TEST(SynthScene, OxygenationAndDeterminism) {
    SceneConfig cfg;
    cfg.height = cfg.width = 16;
    cfg.classes = {{1.0, 0.0, 0.5}, {0.5, 0.5, 0.5}};
    cfg.variation = 0.0;
    Rng r1(28), r2(28);
    const auto a = synth_scene(cfg, r1);
    const auto b = synth_scene(cfg, r2);
    EXPECT_EQ(a.cube, b.cube);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.concentrations, b.concentrations);
    for (std::size_t p = 0; p < a.labels.size(); ++p) {
        if (a.labels.labels[p] == 0) {
            EXPECT_EQ(a.oxygenation[p], 1.0);
        } else {
            EXPECT_DOUBLE_EQ(a.oxygenation[p], 0.5);
        }
    }
}

TEST(SynthScene, InvariantsOnDefaults) {
    SceneConfig cfg;
    Rng rng(29);
    const auto s = synth_scene(cfg, rng);
    EXPECT_EQ(s.cube.height(), 32u);
    EXPECT_EQ(s.cube.bands(), 16u);
    EXPECT_EQ(s.n_classes, 4u);
    std::set<int> seen(s.labels.labels.begin(), s.labels.labels.end());
    EXPECT_EQ(seen.size(), 4u);
    for (double v : s.cube.values()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0 + cfg.base_scatter);
    }
    for (double o : s.oxygenation) {
        EXPECT_GE(o, 0.0);
        EXPECT_LE(o, 1.0);
    }
    EXPECT_EQ(quantize_to_float(s.cube), s.cube);
}

TEST(SynthScene, ConfigValidation) {
    SceneConfig cfg;
    cfg.classes.resize(1);
    EXPECT_THROW(cfg.validate(), ConfigError);
    SceneConfig few;
    few.regions = 2;
    EXPECT_THROW(few.validate(), ConfigError);
}

TEST(Chromophores, CsvRegeneratesFromHeader) {
    const auto g = WavelengthGrid::desk_scale();
    TempDir dir("chromo");
    write_chromophore_csv(g, dir / "c.csv");
    const auto basis = read_chromophore_csv(dir / "c.csv");
    const auto fresh = chromophore_basis(g);
    EXPECT_EQ(basis.grid, fresh.grid);
    for (std::size_t c = 0; c < kChromophores; ++c) EXPECT_EQ(basis.mu[c], fresh.mu[c]);
    const auto text = testing_support::slurp(dir / "c.csv");
    EXPECT_NE(text.find("wavelength_nm,mu_oxy,mu_deoxy,mu_water"), std::string::npos);
}

TEST(Chromophores, ShippedAssetMatchesGenerator) {
    const std::filesystem::path asset = SPECTRACAL_ASSET_DIR "/chromophores.csv";
    ASSERT_TRUE(std::filesystem::exists(asset));
    EXPECT_EQ(testing_support::slurp(asset), chromophore_csv(WavelengthGrid::full_scale()));
}
