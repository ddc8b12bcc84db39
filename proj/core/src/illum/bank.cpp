#include "spectracal/illum/bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "spectracal/calibration.hpp"
#include "spectracal/cube_io.hpp"
#include "spectracal/errors.hpp"
#include "spectracal/parallel.hpp"

namespace spectracal::illum {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

int nearest(const std::vector<double>& x, const std::vector<std::vector<double>>& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(x, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<double> scaled_to_unit_mean(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v /= mean;
    return out;
}

bool intensity_ok(std::span<const double> values, double min_relative) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (double v : values) {
        sum += v;
        lo = std::min(lo, v);
    }
    const double mean = sum / static_cast<double>(values.size());
    return mean > 0.0 && lo >= min_relative * mean;
}

WhiteRefImage quantized(const WhiteRefImage& w) { return WhiteRefImage(quantize_to_float(w.cube())); }

std::string item_filename(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "illum_%04zu.hsic", id);
    return buf;
}

}  // namespace

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::MeasuredSurrogate: return "measured-surrogate";
        case Provenance::SimulatedHalogen: return "simulated-halogen";
        case Provenance::SimulatedLedMix: return "simulated-led-mix";
    }
    return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "measured-surrogate") return Provenance::MeasuredSurrogate;
    if (s == "simulated-halogen") return Provenance::SimulatedHalogen;
    if (s == "simulated-led-mix") return Provenance::SimulatedLedMix;
    throw FormatError("unknown provenance tag '" + s + "'");
}

void IlluminantBank::add(BankItem item) {
    if (!items_.empty() && !items_.front().white.cube().congruent(item.white.cube()))
        throw DimensionError("bank items must share one grid and spatial size");
    items_.push_back(std::move(item));
}

IlluminantBank IlluminantBank::subset(const std::vector<std::size_t>& ids) const {
    IlluminantBank out;
    for (std::size_t id : ids) out.add(by_id(id));
    return out;
}

const BankItem& IlluminantBank::by_id(std::size_t id) const {
    for (const auto& item : items_) {
        if (item.id == id) return item;
    }
    throw ParameterError("no bank item with id " + std::to_string(id));
}

WhiteRefImage transfer_spatial(const Spectrum& f, const WhiteRefImage& donor) {
    const HsiCube& cube = donor.cube();
    if (!(f.grid() == cube.grid())) throw DimensionError("transfer_spatial: grids differ");
    const Spectrum mean = mean_spectrum(cube);
    for (double v : mean.values()) {
        if (!(v > 0.0)) throw DomainError("transfer_spatial: donor mean spectrum has a zero band");
    }
    const std::size_t bands = cube.bands();
    std::vector<double> ratio(bands);
    for (std::size_t l = 0; l < bands; ++l) ratio[l] = f[l] / mean[l];
    std::vector<double> out(cube.values().size());
    const auto in = cube.values();
    for (std::size_t p = 0; p < cube.pixels(); ++p) {
        for (std::size_t l = 0; l < bands; ++l) out[p * bands + l] = in[p * bands + l] * ratio[l];
    }
    return WhiteRefImage(HsiCube(cube.height(), cube.width(), cube.grid(), std::move(out)));
}

WhiteRefImage mix_illuminants(const WhiteRefImage& w1, const WhiteRefImage& w2, double alpha) {
    if (!w1.cube().congruent(w2.cube())) throw DimensionError("mix_illuminants: shapes differ");
    if (!std::isfinite(alpha)) throw ParameterError("mix_illuminants: alpha must be finite");
    const auto a = w1.cube().values();
    const auto b = w2.cube().values();
    const double beta = 1.0 - alpha;
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        out[k] = std::max(alpha * a[k] + beta * b[k], kWhiteEpsilon);
    const auto& c = w1.cube();
    return WhiteRefImage(HsiCube(c.height(), c.width(), c.grid(), std::move(out)));
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations) {
    const std::size_t n = points.size();
    if (k < 1 || k > n) throw ParameterError("k-means needs 1 <= k <= number of points");
    Rng rng(seed);

    // k-means++ seeding.
    std::vector<std::vector<double>> centroids;
    std::vector<bool> chosen(n, false);
    const std::size_t first = rng.below(n);
    centroids.push_back(points[first]);
    chosen[first] = true;
    std::vector<double> d2(n);
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, squared_distance(points[p], c));
            d2[p] = chosen[p] ? 0.0 : best;
            total += d2[p];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                acc += d2[p];
                if (d2[p] > 0.0 && acc > target) {
                    pick = p;
                    break;
                }
            }
            if (pick == n) {
                for (std::size_t p = n; p-- > 0;) {
                    if (d2[p] > 0.0) {
                        pick = p;
                        break;
                    }
                }
            }
        } else {
            // Remaining points coincide with existing centroids.
            for (std::size_t p = 0; p < n && pick == n; ++p) {
                if (!chosen[p]) pick = p;
            }
        }
        centroids.push_back(points[pick]);
        chosen[pick] = true;
    }

    KMeansResult result;
    result.assignment.assign(n, -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t p = 0; p < n; ++p) {
            const int c = nearest(points[p], centroids);
            if (c != result.assignment[p]) {
                result.assignment[p] = c;
                changed = true;
            }
        }
        result.iterations = iter + 1;
        if (!changed) break;

        std::vector<std::vector<double>> next(k, std::vector<double>(points[0].size(), 0.0));
        std::vector<std::size_t> count(k, 0);
        for (std::size_t p = 0; p < n; ++p) {
            const auto c = static_cast<std::size_t>(result.assignment[p]);
            ++count[c];
            for (std::size_t q = 0; q < points[p].size(); ++q) next[c][q] += points[p][q];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) {
                // Empty cluster: re-seed at the point farthest from its centroid.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t p = 0; p < n; ++p) {
                    const double d = squared_distance(
                        points[p], centroids[static_cast<std::size_t>(result.assignment[p])]);
                    if (d > far_d) {
                        far_d = d;
                        far = p;
                    }
                }
                next[c] = points[far];
            } else {
                for (double& v : next[c]) v /= static_cast<double>(count[c]);
            }
        }
        centroids = std::move(next);
    }
    // The loop ends with an assignment step against `centroids` unless the
    // iteration cap was hit right after an update; re-assign to be safe.
    for (std::size_t p = 0; p < n; ++p) result.assignment[p] = nearest(points[p], centroids);
    result.centroids = std::move(centroids);
    return result;
}

std::vector<std::vector<double>> cluster_features(const IlluminantBank& bank) {
    std::vector<std::vector<double>> features;
    features.reserve(bank.size());
    for (const auto& item : bank.items()) {
        const Spectrum s = l1_normalize(mean_spectrum(item.white.cube()));
        features.emplace_back(s.values().begin(), s.values().end());
    }
    return features;
}

IlluminantBank cluster_illuminants(const IlluminantBank& bank, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ParameterError("cluster_illuminants needs k >= 2");
    if (k > bank.size()) throw ParameterError("cluster_illuminants: k exceeds bank size");
    const auto result = kmeans(cluster_features(bank), k, seed);
    IlluminantBank out = bank;
    for (std::size_t p = 0; p < out.size(); ++p) out[p].cluster = result.assignment[p];
    return out;
}

WhiteRefImage make_donor(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                         const DonorConfig& config, Rng& rng) {
    const std::size_t bands = grid.size();
    const double cy = (static_cast<double>(height) - 1.0) * 0.5 *
                      (1.0 + config.center_jitter * rng.uniform(-1.0, 1.0));
    const double cx = (static_cast<double>(width) - 1.0) * 0.5 *
                      (1.0 + config.center_jitter * rng.uniform(-1.0, 1.0));
    const double fy = rng.uniform(config.falloff_min, config.falloff_max);
    const double fx = rng.uniform(config.falloff_min, config.falloff_max);
    const double reach_y = std::max({cy, static_cast<double>(height) - 1.0 - cy, 1.0});
    const double reach_x = std::max({cx, static_cast<double>(width) - 1.0 - cx, 1.0});
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    std::vector<double> base(bands);
    std::vector<double> tilt(bands);
    for (std::size_t l = 0; l < bands; ++l) {
        const double t = bands > 1 ? static_cast<double>(l) / static_cast<double>(bands - 1) : 0.0;
        base[l] = 1.0 + 0.2 * std::cos(phase + 2.0 * std::numbers::pi * t);
        tilt[l] = 1.0 + config.spectral_tilt * (2.0 * t - 1.0);
    }
    const double peak = rng.uniform(0.0, config.stray_peak_max);
    const double sy = rng.uniform(-0.25, 1.25) * static_cast<double>(height);
    const double sx = rng.uniform(-0.25, 1.25) * static_cast<double>(width);
    const double diagonal = std::hypot(static_cast<double>(height), static_cast<double>(width));
    const double radius = diagonal * rng.uniform(config.stray_radius_min, config.stray_radius_max);
    const double tint = rng.uniform(-config.stray_tint, config.stray_tint);
    double base_mean = 0.0;
    for (double b : base) base_mean += b / static_cast<double>(bands);
    std::vector<double> stray(bands);
    for (std::size_t l = 0; l < bands; ++l) {
        const double t = bands > 1 ? static_cast<double>(l) / static_cast<double>(bands - 1) : 0.0;
        stray[l] = peak * base_mean * (1.0 + tint * (2.0 * t - 1.0));
    }

    std::vector<double> values(height * width * bands);
    for (std::size_t i = 0; i < height; ++i) {
        const double uy = (static_cast<double>(i) - cy) / reach_y;
        const double dy = static_cast<double>(i) - sy;
        for (std::size_t j = 0; j < width; ++j) {
            const double ux = (static_cast<double>(j) - cx) / reach_x;
            const double dx = static_cast<double>(j) - sx;
            const double spot = std::exp(-0.5 * (dy * dy + dx * dx) / (radius * radius));
            for (std::size_t l = 0; l < bands; ++l) {
                const double vy = 1.0 - std::min(fy * tilt[l], 0.95) * uy * uy;
                const double vx = 1.0 - std::min(fx * tilt[l], 0.95) * ux * ux;
                values[(i * width + j) * bands + l] = base[l] * vy * vx + spot * stray[l];
            }
        }
    }
    return WhiteRefImage(HsiCube(height, width, grid, std::move(values)));
}

Spectrum led_spectrum(const WavelengthGrid& grid, const LedConfig& config, Rng& rng) {
    const std::size_t peaks =
        config.min_peaks + rng.below(config.max_peaks - config.min_peaks + 1);
    const double lo = grid[0];
    const double hi = grid[grid.size() - 1];
    std::vector<double> s(grid.size(), config.pedestal);
    for (std::size_t k = 0; k < peaks; ++k) {
        const double center = rng.uniform(lo, hi);
        const double width = rng.uniform(config.width_min_nm, config.width_max_nm);
        const double amp = rng.uniform(config.amplitude_min, config.amplitude_max);
        for (std::size_t l = 0; l < grid.size(); ++l) {
            const double z = (grid[l] - center) / width;
            s[l] += amp * std::exp(-0.5 * z * z);
        }
    }
    return Spectrum(std::move(s), grid);
}

void BankConfig::validate() const {
    if (height == 0 || width == 0) throw ConfigError("bank height and width must be positive");
    if (n_sim + n_mix + (emit_measured ? n_led_pool : 0) == 0)
        throw ConfigError("bank would be empty");
    if (n_mix > 0) {
        if (clusters < 2) throw ConfigError("mixing needs at least 2 clusters");
        if (clusters > n_led_pool + n_sim) throw ConfigError("more clusters than pool items");
    }
    if (!(stray_min >= 0.0 && stray_min <= stray_max && stray_max <= 1.0))
        throw ConfigError("stray levels must satisfy 0 <= stray_min <= stray_max <= 1");
    if (!(alpha_lo <= alpha_hi)) throw ConfigError("alpha_lo must be <= alpha_hi");
    if (!(min_relative_intensity >= 0.0 && min_relative_intensity < 1.0))
        throw ConfigError("min_relative_intensity must lie in [0, 1)");
    if (led.min_peaks < 1 || led.min_peaks > led.max_peaks) throw ConfigError("invalid LED peak counts");
    if (!(donor.falloff_min >= 0.0 && donor.falloff_min <= donor.falloff_max &&
          donor.falloff_max < 1.0))
        throw ConfigError("donor fall-off must satisfy 0 <= min <= max < 1");
    if (!(donor.stray_peak_max >= 0.0) || !(donor.stray_radius_min > 0.0) ||
        !(donor.stray_radius_min <= donor.stray_radius_max) ||
        !(donor.stray_tint >= 0.0 && donor.stray_tint < 1.0))
        throw ConfigError("donor stray spot needs peak >= 0, 0 < radius min <= max, 0 <= tint < 1");
    ranges.validate(grid);
}

IlluminantBank generate_bank(const BankConfig& config, Rng& rng) {
    config.validate();
    const Rng led_streams = rng.fork(1);
    const Rng halogen_streams = rng.fork(2);
    Rng mix_rng = rng.fork(3);
    const std::uint64_t cluster_seed = rng.fork(4).seed();

    const auto& grid = config.grid;
    const auto h = config.height;
    const auto w = config.width;

    std::vector<std::optional<BankItem>> leds(config.n_led_pool);
    parallel_for(config.n_led_pool, [&](std::size_t k) {
        Rng r = led_streams.fork(k);
        for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
            const Spectrum s = led_spectrum(grid, config.led, r);
            if (!intensity_ok(s.values(), config.min_relative_intensity)) continue;
            const Spectrum f(scaled_to_unit_mean(s.values()), grid);
            const WhiteRefImage donor = make_donor(h, w, grid, config.donor, r);
            BankItem item{0, quantized(transfer_spatial(f, donor)), Provenance::MeasuredSurrogate,
                          std::nullopt, {{"kind", "led"}}};
            leds[k] = std::move(item);
            return;
        }
        throw SamplingError("could not draw an LED spectrum within the attempt budget");
    });

    std::vector<std::optional<BankItem>> halogens(config.n_sim);
    parallel_for(config.n_sim, [&](std::size_t k) {
        Rng r = halogen_streams.fork(k);
        for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
            const double stray = r.uniform(config.stray_min, config.stray_max);
            const HalogenParams p = sample_halogen(config.ranges, stray, grid, r, config.kappa);
            const Spectrum s = eval_halogen(p, grid);
            if (!intensity_ok(s.values(), config.min_relative_intensity)) continue;
            const Spectrum f(scaled_to_unit_mean(s.values()), grid);
            const WhiteRefImage donor = make_donor(h, w, grid, config.donor, r);
            nlohmann::json gen{{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"stray_level", stray}};
            BankItem item{0, quantized(transfer_spatial(f, donor)), Provenance::SimulatedHalogen,
                          std::nullopt, std::move(gen)};
            halogens[k] = std::move(item);
            return;
        }
        throw SamplingError("could not draw a halogen spectrum within the attempt budget");
    });

    // Mixing pool: LED surrogates followed by halogen simulations.
    IlluminantBank pool;
    for (auto& item : leds) pool.add(std::move(*item));
    for (auto& item : halogens) pool.add(std::move(*item));
    for (std::size_t k = 0; k < pool.size(); ++k) pool[k].id = k;

    std::vector<BankItem> mixes;
    if (config.n_mix > 0) {
        pool = cluster_illuminants(pool, config.clusters, cluster_seed);
        for (std::size_t m = 0; m < config.n_mix; ++m) {
            bool done = false;
            for (int attempt = 0; attempt < config.max_attempts && !done; ++attempt) {
                const std::size_t i = mix_rng.below(pool.size());
                std::vector<std::size_t> others;
                for (std::size_t j = 0; j < pool.size(); ++j) {
                    if (pool[j].cluster != pool[i].cluster) others.push_back(j);
                }
                if (others.empty()) continue;
                const std::size_t j = others[mix_rng.below(others.size())];
                // A few alphas per pair before giving up on it.
                for (int t = 0; t < 8; ++t) {
                    const double alpha = mix_rng.uniform(config.alpha_lo, config.alpha_hi);
                    const WhiteRefImage mixed = mix_illuminants(pool[i].white, pool[j].white, alpha);
                    if (!intensity_ok(mixed.cube().values(), config.min_relative_intensity)) continue;
                    nlohmann::json gen{{"parents", {i, j}},
                                       {"parent_kinds", {to_string(pool[i].provenance),
                                                         to_string(pool[j].provenance)}},
                                       {"alpha", alpha}};
                    mixes.push_back({0, quantized(mixed), Provenance::SimulatedLedMix, std::nullopt,
                                     std::move(gen)});
                    done = true;
                    break;
                }
            }
            if (!done) throw SamplingError("could not draw an admissible mix within the attempt budget");
        }
    }

    IlluminantBank bank;
    std::size_t next_id = 0;
    auto emit = [&](BankItem item) {
        item.id = next_id++;
        bank.add(std::move(item));
    };
    for (std::size_t k = 0; k < pool.size(); ++k) {
        const bool is_led = k < config.n_led_pool;
        if (is_led && !config.emit_measured) continue;
        BankItem item = pool[k];
        item.generation["pool_index"] = k;
        emit(std::move(item));
    }
    for (auto& item : mixes) emit(std::move(item));
    return bank;
}

void write_bank(const IlluminantBank& bank, const std::filesystem::path& dir,
                const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    nlohmann::json index;
    index["items"] = nlohmann::json::array();
    if (!bank.empty()) {
        const auto& c = bank[0].white.cube();
        index["height"] = c.height();
        index["width"] = c.width();
        index["wavelengths_nm"] = std::vector<double>(c.grid().nanometers().begin(),
                                                      c.grid().nanometers().end());
    }
    for (const auto& item : bank.items()) {
        const std::string file = item_filename(item.id);
        write_cube(item.white.cube(), dir / file);
        nlohmann::json entry{{"id", item.id},
                             {"file", file},
                             {"provenance", to_string(item.provenance)},
                             {"generation", item.generation}};
        entry["cluster"] = item.cluster ? nlohmann::json(*item.cluster) : nlohmann::json(nullptr);
        index["items"].push_back(std::move(entry));
    }
    index["extra"] = extra;
    write_json_file(dir / "bank.json", index);
}

IlluminantBank read_bank(const std::filesystem::path& dir) {
    const auto index = read_json_file(dir / "bank.json");
    IlluminantBank bank;
    try {
        for (const auto& entry : index.at("items")) {
            BankItem item{entry.at("id").get<std::size_t>(),
                          WhiteRefImage(read_cube(dir / entry.at("file").get<std::string>())),
                          provenance_from_string(entry.at("provenance").get<std::string>()),
                          std::nullopt, entry.value("generation", nlohmann::json::object())};
            if (!entry.at("cluster").is_null()) item.cluster = entry.at("cluster").get<int>();
            bank.add(std::move(item));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError((dir / "bank.json").string() + ": " + e.what());
    }
    return bank;
}

}  // namespace spectracal::illum
