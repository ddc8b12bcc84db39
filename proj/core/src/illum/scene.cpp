#include "spectracal/illum/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "spectracal/errors.hpp"

namespace spectracal::illum {

namespace {

double eval_bumps(const std::vector<AbsorptionBump>& bumps, double nm) {
    double mu = 0.0;
    for (const auto& b : bumps) {
        const double z = (nm - b.center_nm) / b.width_nm;
        mu += b.amplitude * std::exp(-0.5 * z * z);
    }
    return mu;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Sum of a few random low-frequency plane waves, scaled into roughly [-1, 1].
std::vector<double> smooth_field(std::size_t h, std::size_t w, std::size_t modes, Rng& rng) {
    std::vector<double> field(h * w, 0.0);
    if (modes == 0) return field;
    const double norm = 1.0 / std::sqrt(static_cast<double>(modes));
    for (std::size_t m = 0; m < modes; ++m) {
        const double fy = rng.uniform(-1.5, 1.5);
        const double fx = rng.uniform(-1.5, 1.5);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double amp = norm * rng.uniform(0.5, 1.0);
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                const double arg = 2.0 * std::numbers::pi *
                                       (fy * static_cast<double>(i) / static_cast<double>(h) +
                                        fx * static_cast<double>(j) / static_cast<double>(w)) +
                                   phase;
                field[i * w + j] += amp * std::cos(arg);
            }
        }
    }
    for (double& v : field) v = std::clamp(v, -1.0, 1.0);
    return field;
}

}  // namespace

const std::array<std::vector<AbsorptionBump>, kChromophores>& chromophore_bumps() {
    static const std::array<std::vector<AbsorptionBump>, kChromophores> bumps{{
        // oxy-hemoglobin: Soret tail and the two Q bands, weak broad NIR band
        {{500.0, 25.0, 0.55}, {542.0, 15.0, 1.0}, {577.0, 15.0, 1.05}, {920.0, 90.0, 0.06}},
        // deoxy-hemoglobin: Soret tail, single broad Q band, 760 nm band
        {{500.0, 30.0, 0.45}, {556.0, 25.0, 0.95}, {680.0, 60.0, 0.1}, {760.0, 18.0, 0.12}},
        // water: weak overtones and the 970 nm band
        {{760.0, 20.0, 0.04}, {840.0, 30.0, 0.06}, {970.0, 35.0, 1.0}},
    }};
    return bumps;
}

ChromophoreBasis chromophore_basis(const WavelengthGrid& grid) {
    ChromophoreBasis basis{grid, {}};
    const auto& bumps = chromophore_bumps();
    for (std::size_t k = 0; k < kChromophores; ++k) {
        basis.mu[k].resize(grid.size());
        for (std::size_t l = 0; l < grid.size(); ++l) basis.mu[k][l] = eval_bumps(bumps[k], grid[l]);
    }
    return basis;
}

std::string chromophore_csv(const WavelengthGrid& grid) {
    std::ostringstream out;
    out << "# Chromophore absorption templates (arbitrary units per unit concentration and path).\n"
        << "# mu(lambda_nm) = sum_i amplitude_i * exp(-0.5 * ((lambda_nm - center_i) / width_i)^2)\n"
        << "# evaluated in IEEE double, bumps summed in the listed order starting from 0.0,\n"
        << "# printed with %.17g. Bump table: chromophore,center_nm,width_nm,amplitude\n";
    const auto& bumps = chromophore_bumps();
    for (std::size_t k = 0; k < kChromophores; ++k) {
        for (const auto& b : bumps[k]) {
            out << "# bump," << kChromophoreNames[k] << ',' << fmt17(b.center_nm) << ','
                << fmt17(b.width_nm) << ',' << fmt17(b.amplitude) << '\n';
        }
    }
    const auto basis = chromophore_basis(grid);
    out << "wavelength_nm,mu_oxy,mu_deoxy,mu_water\n";
    for (std::size_t l = 0; l < grid.size(); ++l) {
        out << fmt17(grid[l]);
        for (std::size_t k = 0; k < kChromophores; ++k) out << ',' << fmt17(basis.mu[k][l]);
        out << '\n';
    }
    return out.str();
}

void write_chromophore_csv(const WavelengthGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << chromophore_csv(grid);
}

ChromophoreBasis read_chromophore_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<double> nm;
    std::array<std::vector<double>, kChromophores> mu;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "wavelength_nm,mu_oxy,mu_deoxy,mu_water")
                throw FormatError(path.string() + ": unexpected chromophore column header");
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) {
            try {
                cells.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError(path.string() + ": malformed number '" + cell + "'");
            }
        }
        if (cells.size() != 1 + kChromophores)
            throw FormatError(path.string() + ": expected 4 columns per row");
        nm.push_back(cells[0]);
        for (std::size_t k = 0; k < kChromophores; ++k) mu[k].push_back(cells[k + 1]);
    }
    if (!header_seen) throw FormatError(path.string() + ": missing column header");
    return ChromophoreBasis{WavelengthGrid(std::move(nm)), std::move(mu)};
}

void SceneConfig::validate() const {
    if (height == 0 || width == 0) throw ConfigError("scene height and width must be positive");
    if (classes.size() < 2) throw ConfigError("scenes need at least 2 classes");
    if (regions < classes.size()) throw ConfigError("scene regions must be >= class count");
    if (!(variation >= 0.0 && variation < 1.0)) throw ConfigError("variation must lie in [0, 1)");
    if (!(path_length > 0.0)) throw ConfigError("path_length must be positive");
    if (!(base_scatter >= 0.0)) throw ConfigError("base_scatter must be nonnegative");
    for (const auto& c : classes) {
        if (!(c.oxy >= 0.0 && c.deoxy >= 0.0 && c.water >= 0.0))
            throw ConfigError("class concentrations must be nonnegative");
    }
}

std::vector<double> reflectance(const ChromophoreBasis& basis, const TissueComposition& c,
                                double path_length, double base_scatter) {
    const std::size_t bands = basis.grid.size();
    std::vector<double> r(bands);
    for (std::size_t l = 0; l < bands; ++l) {
        const double absorbance = c.oxy * basis.mu[0][l] + c.deoxy * basis.mu[1][l] +
                                  c.water * basis.mu[2][l];
        r[l] = std::exp(-absorbance * path_length) + base_scatter;
    }
    return r;
}

SceneTruth synth_scene(const SceneConfig& config, Rng& rng) {
    config.validate();
    const std::size_t h = config.height;
    const std::size_t w = config.width;
    const std::size_t n_classes = config.classes.size();

    // Voronoi partition; the first n_classes regions take each class once.
    struct Seed {
        double y, x;
        int label;
    };
    std::vector<Seed> seeds;
    for (std::size_t r = 0; r < config.regions; ++r) {
        const double y = rng.uniform(0.0, static_cast<double>(h));
        const double x = rng.uniform(0.0, static_cast<double>(w));
        const int label = r < n_classes ? static_cast<int>(r) : static_cast<int>(rng.below(n_classes));
        seeds.push_back({y, x, label});
    }
    LabelMask labels(h, w);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            double best = std::numeric_limits<double>::infinity();
            int label = 0;
            for (const auto& s : seeds) {
                const double dy = static_cast<double>(i) + 0.5 - s.y;
                const double dx = static_cast<double>(j) + 0.5 - s.x;
                const double d2 = dy * dy + dx * dx;
                if (d2 < best) {
                    best = d2;
                    label = s.label;
                }
            }
            labels.at(i, j) = label;
        }
    }

    std::array<std::vector<double>, kChromophores> fields;
    for (auto& f : fields) f = smooth_field(h, w, config.field_modes, rng);

    const auto basis = chromophore_basis(config.grid);
    SceneTruth truth{HsiCube(h, w, config.grid), labels, n_classes, {}, {}};
    truth.concentrations.resize(h * w * kChromophores);
    truth.oxygenation.resize(h * w);
    std::vector<double> values(h * w * config.grid.size());
    for (std::size_t p = 0; p < h * w; ++p) {
        const auto& proto = config.classes[static_cast<std::size_t>(labels.labels[p])];
        auto vary = [&](double base, std::size_t k) {
            return std::max(0.0, base * (1.0 + config.variation * fields[k][p]));
        };
        const TissueComposition c{vary(proto.oxy, 0), vary(proto.deoxy, 1), vary(proto.water, 2)};
        truth.concentrations[p * kChromophores + 0] = c.oxy;
        truth.concentrations[p * kChromophores + 1] = c.deoxy;
        truth.concentrations[p * kChromophores + 2] = c.water;
        const double hb = c.oxy + c.deoxy;
        truth.oxygenation[p] = hb > 0.0 ? c.oxy / hb : 0.0;
        const auto r = reflectance(basis, c, config.path_length, config.base_scatter);
        for (std::size_t l = 0; l < r.size(); ++l)
            values[p * r.size() + l] = static_cast<double>(static_cast<float>(r[l]));
    }
    truth.cube = HsiCube(h, w, config.grid, std::move(values));
    return truth;
}

}  // namespace spectracal::illum
