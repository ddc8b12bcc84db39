#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "spectracal/cube.hpp"
#include "spectracal/rng.hpp"

namespace testing_support {

using namespace spectracal;

inline HsiCube random_cube(std::size_t h, std::size_t w, const WavelengthGrid& grid, Rng& rng,
                           double lo = 0.0, double hi = 1.0) {
    std::vector<double> v(h * w * grid.size());
    for (double& x : v) x = rng.uniform(lo, hi);
    return HsiCube(h, w, grid, std::move(v));
}

inline WhiteRefImage random_white(std::size_t h, std::size_t w, const WavelengthGrid& grid, Rng& rng) {
    return WhiteRefImage(random_cube(h, w, grid, rng, 0.05, 2.0));
}

inline WavelengthGrid small_grid(std::size_t bands = 4) {
    return WavelengthGrid::uniform(500.0, 30.0, bands);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("spectracal_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p);

}  // namespace testing_support

#include <fstream>
#include <sstream>

inline std::string testing_support::slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
