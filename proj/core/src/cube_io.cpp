#include "spectracal/cube_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "spectracal/errors.hpp"

namespace spectracal {

namespace {

constexpr std::array<char, 4> kMagic{'H', 'S', 'I', 'C'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 4 * 3;

template <typename U>
void put_le(std::vector<unsigned char>& out, U value) {
    for (std::size_t k = 0; k < sizeof(U); ++k)
        out.push_back(static_cast<unsigned char>((value >> (8 * k)) & 0xFFu));
}

template <typename U>
U get_le(const unsigned char* p) {
    U value = 0;
    for (std::size_t k = 0; k < sizeof(U); ++k) value |= static_cast<U>(p[k]) << (8 * k);
    return value;
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

void write_cube(const HsiCube& cube, const std::filesystem::path& path) {
    constexpr auto u32max = std::numeric_limits<std::uint32_t>::max();
    if (cube.height() > u32max || cube.width() > u32max || cube.bands() > u32max)
        throw FormatError("cube dimensions exceed the HSIC u32 header fields");

    std::vector<unsigned char> bytes;
    bytes.reserve(kHeaderBytes + 8 * cube.bands() + 4 * cube.values().size());
    bytes.insert(bytes.end(), kMagic.begin(), kMagic.end());
    put_le<std::uint16_t>(bytes, kHsicVersion);
    put_le<std::uint16_t>(bytes, 0);
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(cube.height()));
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(cube.width()));
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(cube.bands()));
    for (double nm : cube.grid().nanometers()) put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>(nm));
    for (double v : cube.values())
        put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

HsiCube read_cube(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    if (bytes.size() < kHeaderBytes) throw FormatError(path.string() + ": truncated header");
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
        throw FormatError(path.string() + ": bad magic bytes");
    const auto* p = bytes.data() + 4;
    const auto version = get_le<std::uint16_t>(p);
    if (version != kHsicVersion)
        throw FormatError(path.string() + ": unsupported HSIC version " + std::to_string(version));
    const std::uint64_t h = get_le<std::uint32_t>(p + 4);
    const std::uint64_t w = get_le<std::uint32_t>(p + 8);
    const std::uint64_t b = get_le<std::uint32_t>(p + 12);
    if (h == 0 || w == 0 || b < 2) throw FormatError(path.string() + ": invalid dimensions");

    // Each factor fits in 32 bits, so h*w cannot overflow; guard the triple product.
    const std::uint64_t hw = h * w;
    if (hw > std::numeric_limits<std::uint64_t>::max() / b)
        throw FormatError(path.string() + ": dimension overflow");
    const std::uint64_t count = hw * b;
    const std::uint64_t payload = bytes.size() - kHeaderBytes;
    if (payload < 8 * b || (payload - 8 * b) / 4 < count)
        throw FormatError(path.string() + ": payload shorter than declared dimensions");
    if (payload != 8 * b + 4 * count) throw FormatError(path.string() + ": trailing bytes after payload");

    const unsigned char* q = bytes.data() + kHeaderBytes;
    std::vector<double> nm(b);
    for (auto& v : nm) {
        v = std::bit_cast<double>(get_le<std::uint64_t>(q));
        q += 8;
    }
    std::vector<double> values(count);
    for (auto& v : values) {
        v = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(q)));
        q += 4;
    }
    try {
        return HsiCube(h, w, WavelengthGrid(std::move(nm)), std::move(values));
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::filesystem::path meta_path(const std::filesystem::path& cube_path) {
    auto p = cube_path;
    p.replace_extension(".meta.json");
    return p;
}

void write_meta(const std::filesystem::path& cube_path, const nlohmann::json& meta) {
    write_json_file(meta_path(cube_path), meta);
}

std::optional<nlohmann::json> read_meta(const std::filesystem::path& cube_path) {
    const auto p = meta_path(cube_path);
    if (!std::filesystem::exists(p)) return std::nullopt;
    return read_json_file(p);
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& value) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << value.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace spectracal
