/* grid_io.cpp */

#include "imagimap/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "imagimap/errors.hpp"

namespace imagimap {

namespace le {

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
}

void PutF32(std::vector<std::uint8_t>& out, float v)
{
    PutU32(out, std::bit_cast<std::uint32_t>(v));
}

void PutF64(std::vector<std::uint8_t>& out, double v)
{
    const auto bits = std::bit_cast<std::uint64_t>(v);
    PutU32(out, static_cast<std::uint32_t>(bits & 0xffffffffu));
    PutU32(out, static_cast<std::uint32_t>(bits >> 32));
}

std::uint32_t GetU32(const std::vector<std::uint8_t>& in, std::size_t& pos)
{
    if (pos + 4 > in.size())
        throw FormatError("unexpected end of data");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

float GetF32(const std::vector<std::uint8_t>& in, std::size_t& pos)
{
    return std::bit_cast<float>(GetU32(in, pos));
}

double GetF64(const std::vector<std::uint8_t>& in, std::size_t& pos)
{
    const std::uint64_t lo = GetU32(in, pos);
    const std::uint64_t hi = GetU32(in, pos);
    return std::bit_cast<double>(lo | (hi << 32));
}

} // namespace le

std::vector<std::uint8_t> EncodeImgm(const GridMap& grid)
{
    std::vector<std::uint8_t> out { 'I', 'M', 'G', 'M' };
    out.reserve(16 + grid.NumCells() * 4);
    le::PutU32(out, static_cast<std::uint32_t>(grid.Width()));
    le::PutU32(out, static_cast<std::uint32_t>(grid.Height()));
    le::PutF32(out, static_cast<float>(grid.Resolution()));
    for (const float v : grid.Values())
        le::PutF32(out, v);
    return out;
}

GridMap DecodeImgm(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "IMGM", 4) != 0)
        throw FormatError("not an IMGM grid file");
    std::size_t pos = 4;
    const auto width = le::GetU32(bytes, pos);
    const auto height = le::GetU32(bytes, pos);
    const float resolution = le::GetF32(bytes, pos);
    if (width == 0 || height == 0 || !(resolution > 0.0f))
        throw FormatError("IMGM header has invalid geometry");
    if (bytes.size() != 16 + static_cast<std::size_t>(width) * height * 4)
        throw FormatError("IMGM payload size does not match header");

    GridMap grid(static_cast<int>(width), static_cast<int>(height), resolution);
    auto values = grid.MutableValues();
    for (auto& v : values) {
        v = le::GetF32(bytes, pos);
        if (!(v >= 0.0f && v <= 1.0f))
            throw FormatError("IMGM value outside [0, 1]");
    }
    return grid;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MissingInputError("cannot open " + path.string());
    return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
}

void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

void WriteFileText(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

void WriteImgm(const std::filesystem::path& path, const GridMap& grid)
{
    WriteFileBytes(path, EncodeImgm(grid));
}

GridMap ReadImgm(const std::filesystem::path& path)
{
    return DecodeImgm(ReadFileBytes(path));
}

std::string EncodePgm(const GridMap& grid)
{
    std::ostringstream header;
    header << "P5\n" << grid.Width() << ' ' << grid.Height() << "\n255\n";
    std::string out = header.str();
    out.reserve(out.size() + grid.NumCells());
    for (const float v : grid.Values()) {
        const long q = std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f);
        out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
    }
    return out;
}

void WritePgm(const std::filesystem::path& path, const GridMap& grid)
{
    WriteFileText(path, EncodePgm(grid));
}

GridMap ReadPgm(const std::filesystem::path& path, double resolution)
{
    const auto bytes = ReadFileBytes(path);
    std::string text(bytes.begin(), bytes.end());
    std::istringstream in(text);
    std::string magic;
    int width = 0;
    int height = 0;
    int maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (magic != "P5" || width <= 0 || height <= 0 || maxval != 255)
        throw FormatError("unsupported PGM file " + path.string());
    in.get();
    const auto offset = static_cast<std::size_t>(in.tellg());
    if (bytes.size() < offset + static_cast<std::size_t>(width) * height)
        throw FormatError("truncated PGM file " + path.string());

    GridMap grid(width, height, resolution);
    auto values = grid.MutableValues();
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = static_cast<float>(bytes[offset + i]) / 255.0f;
    return grid;
}

} // namespace imagimap
