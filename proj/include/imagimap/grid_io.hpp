/* grid_io.hpp */

#ifndef IMAGIMAP_GRID_IO_HPP
#define IMAGIMAP_GRID_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imagimap/grid_core.hpp"

namespace imagimap {

/*
 * Lossless grid container: 16-byte header ("IMGM", u32 width, u32 height,
 * f32 resolution) followed by row-major little-endian f32 values.
 */
std::vector<std::uint8_t> EncodeImgm(const GridMap& grid);
GridMap DecodeImgm(const std::vector<std::uint8_t>& bytes);

void WriteImgm(const std::filesystem::path& path, const GridMap& grid);
GridMap ReadImgm(const std::filesystem::path& path);

/* Binary PGM (P5), values quantized as round(255 * v) */
std::string EncodePgm(const GridMap& grid);
void WritePgm(const std::filesystem::path& path, const GridMap& grid);
/* Reads 8-bit P5 files; values are scaled back to [0, 1] */
GridMap ReadPgm(const std::filesystem::path& path, double resolution);

/* Little-endian helpers shared by the binary formats */
namespace le {
void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v);
void PutF32(std::vector<std::uint8_t>& out, float v);
void PutF64(std::vector<std::uint8_t>& out, double v);
std::uint32_t GetU32(const std::vector<std::uint8_t>& in, std::size_t& pos);
float GetF32(const std::vector<std::uint8_t>& in, std::size_t& pos);
double GetF64(const std::vector<std::uint8_t>& in, std::size_t& pos);
} // namespace le

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& bytes);
void WriteFileText(const std::filesystem::path& path, const std::string& text);

} // namespace imagimap

#endif // IMAGIMAP_GRID_IO_HPP
