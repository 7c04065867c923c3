#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "awareness/raster/image.hpp"

namespace awareness::raster {

/// 8-bit RGB, non-interlaced. Throws IoError on open/write failure.
void write_png(const Image& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Image& img);

/// Throws IoError when unreadable and DecodeError on malformed data.
Image read_png(const std::filesystem::path& path);
Image decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace awareness::raster
