#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hierseg/raster.hpp"

namespace hierseg {

// 8-bit PNG codec. Decoding accepts gray, gray+alpha, RGB, RGBA and palette
// images; alpha is dropped and gray stays single-channel.
std::vector<std::uint8_t> encode_png(const Raster8& raster);
Raster8 decode_png(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");

Raster8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster8& raster);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file under the final name.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hierseg
