#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lfqa/image.hpp"
#include "lfqa/light_field.hpp"

namespace lfqa {

using Bytes = std::vector<std::uint8_t>;

// Lossless PNG codecs. RGB images are stored as 8-bit, depth as 16-bit gray.
Bytes encode_png_rgb8(const Image& image);
Image decode_png_rgb8(const Bytes& bytes);
Bytes encode_png_gray16(const std::vector<std::uint16_t>& samples, int width,
                        int height);
std::vector<std::uint16_t> decode_png_gray16(const Bytes& bytes, int* width,
                                             int* height);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

inline constexpr const char* kManifestFile = "manifest.json";

// "view_0007.png" / "depth_0007.png"
std::string view_file_name(int index);
std::string depth_file_name(int index);

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);

// Reads manifest.json plus view_%04d.png files, sorted by angular index.
LightField load_light_field(const std::filesystem::path& dir);

// Depth images of a directory whose manifest has depth_available; nullopt
// otherwise.
std::optional<DepthMap> load_depth_map(const std::filesystem::path& dir);

// Writes the manifest and one 8-bit PNG per view (and per depth view when
// given). Samples are rounded to the nearest 1/255.
void save_light_field(const LightField& lf, const std::filesystem::path& dir,
                      const DepthMap* depth = nullptr);

}  // namespace lfqa
