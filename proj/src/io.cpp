#include "lfqa/io.hpp"

#include <png.h>

#include <csetjmp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "lfqa/error.hpp"

namespace lfqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PngWriteBuffer {
  Bytes bytes;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* buffer = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
  buffer->bytes.insert(buffer->bytes.end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngReadCursor {
  const Bytes* bytes;
  std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes->size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes->data() + cursor->offset, length);
  cursor->offset += length;
}

struct PngErrorSlot {
  char message[256] = {0};
};

[[noreturn]] void png_fail(png_structp png, png_const_charp message) {
  auto* slot = static_cast<PngErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", message);
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

Bytes encode_png(const std::uint8_t* rows, int width, int height, int bit_depth,
                 int color_type, std::size_t row_bytes) {
  PngErrorSlot error;
  PngWriteBuffer buffer;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kFormat, std::string("png: ") + error.message);
  }
  {
    png_set_write_fn(png, &buffer, png_write_to_vector, png_flush_noop);
    png_set_compression_level(png, 3);
    png_set_IHDR(png, info, width, height, bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
      png_write_row(png, const_cast<png_bytep>(rows + y * row_bytes));
    }
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
  return std::move(buffer.bytes);
}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  Bytes pixels;
  std::size_t row_bytes = 0;
};

DecodedPng decode_png(const Bytes& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kFormat, "not a PNG stream");
  }
  PngErrorSlot error;
  PngReadCursor cursor{&bytes, 0};
  DecodedPng out;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kFormat, std::string("png: ") + error.message);
  }
  {
    png_set_read_fn(png, &cursor, png_read_from_vector);
    png_read_info(png, info);
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);
    if (out.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (out.bit_depth == 16) png_set_swap(png);
    png_read_update_info(png, info);
    out.color_type = png_get_color_type(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    out.row_bytes = png_get_rowbytes(png, info);
    out.pixels.resize(out.row_bytes * out.height);
    for (int y = 0; y < out.height; ++y) {
      png_read_row(png, out.pixels.data() + y * out.row_bytes, nullptr);
    }
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

const char* source_name(SourceKind kind) {
  return kind == SourceKind::kSynthetic ? "synthetic" : "external";
}

}  // namespace

Bytes encode_png_rgb8(const Image& image) {
  Bytes rows(image.data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(image.data[i], 0.0, 1.0) * 255.0));
  }
  return encode_png(rows.data(), image.width, image.height, 8,
                    PNG_COLOR_TYPE_RGB,
                    static_cast<std::size_t>(image.width) * 3);
}

Image decode_png_rgb8(const Bytes& bytes) {
  DecodedPng png = decode_png(bytes);
  if (png.bit_depth != 8) {
    throw Error(ErrorCode::kFormat, "expected an 8-bit PNG");
  }
  int channels = 0;
  switch (png.color_type) {
    case PNG_COLOR_TYPE_GRAY: channels = 1; break;
    case PNG_COLOR_TYPE_GRAY_ALPHA: channels = 2; break;
    case PNG_COLOR_TYPE_RGB: channels = 3; break;
    case PNG_COLOR_TYPE_RGB_ALPHA: channels = 4; break;
    default: throw Error(ErrorCode::kFormat, "unsupported PNG color type");
  }
  Image image(png.width, png.height);
  for (int y = 0; y < png.height; ++y) {
    const std::uint8_t* row = png.pixels.data() + y * png.row_bytes;
    for (int x = 0; x < png.width; ++x) {
      const std::uint8_t* px = row + x * channels;
      for (int c = 0; c < 3; ++c) {
        const std::uint8_t v = channels >= 3 ? px[c] : px[0];
        image(y, x, c) = v / 255.0;
      }
    }
  }
  return image;
}

Bytes encode_png_gray16(const std::vector<std::uint16_t>& samples, int width,
                        int height) {
  Bytes rows(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rows[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);
    rows[2 * i + 1] = static_cast<std::uint8_t>(samples[i] & 0xff);
  }
  return encode_png(rows.data(), width, height, 16, PNG_COLOR_TYPE_GRAY,
                    static_cast<std::size_t>(width) * 2);
}

std::vector<std::uint16_t> decode_png_gray16(const Bytes& bytes, int* width,
                                             int* height) {
  DecodedPng png = decode_png(bytes);
  if (png.bit_depth != 16 || png.color_type != PNG_COLOR_TYPE_GRAY) {
    throw Error(ErrorCode::kFormat, "expected a 16-bit grayscale PNG");
  }
  *width = png.width;
  *height = png.height;
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(png.width) *
                                     png.height);
  // png_set_swap delivered little-endian samples.
  for (int y = 0; y < png.height; ++y) {
    const std::uint8_t* row = png.pixels.data() + y * png.row_bytes;
    for (int x = 0; x < png.width; ++x) {
      samples[static_cast<std::size_t>(y) * png.width + x] =
          static_cast<std::uint16_t>(row[2 * x] | (row[2 * x + 1] << 8));
    }
  }
  return samples;
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return Bytes((std::istreambuf_iterator<char>(in)),
               std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void write_text_file(const fs::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

std::string read_text_file(const fs::path& path) {
  Bytes bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

std::string view_file_name(int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "view_%04d.png", index);
  return name;
}

std::string depth_file_name(int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "depth_%04d.png", index);
  return name;
}

std::string manifest_to_json(const Manifest& m) {
  json j = {
      {"name", m.name},
      {"angular_count", m.angular_count},
      {"width", m.width},
      {"height", m.height},
      {"max_step_disparity", m.max_step_disparity},
      {"source", source_name(m.source)},
      {"depth_available", m.depth_available},
  };
  if (m.depth_available) {
    j["depth_min"] = m.depth_min;
    j["depth_max"] = m.depth_max;
  }
  if (!m.view_positions.empty()) j["view_positions"] = m.view_positions;
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  Manifest m;
  try {
    const json j = json::parse(text);
    m.name = j.at("name").get<std::string>();
    m.angular_count = j.at("angular_count").get<int>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.max_step_disparity = j.at("max_step_disparity").get<double>();
    const std::string source = j.value("source", "synthetic");
    if (source == "synthetic") {
      m.source = SourceKind::kSynthetic;
    } else if (source == "external") {
      m.source = SourceKind::kExternal;
    } else {
      throw Error(ErrorCode::kFormat, "unknown manifest source '" + source + "'");
    }
    m.depth_available = j.value("depth_available", false);
    m.depth_min = j.value("depth_min", 0.0);
    m.depth_max = j.value("depth_max", 0.0);
    if (j.contains("view_positions")) {
      m.view_positions = j.at("view_positions").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad manifest: ") + e.what());
  }
  if (m.angular_count < 1 || m.width < 1 || m.height < 1) {
    throw Error(ErrorCode::kFormat, "manifest dimensions must be positive");
  }
  return m;
}

namespace {

// Numbered files "<prefix>NNNN.png" in dir, keyed by index.
std::map<int, fs::path> numbered_files(const fs::path& dir,
                                       const std::string& prefix) {
  std::map<int, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() != prefix.size() + 8 || name.rfind(prefix, 0) != 0 ||
        name.substr(name.size() - 4) != ".png") {
      continue;
    }
    const std::string digits = name.substr(prefix.size(), 4);
    if (!std::all_of(digits.begin(), digits.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    files[std::stoi(digits)] = entry.path();
  }
  return files;
}

}  // namespace

LightField load_light_field(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile;
  if (!fs::is_regular_file(manifest_path)) {
    throw Error(ErrorCode::kMissingManifest,
                "missing manifest in " + dir.string());
  }
  LightField lf;
  lf.manifest = manifest_from_json(read_text_file(manifest_path));
  const std::map<int, fs::path> files = numbered_files(dir, "view_");
  if (static_cast<int>(files.size()) != lf.manifest.angular_count) {
    throw Error(ErrorCode::kViewCountMismatch,
                "view count mismatch: manifest declares " +
                    std::to_string(lf.manifest.angular_count) + ", found " +
                    std::to_string(files.size()));
  }
  int expected = 0;
  for (const auto& [index, path] : files) {
    if (index != expected++) {
      throw Error(ErrorCode::kViewCountMismatch,
                  "view count mismatch: view indices are not contiguous");
    }
    Image view = decode_png_rgb8(read_file(path));
    if (view.width != lf.manifest.width || view.height != lf.manifest.height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "inconsistent image dimensions in " + path.string());
    }
    lf.views.push_back(std::move(view));
  }
  return lf;
}

std::optional<DepthMap> load_depth_map(const fs::path& dir) {
  const Manifest m = manifest_from_json(read_text_file(dir / kManifestFile));
  if (!m.depth_available) return std::nullopt;
  DepthMap depth;
  const double range = m.depth_max - m.depth_min;
  for (int i = 0; i < m.angular_count; ++i) {
    int width = 0;
    int height = 0;
    const std::vector<std::uint16_t> samples =
        decode_png_gray16(read_file(dir / depth_file_name(i)), &width, &height);
    if (width != m.width || height != m.height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "depth image size differs from the views");
    }
    Plane plane(width, height);
    for (std::size_t p = 0; p < samples.size(); ++p) {
      plane.data[p] = m.depth_min + range * (samples[p] / 65535.0);
    }
    depth.views.push_back(std::move(plane));
  }
  return depth;
}

void save_light_field(const LightField& lf, const fs::path& dir,
                      const DepthMap* depth) {
  validate(lf);
  if (depth != nullptr &&
      static_cast<int>(depth->views.size()) != lf.view_count()) {
    throw Error(ErrorCode::kViewCountMismatch,
                "depth map view count differs from the light field");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "cannot create directory " + dir.string());
  }
  Manifest manifest = lf.manifest;
  manifest.depth_available = depth != nullptr;
  if (depth != nullptr) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Plane& p : depth->views) {
      for (double v : p.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    manifest.depth_min = lo;
    manifest.depth_max = hi;
    const double range = hi - lo;
    for (int i = 0; i < lf.view_count(); ++i) {
      const Plane& p = depth->views[i];
      std::vector<std::uint16_t> samples(p.data.size());
      for (std::size_t s = 0; s < samples.size(); ++s) {
        samples[s] = range > 0.0 ? static_cast<std::uint16_t>(std::lround(
                                       (p.data[s] - lo) / range * 65535.0))
                                 : 0;
      }
      write_file(dir / depth_file_name(i),
                 encode_png_gray16(samples, p.width, p.height));
    }
  } else {
    manifest.depth_min = 0.0;
    manifest.depth_max = 0.0;
  }
  for (int i = 0; i < lf.view_count(); ++i) {
    write_file(dir / view_file_name(i), encode_png_rgb8(lf.views[i]));
  }
  write_text_file(dir / kManifestFile, manifest_to_json(manifest));
}

}  // namespace lfqa
