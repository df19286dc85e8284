#include "hierseg/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

#include "hierseg/error.hpp"

namespace hierseg {

namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->bytes.data() + cur->pos, len);
  cur->pos += len;
}

void write_callback(png_structp png, png_bytep data, png_size_t len) {
  auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  buf->insert(buf->end(), data, data + len);
}

void flush_callback(png_structp) {}

[[noreturn]] void error_callback(png_structp, png_const_charp msg) { throw FormatError(msg); }

void warning_callback(png_structp, png_const_charp) {}

// Owns the libpng read/write structs.
class PngHandle {
 public:
  explicit PngHandle(bool writing) : writing_(writing) {
    png_ = writing ? png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, error_callback, warning_callback)
                   : png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, error_callback, warning_callback);
    if (!png_) throw FormatError("libpng initialisation failed");
    info_ = png_create_info_struct(png_);
    if (!info_) {
      destroy();
      throw FormatError("libpng initialisation failed");
    }
  }
  PngHandle(const PngHandle&) = delete;
  PngHandle& operator=(const PngHandle&) = delete;
  ~PngHandle() { destroy(); }

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  void destroy() {
    if (writing_) {
      png_destroy_write_struct(&png_, info_ ? &info_ : nullptr);
    } else {
      png_destroy_read_struct(&png_, info_ ? &info_ : nullptr, nullptr);
    }
  }

  bool writing_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster8& raster) {
  if (raster.channels() != 1 && raster.channels() != 3) throw FormatError("PNG encoder expects 1 or 3 channels");
  std::vector<std::uint8_t> out;
  PngHandle h(true);
  png_set_write_fn(h.png(), &out, write_callback, flush_callback);
  png_set_IHDR(h.png(), h.info(), static_cast<png_uint_32>(raster.width()), static_cast<png_uint_32>(raster.height()),
               8, raster.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(h.png(), h.info());
  const auto stride = static_cast<std::size_t>(raster.width()) * static_cast<std::size_t>(raster.channels());
  const auto data = raster.data();
  for (int y = 0; y < raster.height(); ++y) {
    png_write_row(h.png(), const_cast<png_bytep>(data.data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(h.png(), nullptr);
  return out;
}

Raster8 decode_png(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw FormatError(name + ": not a PNG file");
  try {
    PngHandle h(false);
    ReadCursor cursor{bytes, 0};
    png_set_read_fn(h.png(), &cursor, read_callback);
    png_read_info(h.png(), h.info());

    const auto color = png_get_color_type(h.png(), h.info());
    const auto depth = png_get_bit_depth(h.png(), h.info());
    if (depth == 16) png_set_strip_16(h.png());
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(h.png());
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(h.png());
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(h.png());
    png_read_update_info(h.png(), h.info());

    const auto width = static_cast<int>(png_get_image_width(h.png(), h.info()));
    const auto height = static_cast<int>(png_get_image_height(h.png(), h.info()));
    const auto channels = static_cast<int>(png_get_channels(h.png(), h.info()));
    if (channels != 1 && channels != 3) throw FormatError(name + ": unsupported PNG channel layout");

    Raster8 out(height, width, channels);
    const auto stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    auto data = out.data();
    for (int y = 0; y < height; ++y) png_read_row(h.png(), data.data() + static_cast<std::size_t>(y) * stride, nullptr);
    return out;
  } catch (const FormatError& e) {
    throw FormatError(name + ": " + e.what());
  }
}

Raster8 read_png(const std::filesystem::path& path) { return decode_png(read_file_bytes(path), path.string()); }

void write_png(const std::filesystem::path& path, const Raster8& raster) {
  write_file_atomic(path, std::span<const std::uint8_t>(encode_png(raster)));
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hierseg
