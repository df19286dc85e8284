#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hierseg/error.hpp"

namespace hierseg {

struct Extent {
  int height = 0;
  int width = 0;

  std::size_t pixels() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  bool operator==(const Extent&) const = default;
};

std::string to_string(Extent e);

// Throws ShapeError naming `what` when the extents differ.
void require_same_extent(Extent a, Extent b, const char* what);

// Interleaved 8-bit raster with 1 (grayscale) or 3 (RGB) channels.
class Raster8 {
 public:
  Raster8() = default;
  Raster8(int height, int width, int channels, std::uint8_t fill = 0);

  int height() const { return extent_.height; }
  int width() const { return extent_.width; }
  int channels() const { return channels_; }
  Extent extent() const { return extent_; }

  std::uint8_t& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  std::uint8_t at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  bool operator==(const Raster8&) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(extent_.width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  Extent extent_;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// Single-class raster of positive/negative pixels.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);

  int height() const { return extent_.height; }
  int width() const { return extent_.width; }
  Extent extent() const { return extent_; }

  bool at(int y, int x) const { return bits_[index(y, x)] != 0; }
  void set(int y, int x, bool value = true) { bits_[index(y, x)] = value ? 1 : 0; }

  // Row-major 0/1 bytes.
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> bits() { return bits_; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(extent_.width) + static_cast<std::size_t>(x);
  }

  Extent extent_;
  std::vector<std::uint8_t> bits_;
};

enum class ContactClass : std::uint8_t { kBackground = 0, kMtp = 1, kMfp = 2 };

inline constexpr int kNumContactClasses = 3;

const char* class_name(ContactClass c);

// Per-pixel class id raster over {Background, MTP, MFP}.
class LabelMask {
 public:
  LabelMask() = default;
  LabelMask(int height, int width);

  int height() const { return extent_.height; }
  int width() const { return extent_.width; }
  Extent extent() const { return extent_; }

  ContactClass at(int y, int x) const { return static_cast<ContactClass>(labels_[index(y, x)]); }
  void set(int y, int x, ContactClass c) { labels_[index(y, x)] = static_cast<std::uint8_t>(c); }

  std::span<const std::uint8_t> labels() const { return labels_; }

  // Pixels carrying class `c`.
  BinaryMask class_mask(ContactClass c) const;
  // Pixels carrying any class other than Background.
  BinaryMask foreground() const;
  std::size_t count(ContactClass c) const;

  bool operator==(const LabelMask&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(extent_.width) + static_cast<std::size_t>(x);
  }

  Extent extent_;
  std::vector<std::uint8_t> labels_;
};

}  // namespace hierseg
