#include "hierseg/raster.hpp"

#include <algorithm>

namespace hierseg {

namespace {

void check_dims(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw ShapeError("raster dimensions must be positive, got " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
}

}  // namespace

std::string to_string(Extent e) { return std::to_string(e.height) + "x" + std::to_string(e.width); }

void require_same_extent(Extent a, Extent b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": dimension mismatch " + to_string(a) + " vs " + to_string(b));
  }
}

Raster8::Raster8(int height, int width, int channels, std::uint8_t fill) : extent_{height, width}, channels_(channels) {
  check_dims(height, width);
  if (channels != 1 && channels != 3) {
    throw ShapeError("raster channel count must be 1 or 3, got " + std::to_string(channels));
  }
  data_.assign(extent_.pixels() * static_cast<std::size_t>(channels), fill);
}

BinaryMask::BinaryMask(int height, int width) : extent_{height, width} {
  check_dims(height, width);
  bits_.assign(extent_.pixels(), 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

const char* class_name(ContactClass c) {
  switch (c) {
    case ContactClass::kBackground:
      return "Background";
    case ContactClass::kMtp:
      return "MTP";
    case ContactClass::kMfp:
      return "MFP";
  }
  return "?";
}

LabelMask::LabelMask(int height, int width) : extent_{height, width} {
  check_dims(height, width);
  labels_.assign(extent_.pixels(), 0);
}

BinaryMask LabelMask::class_mask(ContactClass c) const {
  BinaryMask out(extent_.height, extent_.width);
  auto bits = out.bits();
  const auto id = static_cast<std::uint8_t>(c);
  for (std::size_t i = 0; i < labels_.size(); ++i) bits[i] = labels_[i] == id ? 1 : 0;
  return out;
}

BinaryMask LabelMask::foreground() const {
  BinaryMask out(extent_.height, extent_.width);
  auto bits = out.bits();
  for (std::size_t i = 0; i < labels_.size(); ++i) bits[i] = labels_[i] != 0 ? 1 : 0;
  return out;
}

std::size_t LabelMask::count(ContactClass c) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(c)));
}

}  // namespace hierseg
