#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "hierseg/raster.hpp"

namespace hierseg {

// Pixelwise set operations. All throw ShapeError on mismatched extents.
BinaryMask intersect(const BinaryMask& a, const BinaryMask& b);
BinaryMask unite(const BinaryMask& a, const BinaryMask& b);
BinaryMask subtract(const BinaryMask& a, const BinaryMask& b);
BinaryMask complement(const BinaryMask& a);

// MTP = ap & test & retest, MFP = ap \ MTP, everything else Background.
LabelMask generate_mtp_mfp(const BinaryMask& ap, const BinaryMask& ofr_test, const BinaryMask& ofr_retest);

// Gray levels of the multiclass mask encoding.
inline constexpr std::uint8_t kGrayBackground = 0;
inline constexpr std::uint8_t kGrayMfp = 128;
inline constexpr std::uint8_t kGrayMtp = 255;

Raster8 encode_label_mask(const LabelMask& m);
// Throws FormatError listing any gray values outside {0, 128, 255}.
LabelMask decode_label_mask(const Raster8& raster);

// Binary masks are stored as {0, 255}.
Raster8 encode_binary_mask(const BinaryMask& m);
BinaryMask decode_binary_mask(const Raster8& raster);

// Crop rectangle in source pixels followed by a resize to a square output.
struct PatientTransform {
  int crop_x = 0;
  int crop_y = 0;
  int crop_width = 0;
  int crop_height = 0;
  int output_size = 1000;

  static PatientTransform identity(Extent e);
  // Throws RangeError unless the crop lies inside `source`.
  void validate(Extent source) const;
  bool operator==(const PatientTransform&) const = default;
};

// Images resample bilinearly, masks with nearest neighbour.
Raster8 apply_patient_transform(const Raster8& image, const PatientTransform& t);
BinaryMask apply_patient_transform(const BinaryMask& mask, const PatientTransform& t);
LabelMask apply_patient_transform(const LabelMask& mask, const PatientTransform& t);

// Sidecar format, one `key: value` per line.
std::string format_transform(const PatientTransform& t);
PatientTransform parse_transform(std::string_view text);

using Rgb = std::array<std::uint8_t, 3>;
inline constexpr Rgb kOverlayFalsePositive{255, 0, 0};
inline constexpr Rgb kOverlayFalseNegative{0, 255, 0};
inline constexpr Rgb kOverlayTruePositive{255, 255, 0};

// Red where only `pred` is set, green where only `target` is, yellow where
// both are. Over `base` (RGB, same extent) the colours are blended 1:1,
// otherwise drawn on black.
Raster8 render_overlay(const BinaryMask& pred, const BinaryMask& target, const std::optional<Raster8>& base = {});

}  // namespace hierseg
