#include "hierseg/mask.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <yaml-cpp/yaml.h>

#include "hierseg/error.hpp"

namespace hierseg {

namespace {

template <class Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, const char* what, Op op) {
  require_same_extent(a.extent(), b.extent(), what);
  BinaryMask out(a.height(), a.width());
  const auto x = a.bits();
  const auto y = b.bits();
  auto o = out.bits();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = op(x[i], y[i]) ? 1 : 0;
  return out;
}

// Source row/column for nearest-neighbour sampling of output index `o`.
int nearest_source(int o, int crop_origin, int crop_len, int out_len) {
  const auto s = static_cast<int>(std::floor((o + 0.5) * crop_len / out_len));
  return crop_origin + std::clamp(s, 0, crop_len - 1);
}

template <class Get, class Set>
void resample_nearest(const PatientTransform& t, Get get, Set set) {
  for (int oy = 0; oy < t.output_size; ++oy) {
    const int sy = nearest_source(oy, t.crop_y, t.crop_height, t.output_size);
    for (int ox = 0; ox < t.output_size; ++ox) {
      set(oy, ox, get(sy, nearest_source(ox, t.crop_x, t.crop_width, t.output_size)));
    }
  }
}

}  // namespace

BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "intersect", [](auto x, auto y) { return x && y; });
}

BinaryMask unite(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "union", [](auto x, auto y) { return x || y; });
}

BinaryMask subtract(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "subtract", [](auto x, auto y) { return x && !y; });
}

BinaryMask complement(const BinaryMask& a) {
  BinaryMask out(a.height(), a.width());
  const auto x = a.bits();
  auto o = out.bits();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] ? 0 : 1;
  return out;
}

LabelMask generate_mtp_mfp(const BinaryMask& ap, const BinaryMask& ofr_test, const BinaryMask& ofr_retest) {
  require_same_extent(ap.extent(), ofr_test.extent(), "AP vs OFR test");
  require_same_extent(ap.extent(), ofr_retest.extent(), "AP vs OFR retest");
  const BinaryMask mtp = intersect(ap, intersect(ofr_test, ofr_retest));
  const BinaryMask mfp = subtract(ap, mtp);
  LabelMask out(ap.height(), ap.width());
  for (int y = 0; y < ap.height(); ++y) {
    for (int x = 0; x < ap.width(); ++x) {
      if (mtp.at(y, x)) {
        out.set(y, x, ContactClass::kMtp);
      } else if (mfp.at(y, x)) {
        out.set(y, x, ContactClass::kMfp);
      }
    }
  }
  return out;
}

Raster8 encode_label_mask(const LabelMask& m) {
  Raster8 out(m.height(), m.width(), 1);
  const auto labels = m.labels();
  auto data = out.data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (static_cast<ContactClass>(labels[i])) {
      case ContactClass::kBackground:
        data[i] = kGrayBackground;
        break;
      case ContactClass::kMtp:
        data[i] = kGrayMtp;
        break;
      case ContactClass::kMfp:
        data[i] = kGrayMfp;
        break;
      default:
        throw FormatError("label mask holds class id " + std::to_string(labels[i]));
    }
  }
  return out;
}

LabelMask decode_label_mask(const Raster8& raster) {
  if (raster.channels() != 1) throw FormatError("label mask must be single-channel grayscale");
  LabelMask out(raster.height(), raster.width());
  std::set<int> illegal;
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      switch (raster.at(y, x)) {
        case kGrayBackground:
          break;
        case kGrayMtp:
          out.set(y, x, ContactClass::kMtp);
          break;
        case kGrayMfp:
          out.set(y, x, ContactClass::kMfp);
          break;
        default:
          illegal.insert(raster.at(y, x));
      }
    }
  }
  if (!illegal.empty()) {
    std::string values;
    for (int v : illegal) values += (values.empty() ? "" : ", ") + std::to_string(v);
    throw FormatError("label mask contains illegal gray values {" + values + "}");
  }
  return out;
}

Raster8 encode_binary_mask(const BinaryMask& m) {
  Raster8 out(m.height(), m.width(), 1);
  const auto bits = m.bits();
  auto data = out.data();
  for (std::size_t i = 0; i < bits.size(); ++i) data[i] = bits[i] ? 255 : 0;
  return out;
}

BinaryMask decode_binary_mask(const Raster8& raster) {
  if (raster.channels() != 1) throw FormatError("binary mask must be single-channel grayscale");
  BinaryMask out(raster.height(), raster.width());
  std::set<int> illegal;
  const auto data = raster.data();
  auto bits = out.bits();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 255) {
      bits[i] = 1;
    } else if (data[i] != 0) {
      illegal.insert(data[i]);
    }
  }
  if (!illegal.empty()) {
    std::string values;
    for (int v : illegal) values += (values.empty() ? "" : ", ") + std::to_string(v);
    throw FormatError("binary mask contains illegal gray values {" + values + "}");
  }
  return out;
}

PatientTransform PatientTransform::identity(Extent e) {
  if (e.height != e.width) throw RangeError("identity transform needs a square raster, got " + to_string(e));
  return {0, 0, e.width, e.height, e.width};
}

void PatientTransform::validate(Extent source) const {
  if (crop_width <= 0 || crop_height <= 0 || output_size <= 0) {
    throw RangeError("transform crop and output sizes must be positive");
  }
  if (crop_x < 0 || crop_y < 0 || crop_x + crop_width > source.width || crop_y + crop_height > source.height) {
    throw RangeError("crop rectangle (" + std::to_string(crop_x) + ", " + std::to_string(crop_y) + ", " +
                     std::to_string(crop_width) + "x" + std::to_string(crop_height) + ") exceeds source " +
                     to_string(source));
  }
}

Raster8 apply_patient_transform(const Raster8& image, const PatientTransform& t) {
  t.validate(image.extent());
  const int c = image.channels();
  Raster8 out(t.output_size, t.output_size, c);
  const double sy_scale = static_cast<double>(t.crop_height) / t.output_size;
  const double sx_scale = static_cast<double>(t.crop_width) / t.output_size;
  for (int oy = 0; oy < t.output_size; ++oy) {
    const double fy = std::clamp((oy + 0.5) * sy_scale - 0.5, 0.0, static_cast<double>(t.crop_height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, t.crop_height - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < t.output_size; ++ox) {
      const double fx = std::clamp((ox + 0.5) * sx_scale - 0.5, 0.0, static_cast<double>(t.crop_width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, t.crop_width - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const double v00 = image.at(t.crop_y + y0, t.crop_x + x0, ch);
        const double v01 = image.at(t.crop_y + y0, t.crop_x + x1, ch);
        const double v10 = image.at(t.crop_y + y1, t.crop_x + x0, ch);
        const double v11 = image.at(t.crop_y + y1, t.crop_x + x1, ch);
        const double v = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
        out.at(oy, ox, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

BinaryMask apply_patient_transform(const BinaryMask& mask, const PatientTransform& t) {
  t.validate(mask.extent());
  BinaryMask out(t.output_size, t.output_size);
  resample_nearest(
      t, [&](int y, int x) { return mask.at(y, x); }, [&](int y, int x, bool v) { out.set(y, x, v); });
  return out;
}

LabelMask apply_patient_transform(const LabelMask& mask, const PatientTransform& t) {
  t.validate(mask.extent());
  LabelMask out(t.output_size, t.output_size);
  resample_nearest(
      t, [&](int y, int x) { return mask.at(y, x); }, [&](int y, int x, ContactClass v) { out.set(y, x, v); });
  return out;
}

std::string format_transform(const PatientTransform& t) {
  return "crop_x: " + std::to_string(t.crop_x) + "\ncrop_y: " + std::to_string(t.crop_y) +
         "\ncrop_width: " + std::to_string(t.crop_width) + "\ncrop_height: " + std::to_string(t.crop_height) +
         "\noutput_size: " + std::to_string(t.output_size) + "\n";
}

PatientTransform parse_transform(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("transform sidecar: ") + e.what());
  }
  if (!root.IsMap()) throw FormatError("transform sidecar must be a mapping");
  auto get = [&](const char* key) {
    const auto node = root[key];
    if (!node) throw FormatError(std::string("transform sidecar lacks '") + key + "'");
    try {
      return node.as<int>();
    } catch (const YAML::Exception&) {
      throw FormatError(std::string("transform sidecar key '") + key + "' is not an integer");
    }
  };
  PatientTransform t;
  t.crop_x = get("crop_x");
  t.crop_y = get("crop_y");
  t.crop_width = get("crop_width");
  t.crop_height = get("crop_height");
  t.output_size = get("output_size");
  return t;
}

Raster8 render_overlay(const BinaryMask& pred, const BinaryMask& target, const std::optional<Raster8>& base) {
  require_same_extent(pred.extent(), target.extent(), "overlay pred vs target");
  if (base) {
    require_same_extent(pred.extent(), base->extent(), "overlay base image");
    if (base->channels() != 3) throw ShapeError("overlay base image must be RGB");
  }
  Raster8 out = base ? *base : Raster8(pred.height(), pred.width(), 3);
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const bool p = pred.at(y, x);
      const bool t = target.at(y, x);
      if (!p && !t) continue;
      const Rgb& color = p && t ? kOverlayTruePositive : (p ? kOverlayFalsePositive : kOverlayFalseNegative);
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = base ? static_cast<std::uint8_t>((out.at(y, x, c) + color[static_cast<std::size_t>(c)] + 1) / 2)
                               : color[static_cast<std::size_t>(c)];
      }
    }
  }
  return out;
}

}  // namespace hierseg
