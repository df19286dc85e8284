#include "hierseg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hierseg/error.hpp"
#include "hierseg/io.hpp"

namespace hierseg {

namespace fs = std::filesystem;

namespace {

constexpr std::array<int, 4> kThicknesses{12, 40, 100, 200};
constexpr std::array<const char*, 2> kApplications{"active", "passive"};
constexpr std::array<const char*, 2> kSessions{"test", "retest"};

struct Ellipse {
  double cx, cy, a, b, cos_t, sin_t;

  // Normalised squared radius of the pixel centre (x, y).
  double radius2(int x, int y) const {
    const double dx = x + 0.5 - cx;
    const double dy = y + 0.5 - cy;
    const double u = (dx * cos_t + dy * sin_t) / a;
    const double v = (-dx * sin_t + dy * cos_t) / b;
    return u * u + v * v;
  }
};

Ellipse random_ellipse(std::mt19937_64& rng, int size, double rmin, double rmax) {
  std::uniform_real_distribution<double> radius(rmin * size, rmax * size);
  const double a = radius(rng);
  const double b = radius(rng);
  const double margin = std::max(a, b);
  std::uniform_real_distribution<double> pos(margin, size - margin);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  const double cx = pos(rng);
  const double cy = pos(rng);
  const double t = angle(rng);
  return {cx, cy, a, b, std::cos(t), std::sin(t)};
}

void paint(BinaryMask& m, const Ellipse& e, double scale2) {
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (e.radius2(x, y) <= scale2) m.set(y, x);
    }
  }
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Raster8 render_photo(const LabelMask& truth, int thickness, std::mt19937_64& rng, double noise) {
  const int n = truth.height();
  Raster8 img(n, truth.width(), 3);
  std::uniform_real_distribution<double> jitter(-noise, noise);
  std::uniform_real_distribution<double> tone(0.92, 1.0);
  const double shade = tone(rng);
  // Thicker paper leaves slightly darker ink.
  const double ink = 1.0 - 0.1 * (thickness - kThicknesses.front()) / (kThicknesses.back() - kThicknesses.front());
  const std::array<double, 3> enamel{228.0, 210.0, 182.0};
  const std::array<double, 3> mfp_ink{110.0, 135.0, 225.0};
  const std::array<double, 3> mtp_ink{25.0, 30.0, 105.0};
  const double c = (n - 1) / 2.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < truth.width(); ++x) {
      const double r = std::hypot(x - c, y - c) / n;
      const double base = shade * (1.0 - 0.25 * r * r);
      for (int ch = 0; ch < 3; ++ch) {
        double v = enamel[static_cast<std::size_t>(ch)] * base;
        switch (truth.at(y, x)) {
          case ContactClass::kMtp:
            v = mtp_ink[static_cast<std::size_t>(ch)] * ink;
            break;
          case ContactClass::kMfp:
            v = mfp_ink[static_cast<std::size_t>(ch)] * ink;
            break;
          case ContactClass::kBackground:
            break;
        }
        img.at(y, x, ch) = clamp8(v + jitter(rng));
      }
    }
  }
  return img;
}

PatientRecord generate_patient(const SynthConfig& cfg, int id) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 1, static_cast<std::uint64_t>(id)));
  const int n = cfg.size;
  std::uniform_int_distribution<int> site_count(cfg.min_sites, cfg.max_sites);
  std::vector<Ellipse> sites(static_cast<std::size_t>(site_count(rng)));
  for (auto& s : sites) s = random_ellipse(rng, n, cfg.min_radius, cfg.max_radius);

  // Confirmed contact: concentric ellipse with area fraction `overlap`.
  const double confirmed2 = cfg.overlap;
  BinaryMask contact(n, n);
  if (cfg.overlap > 0.0) {
    for (const auto& s : sites) paint(contact, s, confirmed2);
  }

  // Each OFR registration adds decoys; the retest decoys avoid the test ones
  // so that test & retest is exactly the confirmed contact.
  std::uniform_int_distribution<int> decoys(1, 3);
  BinaryMask test_extra(n, n);
  BinaryMask retest_extra(n, n);
  for (int i = decoys(rng); i > 0; --i) paint(test_extra, random_ellipse(rng, n, cfg.min_radius, cfg.max_radius), 1.0);
  for (int i = decoys(rng); i > 0; --i) paint(retest_extra, random_ellipse(rng, n, cfg.min_radius, cfg.max_radius), 1.0);
  retest_extra = subtract(retest_extra, test_extra);

  PatientRecord p;
  p.id = id;
  p.ofr_test = unite(contact, test_extra);
  p.ofr_retest = unite(contact, retest_extra);
  p.transform = PatientTransform::identity({n, n});

  const auto conditions = all_conditions();
  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    std::mt19937_64 irng(derive_seed(cfg.seed, 2, (static_cast<std::uint64_t>(id) << 8) | ci));
    std::bernoulli_distribution inked(cfg.ink_probability);
    std::vector<const Ellipse*> present;
    for (const auto& s : sites) {
      if (inked(irng)) present.push_back(&s);
    }
    if (present.empty()) present.push_back(&sites[std::uniform_int_distribution<std::size_t>(0, sites.size() - 1)(irng)]);

    ImageRecord rec;
    rec.condition = conditions[ci];
    rec.ap = BinaryMask(n, n);
    LabelMask truth(n, n);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        bool in_ap = false;
        for (const auto* s : present) in_ap = in_ap || s->radius2(x, y) <= 1.0;
        if (!in_ap) continue;
        rec.ap.set(y, x);
        bool confirmed = false;
        if (cfg.overlap > 0.0) {
          for (const auto& s : sites) confirmed = confirmed || s.radius2(x, y) <= confirmed2;
        }
        truth.set(y, x, confirmed ? ContactClass::kMtp : ContactClass::kMfp);
      }
    }
    rec.image = render_photo(truth, rec.condition.thickness_um, irng, cfg.noise);
    rec.label = std::move(truth);
    p.images.push_back(std::move(rec));
  }
  return p;
}

fs::path require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("missing file " + path.string());
  return path;
}

BinaryMask read_binary(const fs::path& path) {
  try {
    return decode_binary_mask(read_png(require_file(path)));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void require_extent(Extent expected, Extent got, const fs::path& path) {
  if (expected != got) {
    throw FormatError(path.string() + ": dimension mismatch, " + to_string(got) + " vs patient frame " +
                      to_string(expected));
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ b);
}

std::string Condition::key() const { return std::to_string(thickness_um) + "_" + application + "_" + session; }

Condition Condition::parse(const std::string& key) {
  const auto a = key.find('_');
  const auto b = key.find('_', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) throw FormatError("malformed condition '" + key + "'");
  Condition c;
  try {
    c.thickness_um = std::stoi(key.substr(0, a));
  } catch (const std::exception&) {
    throw FormatError("malformed condition '" + key + "'");
  }
  c.application = key.substr(a + 1, b - a - 1);
  c.session = key.substr(b + 1);
  if (std::find(kThicknesses.begin(), kThicknesses.end(), c.thickness_um) == kThicknesses.end() ||
      (c.application != "active" && c.application != "passive") ||
      (c.session != "test" && c.session != "retest")) {
    throw FormatError("unknown condition '" + key + "'");
  }
  return c;
}

std::vector<Condition> all_conditions() {
  std::vector<Condition> out;
  for (int t : kThicknesses) {
    for (const char* a : kApplications) {
      for (const char* s : kSessions) out.push_back({t, a, s});
    }
  }
  return out;
}

std::string PatientRecord::dir_name() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "patient_%02d", id);
  return buf;
}

std::vector<PatientRecord> synth_generate(const SynthConfig& cfg) {
  if (!(cfg.overlap >= 0.0 && cfg.overlap <= 1.0)) throw ConfigError("overlap fraction must lie in [0, 1]");
  if (cfg.patients < 1) throw ConfigError("need at least one patient");
  if (cfg.size < 8) throw ConfigError("raster size must be at least 8");
  if (cfg.min_sites < 1 || cfg.max_sites < cfg.min_sites) throw ConfigError("invalid contact site counts");
  if (!(cfg.min_radius > 0.0) || cfg.max_radius < cfg.min_radius) throw ConfigError("invalid blob radii");
  if (cfg.max_radius * cfg.size * 2.0 >= cfg.size || cfg.min_radius * cfg.size < 0.5) {
    throw ConfigError("infeasible geometry: blobs do not fit the " + std::to_string(cfg.size) + "px raster");
  }
  if (!(cfg.ink_probability > 0.0 && cfg.ink_probability <= 1.0)) throw ConfigError("ink probability must lie in (0, 1]");
  if (cfg.noise < 0.0) throw ConfigError("noise amplitude must be non-negative");

  std::vector<PatientRecord> out;
  for (int id = 1; id <= cfg.patients; ++id) out.push_back(generate_patient(cfg, id));
  return out;
}

void write_dataset(const std::vector<PatientRecord>& patients, const fs::path& root, bool with_labels) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  for (const auto& p : patients) {
    const auto dir = root / p.dir_name();
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_file_atomic(dir / "transform.txt", format_transform(p.transform));
    write_png(dir / "ofr_test.png", encode_binary_mask(p.ofr_test));
    write_png(dir / "ofr_retest.png", encode_binary_mask(p.ofr_retest));
    for (const auto& rec : p.images) {
      const auto key = rec.condition.key();
      write_png(dir / ("image_" + key + ".png"), rec.image);
      write_png(dir / ("ap_" + key + ".png"), encode_binary_mask(rec.ap));
      if (with_labels && rec.label) write_png(dir / ("mask_" + key + ".png"), encode_label_mask(*rec.label));
    }
  }
}

std::vector<PatientRecord> load_dataset(const fs::path& root, const LoadOptions& opts) {
  if (!fs::is_directory(root)) throw IoError("dataset directory " + root.string() + " does not exist");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("patient_", 0) == 0) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no patient_<id> directories under " + root.string());

  std::vector<PatientRecord> out;
  for (const auto& dir : dirs) {
    PatientRecord p;
    const auto name = dir.filename().string();
    try {
      p.id = std::stoi(name.substr(8));
    } catch (const std::exception&) {
      throw FormatError(dir.string() + ": patient directory name lacks a numeric id");
    }
    const auto transform_path = require_file(dir / "transform.txt");
    try {
      p.transform = parse_transform(read_text_file(transform_path));
    } catch (const FormatError& e) {
      throw FormatError(transform_path.string() + ": " + e.what());
    }

    const BinaryMask test = read_binary(dir / "ofr_test.png");
    const Extent frame = test.extent();
    const BinaryMask retest = read_binary(dir / "ofr_retest.png");
    require_extent(frame, retest.extent(), dir / "ofr_retest.png");

    std::vector<std::string> keys;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto f = entry.path().filename().string();
      if (f.rfind("image_", 0) == 0 && entry.path().extension() == ".png") keys.push_back(f.substr(6, f.size() - 10));
    }
    if (keys.empty()) throw IoError(dir.string() + ": no image_<condition>.png files");
    std::sort(keys.begin(), keys.end(), [](const std::string& a, const std::string& b) {
      const auto ca = Condition::parse(a);
      const auto cb = Condition::parse(b);
      const auto order = all_conditions();
      return std::find(order.begin(), order.end(), ca) < std::find(order.begin(), order.end(), cb);
    });

    try {
      p.transform.validate(frame);
    } catch (const RangeError& e) {
      throw FormatError(transform_path.string() + ": " + e.what());
    }
    const auto calibrate = [&](const auto& raster) {
      return opts.apply_transform ? apply_patient_transform(raster, p.transform) : raster;
    };
    p.ofr_test = calibrate(test);
    p.ofr_retest = calibrate(retest);

    for (const auto& key : keys) {
      ImageRecord rec;
      rec.condition = Condition::parse(key);
      const auto image_path = dir / ("image_" + key + ".png");
      Raster8 image = read_png(image_path);
      if (image.channels() != 3) throw FormatError(image_path.string() + ": expected an RGB image");
      require_extent(frame, image.extent(), image_path);
      const auto ap_path = dir / ("ap_" + key + ".png");
      const BinaryMask ap = read_binary(ap_path);
      require_extent(frame, ap.extent(), ap_path);
      rec.image = calibrate(image);
      rec.ap = calibrate(ap);
      const auto mask_path = dir / ("mask_" + key + ".png");
      if (fs::exists(mask_path)) {
        LabelMask label = [&] {
          try {
            return decode_label_mask(read_png(mask_path));
          } catch (const FormatError& e) {
            throw FormatError(mask_path.string() + ": " + e.what());
          }
        }();
        require_extent(frame, label.extent(), mask_path);
        rec.label = calibrate(label);
      } else if (opts.require_labels) {
        throw IoError("missing file " + mask_path.string() + " (run gen-masks first)");
      }
      p.images.push_back(std::move(rec));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<int> FoldAssignment::patients_in(int fold) const {
  std::vector<int> out;
  for (const auto& [id, f] : fold_of) {
    if (f == fold) out.push_back(id);
  }
  return out;
}

FoldAssignment kfold_split(std::vector<int> patient_ids, int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("fold count must be positive");
  std::sort(patient_ids.begin(), patient_ids.end());
  if (std::adjacent_find(patient_ids.begin(), patient_ids.end()) != patient_ids.end()) {
    throw ConfigError("duplicate patient ids");
  }
  if (static_cast<std::size_t>(k) > patient_ids.size()) {
    throw ConfigError("cannot split " + std::to_string(patient_ids.size()) + " patients into " + std::to_string(k) +
                      " folds");
  }
  std::mt19937_64 rng(derive_seed(seed, 3));
  std::shuffle(patient_ids.begin(), patient_ids.end(), rng);

  FoldAssignment out;
  out.k = k;
  const std::size_t n = patient_ids.size();
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i) out.fold_of[patient_ids[pos++]] = f;
  }
  return out;
}

AugmentParams draw_augment(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AugmentParams p;
  p.flip = std::bernoulli_distribution(0.5)(rng);
  p.angle_deg = std::uniform_real_distribution<double>(-15.0, 15.0)(rng);
  p.brightness = std::uniform_real_distribution<double>(0.8, 1.2)(rng);
  return p;
}

std::pair<Raster8, LabelMask> apply_augment(const Raster8& image, const LabelMask& mask, const AugmentParams& p) {
  require_same_extent(image.extent(), mask.extent(), "augment image vs mask");
  const int h = image.height();
  const int w = image.width();
  const int ch = image.channels();
  const double t = p.angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double cy = (h - 1) / 2.0;
  const double cx = (w - 1) / 2.0;

  Raster8 out_img(h, w, ch);
  LabelMask out_mask(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse rotation into the flipped frame, then undo the flip.
      const double dx = x - cx;
      const double dy = y - cy;
      double sx = c * dx + s * dy + cx;
      const double sy = -s * dx + c * dy + cy;
      if (p.flip) sx = (w - 1) - sx;

      const auto nx = static_cast<int>(std::lround(sx));
      const auto ny = static_cast<int>(std::lround(sy));
      if (nx >= 0 && nx < w && ny >= 0 && ny < h) out_mask.set(y, x, mask.at(ny, nx));

      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int k = 0; k < ch; ++k) {
        auto sample = [&](int yy, int xx) -> double {
          return (xx >= 0 && xx < w && yy >= 0 && yy < h) ? image.at(yy, xx, k) : 0.0;
        };
        double v = sample(y0, x0);
        if (fx != 0.0 || fy != 0.0) {
          v = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
              fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
        }
        out_img.at(y, x, k) = clamp8(v * p.brightness);
      }
    }
  }
  return {std::move(out_img), std::move(out_mask)};
}

std::pair<Raster8, LabelMask> augment(const Raster8& image, const LabelMask& mask, std::uint64_t seed) {
  return apply_augment(image, mask, draw_augment(seed));
}

}  // namespace hierseg
