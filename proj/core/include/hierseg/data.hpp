#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hierseg/mask.hpp"
#include "hierseg/raster.hpp"

namespace hierseg {

// One acquisition condition: paper thickness x application x session.
struct Condition {
  int thickness_um = 12;
  std::string application = "active";  // active | passive
  std::string session = "test";         // test | retest

  // "12_active_test"
  std::string key() const;
  static Condition parse(const std::string& key);
  bool operator==(const Condition&) const = default;
};

// The 16 conditions in canonical order.
std::vector<Condition> all_conditions();

struct ImageRecord {
  Condition condition;
  Raster8 image;                 // RGB
  BinaryMask ap;                 // articulating-paper ink
  std::optional<LabelMask> label;  // multiclass target, when known

  bool operator==(const ImageRecord&) const = default;
};

struct PatientRecord {
  int id = 0;
  std::vector<ImageRecord> images;
  BinaryMask ofr_test;
  BinaryMask ofr_retest;
  PatientTransform transform;

  // "patient_07"
  std::string dir_name() const;
  bool operator==(const PatientRecord&) const = default;
};

struct SynthConfig {
  int patients = 8;
  int size = 64;
  int min_sites = 3;
  int max_sites = 6;
  // Ellipse semi-axes as fractions of the raster size.
  double min_radius = 0.06;
  double max_radius = 0.11;
  // Target |AP & test & retest| / |AP|.
  double overlap = 0.6;
  // Probability that a contact site is inked in a given image.
  double ink_probability = 0.8;
  double noise = 6.0;
  std::uint64_t seed = 0;
};

// Renders patients with ink blobs over a shaded background. Each contact
// site is an ellipse; its confirmed part is the concentric ellipse scaled by
// sqrt(overlap), shared by both OFR masks, while each OFR mask also carries
// decoy blobs that never coincide. `label` holds the ground truth computed
// from the geometry. Throws ConfigError for infeasible settings.
std::vector<PatientRecord> synth_generate(const SynthConfig& cfg);

// Layout under `root`:
//   patient_<id>/image_<cond>.png  RGB photograph
//   patient_<id>/ap_<cond>.png     {0,255} articulating-paper mask
//   patient_<id>/mask_<cond>.png   {0,128,255} multiclass mask (optional)
//   patient_<id>/ofr_test.png, ofr_retest.png
//   patient_<id>/transform.txt
// write_dataset writes labels only when `with_labels` is set.
void write_dataset(const std::vector<PatientRecord>& patients, const std::filesystem::path& root,
                   bool with_labels = false);

struct LoadOptions {
  // Resample every raster through the patient's transform.
  bool apply_transform = true;
  // Raise IoError when an image has no multiclass mask.
  bool require_labels = false;
};

// Reads the layout above, validates raster sizes and gray values and applies
// each patient's transform. Missing files raise IoError, bad contents
// FormatError; both name the file.
std::vector<PatientRecord> load_dataset(const std::filesystem::path& root, const LoadOptions& opts = {});

struct FoldAssignment {
  int k = 0;
  std::map<int, int> fold_of;  // patient id -> fold

  std::vector<int> patients_in(int fold) const;
};

// Seeded shuffle of the patient ids followed by contiguous blocks; the first
// n % k folds take one extra patient.
FoldAssignment kfold_split(std::vector<int> patient_ids, int k, std::uint64_t seed);

struct AugmentParams {
  bool flip = false;
  double angle_deg = 0.0;
  double brightness = 1.0;

  static AugmentParams identity() { return {}; }
};

// Horizontal flip with p = 0.5, rotation in [-15, 15] degrees, brightness in
// [0.8, 1.2].
AugmentParams draw_augment(std::uint64_t seed);

// Flip, then rotate about the centre; the image resamples bilinearly, the
// mask with nearest neighbour. Pixels rotated in from outside become black
// / Background. Brightness touches the image only.
std::pair<Raster8, LabelMask> apply_augment(const Raster8& image, const LabelMask& mask, const AugmentParams& p);
std::pair<Raster8, LabelMask> augment(const Raster8& image, const LabelMask& mask, std::uint64_t seed);

// Mixes a master seed with stream indices (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace hierseg
