#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hierseg/hierarchy.hpp"
#include "hierseg/loss.hpp"
#include "hierseg/raster.hpp"

namespace hierseg {

// Planar channels x height x width tensor.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int channels, int height, int width, double fill = 0.0);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane() const { return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_); }

  double& at(int c, int y, int x) { return data_[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)]; }
  double at(int c, int y, int x) const { return data_[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)]; }

  std::span<double> channel(int c) { return {data_.data() + static_cast<std::size_t>(c) * plane(), plane()}; }
  std::span<const double> channel(int c) const { return {data_.data() + static_cast<std::size_t>(c) * plane(), plane()}; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// RGB raster scaled to [0, 1].
Tensor3 to_tensor(const Raster8& image);

struct NetConfig {
  int in_channels = 3;
  int global_channels = 16;  // G
  int local_channels = 8;    // F
  int pool = 4;              // global branch downsample factor
  int num_leaves = 3;

  bool operator==(const NetConfig&) const = default;
};

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;

  bool operator==(const TensorInfo&) const = default;
};

// Two-branch segmentation network:
//
//   global: avg-pool(pool) -> conv3x3 -> relu -> conv3x3 -> relu -> upsample(pool)  [G channels]
//   local:  conv3x3 -> relu -> conv3x3 -> relu                                       [F channels]
//   head:   concat(global, local) -> conv1x1 -> num_leaves logits
//
// All parameters live in one flat vector; `manifest()` names the slices.
class DualBranchNet {
 public:
  explicit DualBranchNet(NetConfig cfg = {});

  // He-uniform weights from `seed`, zero biases.
  static DualBranchNet initialized(NetConfig cfg, std::uint64_t seed);

  const NetConfig& config() const { return cfg_; }
  const std::vector<TensorInfo>& manifest() const { return manifest_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> tensor(std::string_view name);
  std::span<const double> tensor(std::string_view name) const;

  // Throws ShapeError unless the image has in_channels channels and both
  // spatial dimensions are divisible by the pool factor.
  LogitField forward(const Tensor3& image) const;

  // Adds d(combined_loss)/d(parameters) into `grad` (same length as
  // parameters()) and returns the loss of this image.
  LossBreakdown accumulate_gradient(const Tensor3& image, const TargetField& target, const ClassHierarchy& h,
                                    const LossConfig& cfg, std::span<double> grad) const;

  LabelMask predict(const Tensor3& image) const;

  // Post-rectifier activation pattern of the last forward pass of `image`,
  // one bit per hidden unit; used to detect rectifier kinks in numerical
  // gradient checks.
  std::vector<bool> activation_pattern(const Tensor3& image) const;

  bool operator==(const DualBranchNet&) const = default;

 private:
  struct Activations;
  Activations run(const Tensor3& image) const;
  void check_input(const Tensor3& image) const;

  NetConfig cfg_;
  std::vector<TensorInfo> manifest_;
  std::vector<double> params_;
};

// Per-pixel argmax over leaves; ties go to the lowest class index.
LabelMask predict_labels(const LogitField& logits);

// Versioned little-endian weight file: magic, version, network config,
// tensor manifest (name, shape), then the raw float64 parameters.
std::vector<std::uint8_t> serialize_weights(const DualBranchNet& net);
DualBranchNet deserialize_weights(std::span<const std::uint8_t> bytes, std::optional<int> expected_leaves = {});
void save_weights(const DualBranchNet& net, const std::filesystem::path& path);
DualBranchNet load_weights(const std::filesystem::path& path, std::optional<int> expected_leaves = {});

}  // namespace hierseg
