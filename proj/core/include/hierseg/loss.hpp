#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hierseg/error.hpp"
#include "hierseg/hierarchy.hpp"
#include "hierseg/raster.hpp"

namespace hierseg {

// Height x width field holding one real vector per pixel, stored pixel-major
// (all channels of pixel 0, then pixel 1, ...). The tag keeps logits,
// probabilities and gradients apart at the type level.
template <class Tag>
class VectorField {
 public:
  VectorField() = default;
  VectorField(int height, int width, int channels, double fill = 0.0)
      : extent_{height, width}, channels_(channels) {
    if (height <= 0 || width <= 0 || channels <= 0) throw ShapeError("vector field dimensions must be positive");
    values_.assign(extent_.pixels() * static_cast<std::size_t>(channels), fill);
  }

  int height() const { return extent_.height; }
  int width() const { return extent_.width; }
  int channels() const { return channels_; }
  Extent extent() const { return extent_; }
  std::size_t num_pixels() const { return extent_.pixels(); }

  std::span<double> pixel(std::size_t p) {
    return {values_.data() + p * static_cast<std::size_t>(channels_), static_cast<std::size_t>(channels_)};
  }
  std::span<const double> pixel(std::size_t p) const {
    return {values_.data() + p * static_cast<std::size_t>(channels_), static_cast<std::size_t>(channels_)};
  }
  double& at(int y, int x, int c) { return values_[index(y, x, c)]; }
  double at(int y, int x, int c) const { return values_[index(y, x, c)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool operator==(const VectorField&) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(extent_.width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  Extent extent_;
  int channels_ = 0;
  std::vector<double> values_;
};

using LogitField = VectorField<struct LogitTag>;
using ProbField = VectorField<struct ProbTag>;
using GradientField = VectorField<struct GradientTag>;

// Per-pixel leaf class index.
class TargetField {
 public:
  TargetField() = default;
  TargetField(int height, int width, int fill = 0);
  explicit TargetField(const LabelMask& mask);

  int height() const { return extent_.height; }
  int width() const { return extent_.width; }
  Extent extent() const { return extent_; }
  std::size_t num_pixels() const { return extent_.pixels(); }

  int& at(int y, int x) { return labels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(extent_.width) + static_cast<std::size_t>(x)]; }
  int at(int y, int x) const { return labels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(extent_.width) + static_cast<std::size_t>(x)]; }
  int operator[](std::size_t p) const { return labels_[p]; }
  int& operator[](std::size_t p) { return labels_[p]; }
  std::span<const int> labels() const { return labels_; }

 private:
  Extent extent_;
  std::vector<int> labels_;
};

enum class Reduction { kSum, kMean };

struct LossConfig {
  // Smoothing constant of the dice ratio.
  double epsilon = 1e-6;
  // Pixel reduction of the cross-entropy term. Sum is the reference form.
  Reduction hcel_reduction = Reduction::kSum;
};

// Aggregated target probabilities below this are clamped before the log.
inline constexpr double kLogClamp = 1e-30;

struct LossDiagnostics {
  std::size_t clamped_log_terms = 0;
};

struct LossBreakdown {
  double hcel = 0.0;
  double hdl = 0.0;
  double total() const { return hcel + hdl; }
};

// Numerically stable per-pixel softmax over leaf logits.
ProbField softmax_probs(const LogitField& logits);

// Cross-entropy on the nodes of one level: -sum_p log q(p, node(target_p)).
double hcel_level(const LogitField& logits, const TargetField& target, const ClassHierarchy& h, int level,
                  const LossConfig& cfg = {}, LossDiagnostics* diag = nullptr);
double hcel_total(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                  const LossConfig& cfg = {}, LossDiagnostics* diag = nullptr);

// Micro soft dice loss on the nodes of one level: node and pixel sums both
// sit inside a single ratio.
double hdl_level(const LogitField& logits, const TargetField& target, const ClassHierarchy& h, int level,
                 const LossConfig& cfg = {});
double hdl_total(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                 const LossConfig& cfg = {});

// hcel_total + hdl_total, unweighted.
double combined_loss(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                     const LossConfig& cfg = {}, LossDiagnostics* diag = nullptr);

// Analytic gradient of combined_loss with respect to every logit.
GradientField combined_loss_grad(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                                 const LossConfig& cfg = {});

// Loss parts and gradient from a single pass; what training uses.
LossBreakdown combined_loss_with_grad(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                                      const LossConfig& cfg, GradientField& grad, LossDiagnostics* diag = nullptr);

// Central differences of combined_loss, one logit at a time.
GradientField finite_diff_grad(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                               const LossConfig& cfg, double step);

}  // namespace hierseg
