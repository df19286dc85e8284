#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "hierseg/hierarchy.hpp"
#include "hierseg/loss.hpp"
#include "hierseg/raster.hpp"

namespace hierseg::testing {

inline BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(y, x, on(rng));
  return m;
}

inline LabelMask random_labels(std::mt19937_64& rng, int h, int w) {
  std::uniform_int_distribution<int> cls(0, kNumContactClasses - 1);
  LabelMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(y, x, static_cast<ContactClass>(cls(rng)));
  return m;
}

inline LogitField random_logits(std::mt19937_64& rng, int h, int w, int k, double scale = 2.0) {
  std::normal_distribution<double> n(0.0, scale);
  LogitField f(h, w, k);
  for (double& v : f.values()) v = n(rng);
  return f;
}

inline TargetField random_target(std::mt19937_64& rng, int h, int w, int k) {
  std::uniform_int_distribution<int> cls(0, k - 1);
  TargetField t(h, w);
  for (std::size_t p = 0; p < t.num_pixels(); ++p) t[p] = cls(rng);
  return t;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hierseg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hierseg::testing

namespace hierseg::testing {

// ||a - b|| / max(||a||, ||b||) over all entries; 0 when both vanish.
template <class A, class B>
double relative_error(const A& a, const B& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

// Plain multiclass cross entropy, summed over pixels.
inline double reference_cross_entropy(const LogitField& x, const TargetField& t) {
  double loss = 0.0;
  for (std::size_t p = 0; p < x.num_pixels(); ++p) {
    double z = 0.0;
    for (double v : x.pixel(p)) z += std::exp(v);
    loss -= x.pixel(p)[static_cast<std::size_t>(t[p])] - std::log(z);
  }
  return loss;
}

// Soft dice loss with classes and pixels summed inside one ratio.
inline double reference_micro_dice(const LogitField& x, const TargetField& t, double eps) {
  double inter = 0.0, total = 0.0;
  for (std::size_t p = 0; p < x.num_pixels(); ++p) {
    double z = 0.0;
    for (double v : x.pixel(p)) z += std::exp(v);
    for (int k = 0; k < x.channels(); ++k) {
      const double prob = std::exp(x.pixel(p)[static_cast<std::size_t>(k)]) / z;
      const double y = t[p] == k ? 1.0 : 0.0;
      inter += y * prob;
      total += y + prob;
    }
  }
  return 1.0 - 2.0 * (inter + eps) / (total + eps);
}

}  // namespace hierseg::testing

#include "hierseg/model.hpp"

namespace hierseg::testing {

inline Tensor3 random_image(std::mt19937_64& rng, int channels, int h, int w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor3 t(channels, h, w);
  for (double& v : t.values()) v = u(rng);
  return t;
}

struct ModelGradCheck {
  double relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

// Compares accumulate_gradient with central differences on `per_tensor`
// randomly chosen parameters of every tensor. Parameters whose perturbation
// flips a rectifier are skipped: the loss is not differentiable there.
inline ModelGradCheck check_model_gradient(std::mt19937_64& rng, int size, std::size_t per_tensor, double step = 1e-5) {
  const auto h = default_occlusal_hierarchy();
  const LossConfig cfg;
  auto net = DualBranchNet::initialized({}, rng());
  const auto image = random_image(rng, 3, size, size);
  const auto target = random_target(rng, size, size, 3);
  std::vector<double> grad(net.parameters().size(), 0.0);
  net.accumulate_gradient(image, target, h, cfg, grad);
  const auto pattern = net.activation_pattern(image);

  ModelGradCheck out;
  std::vector<double> analytic, numeric;
  for (const auto& t : net.manifest()) {
    std::uniform_int_distribution<std::size_t> pick(0, t.size - 1);
    for (std::size_t i = 0; i < std::min(per_tensor, t.size); ++i) {
      const std::size_t j = t.offset + (per_tensor >= t.size ? i : pick(rng));
      double& p = net.parameters()[j];
      const double saved = p;
      p = saved + step;
      const double up = combined_loss(net.forward(image), target, h, cfg);
      const bool same_up = net.activation_pattern(image) == pattern;
      p = saved - step;
      const double down = combined_loss(net.forward(image), target, h, cfg);
      const bool same_down = net.activation_pattern(image) == pattern;
      p = saved;
      if (!same_up || !same_down) {
        ++out.skipped_kinks;
        continue;
      }
      analytic.push_back(grad[j]);
      numeric.push_back((up - down) / (2.0 * step));
    }
  }
  out.checked = analytic.size();
  out.relative_error = relative_error(analytic, numeric);
  return out;
}

}  // namespace hierseg::testing
