#include "hierseg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hierseg {

namespace {

struct LevelTerms {
  double neg_log = 0.0;       // -sum_p log q(p, t_p)
  double intersection = 0.0;  // sum_p sum_n y * q
  double total = 0.0;         // sum_p sum_n (y + q)
  std::size_t clamped = 0;
};

void validate(const LogitField& logits, const TargetField& target, const ClassHierarchy& h) {
  if (logits.channels() != h.num_leaves()) {
    throw ShapeError("logit field has " + std::to_string(logits.channels()) + " channels, hierarchy has " +
                     std::to_string(h.num_leaves()) + " leaves");
  }
  require_same_extent(logits.extent(), target.extent(), "logits vs target");
  for (int t : target.labels()) {
    if (t < 0 || t >= h.num_leaves()) throw RangeError("target class " + std::to_string(t) + " out of range");
  }
  for (double v : logits.values()) {
    if (!std::isfinite(v)) throw ContractError("logit field contains non-finite values");
  }
}

// Probability mass of `node` at `level` for one pixel.
double node_mass(std::span<const double> p, const ClassHierarchy& h, int level, int node) {
  double q = 0.0;
  for (int k = 0; k < h.num_leaves(); ++k) {
    if (h.node_of(k, level) == node) q += p[static_cast<std::size_t>(k)];
  }
  return q;
}

LevelTerms level_terms(const ProbField& probs, const TargetField& target, const ClassHierarchy& h, int level) {
  LevelTerms terms;
  for (std::size_t px = 0; px < probs.num_pixels(); ++px) {
    const auto p = probs.pixel(px);
    const double q = node_mass(p, h, level, h.node_of(target[px], level));
    double node_sum = 0.0;
    for (int n = 0; n < h.num_nodes(level); ++n) node_sum += node_mass(p, h, level, n);
    terms.intersection += q;
    terms.total += 1.0 + node_sum;
    if (q < kLogClamp) {
      terms.neg_log -= std::log(kLogClamp);
      ++terms.clamped;
    } else {
      terms.neg_log -= std::log(q);
    }
  }
  return terms;
}

double reduce_hcel(double neg_log, std::size_t pixels, const LossConfig& cfg) {
  return cfg.hcel_reduction == Reduction::kMean ? neg_log / static_cast<double>(pixels) : neg_log;
}

double dice_loss(const LevelTerms& t, double eps) { return 1.0 - 2.0 * (t.intersection + eps) / (t.total + eps); }

void check_epsilon(const LossConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ContractError("dice epsilon must be positive");
}

}  // namespace

TargetField::TargetField(int height, int width, int fill) : extent_{height, width} {
  if (height <= 0 || width <= 0) throw ShapeError("target field dimensions must be positive");
  labels_.assign(extent_.pixels(), fill);
}

TargetField::TargetField(const LabelMask& mask) : extent_(mask.extent()) {
  const auto src = mask.labels();
  labels_.assign(src.begin(), src.end());
}

ProbField softmax_probs(const LogitField& logits) {
  ProbField probs(logits.height(), logits.width(), logits.channels());
  for (std::size_t px = 0; px < logits.num_pixels(); ++px) {
    const auto x = logits.pixel(px);
    auto p = probs.pixel(px);
    const double m = *std::max_element(x.begin(), x.end());
    double z = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      p[k] = std::exp(x[k] - m);
      z += p[k];
    }
    for (double& v : p) v /= z;
  }
  return probs;
}

double hcel_level(const LogitField& logits, const TargetField& target, const ClassHierarchy& h, int level,
                  const LossConfig& cfg, LossDiagnostics* diag) {
  validate(logits, target, h);
  h.level(level);  // range check
  const auto terms = level_terms(softmax_probs(logits), target, h, level);
  if (diag) diag->clamped_log_terms += terms.clamped;
  return reduce_hcel(terms.neg_log, logits.num_pixels(), cfg);
}

double hcel_total(const LogitField& logits, const TargetField& target, const ClassHierarchy& h, const LossConfig& cfg,
                  LossDiagnostics* diag) {
  validate(logits, target, h);
  const auto probs = softmax_probs(logits);
  double sum = 0.0;
  for (int l = 0; l < h.num_levels(); ++l) {
    const auto terms = level_terms(probs, target, h, l);
    if (diag) diag->clamped_log_terms += terms.clamped;
    sum += reduce_hcel(terms.neg_log, logits.num_pixels(), cfg);
  }
  return sum;
}

double hdl_level(const LogitField& logits, const TargetField& target, const ClassHierarchy& h, int level,
                 const LossConfig& cfg) {
  validate(logits, target, h);
  check_epsilon(cfg);
  h.level(level);
  return dice_loss(level_terms(softmax_probs(logits), target, h, level), cfg.epsilon);
}

double hdl_total(const LogitField& logits, const TargetField& target, const ClassHierarchy& h, const LossConfig& cfg) {
  validate(logits, target, h);
  check_epsilon(cfg);
  const auto probs = softmax_probs(logits);
  double sum = 0.0;
  for (int l = 0; l < h.num_levels(); ++l) sum += dice_loss(level_terms(probs, target, h, l), cfg.epsilon);
  return sum;
}

double combined_loss(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                     const LossConfig& cfg, LossDiagnostics* diag) {
  validate(logits, target, h);
  check_epsilon(cfg);
  const auto probs = softmax_probs(logits);
  double sum = 0.0;
  for (int l = 0; l < h.num_levels(); ++l) {
    const auto terms = level_terms(probs, target, h, l);
    if (diag) diag->clamped_log_terms += terms.clamped;
    sum += reduce_hcel(terms.neg_log, logits.num_pixels(), cfg) + dice_loss(terms, cfg.epsilon);
  }
  return sum;
}

LossBreakdown combined_loss_with_grad(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                                      const LossConfig& cfg, GradientField& grad, LossDiagnostics* diag) {
  validate(logits, target, h);
  check_epsilon(cfg);
  const auto probs = softmax_probs(logits);
  const int levels = h.num_levels();
  const int leaves = h.num_leaves();
  const double eps = cfg.epsilon;
  const double hcel_scale =
      cfg.hcel_reduction == Reduction::kMean ? 1.0 / static_cast<double>(logits.num_pixels()) : 1.0;

  LossBreakdown out;
  // Derivatives of each level's dice loss with respect to its intersection
  // and total sums.
  std::vector<double> d_inter(static_cast<std::size_t>(levels));
  std::vector<double> d_total(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l) {
    const auto terms = level_terms(probs, target, h, l);
    if (diag) diag->clamped_log_terms += terms.clamped;
    out.hcel += hcel_scale * terms.neg_log;
    out.hdl += dice_loss(terms, eps);
    const double denom = terms.total + eps;
    d_inter[static_cast<std::size_t>(l)] = -2.0 / denom;
    d_total[static_cast<std::size_t>(l)] = 2.0 * (terms.intersection + eps) / (denom * denom);
  }

  grad = GradientField(logits.height(), logits.width(), leaves);
  std::vector<double> g(static_cast<std::size_t>(leaves));
  for (std::size_t px = 0; px < logits.num_pixels(); ++px) {
    const auto p = probs.pixel(px);
    auto dx = grad.pixel(px);
    const int t = target[px];

    // Dice part: gradient with respect to leaf probabilities, then through
    // the softmax Jacobian.
    std::fill(g.begin(), g.end(), 0.0);
    for (int l = 0; l < levels; ++l) {
      const int tn = h.node_of(t, l);
      for (int k = 0; k < leaves; ++k) {
        g[static_cast<std::size_t>(k)] += d_total[static_cast<std::size_t>(l)] +
                                          (h.node_of(k, l) == tn ? d_inter[static_cast<std::size_t>(l)] : 0.0);
      }
    }
    double dot = 0.0;
    for (int k = 0; k < leaves; ++k) dot += p[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
    for (int k = 0; k < leaves; ++k) {
      dx[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k)] * (g[static_cast<std::size_t>(k)] - dot);
    }

    // Cross-entropy part in closed form: d/dx_k [-log q_t] = p_k - [k in t] p_k / q_t.
    for (int l = 0; l < levels; ++l) {
      const int tn = h.node_of(t, l);
      const double q = node_mass(p, h, l, tn);
      if (q < kLogClamp) continue;  // clamped term is locally constant
      for (int k = 0; k < leaves; ++k) {
        const double pk = p[static_cast<std::size_t>(k)];
        dx[static_cast<std::size_t>(k)] += hcel_scale * (pk - (h.node_of(k, l) == tn ? pk / q : 0.0));
      }
    }
  }
  return out;
}

GradientField combined_loss_grad(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                                 const LossConfig& cfg) {
  GradientField grad;
  combined_loss_with_grad(logits, target, h, cfg, grad);
  return grad;
}

GradientField finite_diff_grad(const LogitField& logits, const TargetField& target, const ClassHierarchy& h,
                               const LossConfig& cfg, double step) {
  if (!(step > 0.0)) throw ContractError("finite-difference step must be positive");
  GradientField grad(logits.height(), logits.width(), logits.channels());
  LogitField probe = logits;
  auto values = probe.values();
  auto out = grad.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double orig = values[i];
    values[i] = orig + step;
    const double up = combined_loss(probe, target, h, cfg);
    values[i] = orig - step;
    const double down = combined_loss(probe, target, h, cfg);
    values[i] = orig;
    out[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace hierseg
