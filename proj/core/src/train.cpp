#include "hierseg/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "hierseg/data.hpp"
#include "hierseg/error.hpp"
#include "hierseg/metrics.hpp"

namespace hierseg {

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string exact(const std::optional<double>& v) { return v ? exact(*v) : "undef"; }

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what + " during training");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (patience <= 0) throw ConfigError("plateau patience must be positive");
  if (!(decay_factor > 1.0)) throw ConfigError("decay factor must exceed 1");
  if (!(min_learning_rate > 0.0) || min_learning_rate > learning_rate) {
    throw ConfigError("learning-rate floor must be positive and not above the initial rate");
  }
  if (!(loss.epsilon > 0.0)) throw ConfigError("dice epsilon must be positive");
}

PlateauSchedule::PlateauSchedule(double initial, int patience, double factor, double floor)
    : rate_(initial), patience_(patience), factor_(factor), floor_(floor) {}

bool PlateauSchedule::step(double score) {
  if (!best_ || score > *best_) {
    best_ = score;
    stale_ = 0;
    return false;
  }
  if (++stale_ < patience_) return false;
  stale_ = 0;
  const double next = std::max(rate_ / factor_, floor_);
  const bool dropped = next < rate_;
  rate_ = next;
  return dropped;
}

double ValidationDice::monitor() const {
  if (mtp && mfp) return (*mtp + *mfp) / 2.0;
  if (mtp) return *mtp;
  if (mfp) return *mfp;
  return 0.0;
}

bool operator==(const ValidationDice& a, const ValidationDice& b) {
  return a.mtp == b.mtp && a.mfp == b.mfp && a.full == b.full;
}

ValidationDice validation_dice(const DualBranchNet& net, std::span<const Sample> samples) {
  std::vector<double> mtp, mfp, full;
  for (const auto& s : samples) {
    const LabelMask pred = net.predict(to_tensor(s.image));
    if (auto d = dice(confusion(pred, s.label, ContactClass::kMtp))) mtp.push_back(*d);
    if (auto d = dice(confusion(pred, s.label, ContactClass::kMfp))) mfp.push_back(*d);
    if (auto d = dice(full_contact_metrics(pred, s.label))) full.push_back(*d);
  }
  return {mean_of(mtp), mean_of(mfp), mean_of(full)};
}

std::string format_epoch_log(const EpochLog& e) {
  return "epoch=" + std::to_string(e.epoch) + " lr=" + exact(e.learning_rate) + " train_loss=" + exact(e.train_loss) +
         " val_dice_mtp=" + exact(e.dice.mtp) + " val_dice_mfp=" + exact(e.dice.mfp) +
         " val_dice_full=" + exact(e.dice.full) + " monitor=" + exact(e.dice.monitor()) +
         " best=" + (e.best ? "1" : "0");
}

TrainResult train(DualBranchNet net, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const ClassHierarchy& h, const TrainConfig& cfg, const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("training split is empty");
  if (val_set.empty()) throw ConfigError("validation split is empty");
  if (net.config().num_leaves != h.num_leaves()) {
    throw ConfigError("network predicts " + std::to_string(net.config().num_leaves) + " classes, hierarchy has " +
                      std::to_string(h.num_leaves()));
  }

  std::mt19937_64 order_rng(derive_seed(cfg.seed, 10));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  PlateauSchedule schedule(cfg.learning_rate, cfg.patience, cfg.decay_factor, cfg.min_learning_rate);
  std::vector<double> grad(net.parameters().size());
  std::vector<double> best_params(net.parameters().begin(), net.parameters().end());

  TrainResult result{net, {}, 0, -std::numeric_limits<double>::infinity()};
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    const double lr = schedule.rate();
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train_set[order[i]];
        double loss = 0.0;
        if (cfg.augment) {
          const auto seed = derive_seed(cfg.seed, 11, (static_cast<std::uint64_t>(epoch) << 32) | order[i]);
          const auto [img, lab] = augment(s.image, s.label, seed);
          loss = net.accumulate_gradient(to_tensor(img), TargetField(lab), h, cfg.loss, grad).total();
        } else {
          loss = net.accumulate_gradient(to_tensor(s.image), TargetField(s.label), h, cfg.loss, grad).total();
        }
        if (!std::isfinite(loss)) {
          throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + " on sample '" + s.id + "'");
        }
        loss_sum += loss;
      }
      const double scale = lr / static_cast<double>(end - start);
      auto params = net.parameters();
      for (std::size_t j = 0; j < params.size(); ++j) params[j] -= scale * grad[j];
      require_finite(params, "parameters");
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.learning_rate = lr;
    entry.train_loss = loss_sum / static_cast<double>(train_set.size());
    entry.dice = validation_dice(net, val_set);
    const double score = entry.dice.monitor();
    if (score > result.best_score) {
      entry.best = true;
      result.best_score = score;
      result.best_epoch = epoch;
      std::copy(net.parameters().begin(), net.parameters().end(), best_params.begin());
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    schedule.step(score);
  }

  std::copy(best_params.begin(), best_params.end(), net.parameters().begin());
  result.net = std::move(net);
  return result;
}

std::vector<double> overfit(DualBranchNet& net, std::span<const Sample> samples, const ClassHierarchy& h,
                            const LossConfig& loss, double learning_rate, int steps) {
  if (samples.empty()) throw ConfigError("no samples to fit");
  std::vector<Tensor3> inputs;
  std::vector<TargetField> targets;
  for (const auto& s : samples) {
    inputs.push_back(to_tensor(s.image));
    targets.emplace_back(s.label);
  }
  std::vector<double> grad(net.parameters().size());
  std::vector<double> history;
  for (int step = 0; step < steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < inputs.size(); ++i) net.accumulate_gradient(inputs[i], targets[i], h, loss, grad);
    const double scale = learning_rate / static_cast<double>(inputs.size());
    auto params = net.parameters();
    for (std::size_t j = 0; j < params.size(); ++j) params[j] -= scale * grad[j];
    require_finite(params, "parameters");

    double total = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) total += combined_loss(net.forward(inputs[i]), targets[i], h, loss);
    total /= static_cast<double>(inputs.size());
    if (!std::isfinite(total)) throw NumericalError("non-finite loss while fitting");
    history.push_back(total);
  }
  return history;
}

}  // namespace hierseg
