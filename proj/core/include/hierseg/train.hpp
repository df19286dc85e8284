#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hierseg/hierarchy.hpp"
#include "hierseg/loss.hpp"
#include "hierseg/model.hpp"
#include "hierseg/raster.hpp"

namespace hierseg {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 5;
  double learning_rate = 1e-4;
  int patience = 3;
  double decay_factor = 2.0;
  double min_learning_rate = 1e-6;
  std::uint64_t seed = 0;
  bool augment = true;
  LossConfig loss;

  // Throws ConfigError unless every field is positive and the floor does
  // not exceed the initial rate.
  void validate() const;
};

// Divides the rate by `factor` once the monitored score has failed to
// improve for `patience` consecutive epochs, never going below `floor`.
class PlateauSchedule {
 public:
  PlateauSchedule(double initial, int patience, double factor, double floor);

  double rate() const { return rate_; }
  // Feeds one epoch's score (higher is better); true when the rate dropped.
  bool step(double score);

 private:
  double rate_;
  int patience_;
  double factor_;
  double floor_;
  std::optional<double> best_;
  int stale_ = 0;
};

struct Sample {
  std::string id;
  Raster8 image;
  LabelMask label;
};

// Mean validation Dice per class; empty when undefined on every image.
struct ValidationDice {
  std::optional<double> mtp;
  std::optional<double> mfp;
  std::optional<double> full;

  // Unweighted mean of the defined MTP / MFP values (0 when neither is).
  double monitor() const;
};

ValidationDice validation_dice(const DualBranchNet& net, std::span<const Sample> samples);

struct EpochLog {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean per-image combined loss
  ValidationDice dice;
  bool best = false;

  bool operator==(const EpochLog&) const = default;
};

bool operator==(const ValidationDice& a, const ValidationDice& b);

// key=value line; doubles printed with 17 significant digits.
std::string format_epoch_log(const EpochLog& e);

struct TrainResult {
  DualBranchNet net;  // weights of the best validation epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_score = 0.0;
};

// Minibatch gradient descent on the per-image combined loss, averaged over
// each batch. After every epoch the validation Dice is measured, the best
// weights kept and the plateau schedule stepped. Deterministic given the
// seed. Throws NumericalError on a non-finite loss.
TrainResult train(DualBranchNet net, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const ClassHierarchy& h, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Full-batch descent on `samples` for `steps` steps without augmentation;
// returns the mean per-image loss after each step.
std::vector<double> overfit(DualBranchNet& net, std::span<const Sample> samples, const ClassHierarchy& h,
                            const LossConfig& loss, double learning_rate, int steps);

}  // namespace hierseg
