#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hierseg/raster.hpp"

namespace hierseg {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& target);
// One-vs-rest counts for `c`.
ConfusionCounts confusion(const LabelMask& pred, const LabelMask& target, ContactClass c);
// Counts for the union of all non-background classes.
ConfusionCounts full_contact_metrics(const LabelMask& pred, const LabelMask& target);

// Each metric is empty (undefined) when its denominator is zero.
std::optional<double> iou(const ConfusionCounts& c);
std::optional<double> dice(const ConfusionCounts& c);
std::optional<double> precision(const ConfusionCounts& c);
std::optional<double> recall(const ConfusionCounts& c);

enum class Metric { kIou = 0, kDice, kPrecision, kRecall };
inline constexpr int kNumMetrics = 4;
inline constexpr std::array<Metric, kNumMetrics> kAllMetrics{Metric::kIou, Metric::kDice, Metric::kPrecision,
                                                             Metric::kRecall};
const char* metric_name(Metric m);

using MetricValues = std::array<std::optional<double>, kNumMetrics>;
MetricValues metric_values(const ConfusionCounts& c);

// Evaluation classes of the occlusal protocol.
inline const std::vector<std::string> kEvalClasses{"MTP", "MFP", "FULL"};

// Metrics for one image; `per_class` is aligned with the report's class list.
struct ImageMetrics {
  std::string image;
  int fold = 0;
  std::vector<MetricValues> per_class;
};

// MTP, MFP and FULL metric values for one prediction/target pair.
ImageMetrics evaluate_image(const std::string& image, int fold, const LabelMask& pred, const LabelMask& target);

// Mean and sample standard deviation of the defined values of one metric.
struct Stat {
  std::optional<double> mean;
  std::optional<double> std;
  std::size_t count = 0;
};

struct FoldStats {
  int fold = 0;
  std::size_t images = 0;
  std::vector<std::array<Stat, kNumMetrics>> per_class;
};

struct MetricsReport {
  std::vector<std::string> classes;
  // Mean over folds of the fold mean / fold standard deviation.
  std::vector<std::array<Stat, kNumMetrics>> summary;
  std::vector<FoldStats> folds;
  std::vector<ImageMetrics> images;

  const Stat& at(const std::string& cls, Metric m) const;
};

// Groups rows by fold; per fold computes mean and sample standard deviation
// (n - 1; 0 for a single value) over the defined values, then averages the
// fold means and the fold deviations. Undefined values are excluded. Throws
// ConfigError when a listed fold has no rows or a row's fold is not listed.
MetricsReport aggregate_folds(std::vector<std::string> classes, const std::vector<ImageMetrics>& rows,
                              const std::vector<int>& folds);

// Fixed-width table: one row per class and metric with mean and mean-of-std.
std::string format_report_table(const MetricsReport& report);
// CSV summary, class,metric,mean,mean_std,n with 17 significant digits.
std::string format_report_csv(const MetricsReport& report);
// CSV with one record per image and class.
std::string format_per_image_csv(const MetricsReport& report);
std::vector<ImageMetrics> parse_per_image_csv(const std::string& text, const std::vector<std::string>& classes);

}  // namespace hierseg
