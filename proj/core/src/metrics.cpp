#include "hierseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "hierseg/error.hpp"

namespace hierseg {

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Stat describe(const std::vector<double>& values) {
  Stat s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  s.mean = mean;
  s.std = values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
  return s;
}

std::string fixed(const std::optional<double>& v) {
  if (!v) return "undef";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string exact(const std::optional<double>& v) {
  if (!v) return "undef";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& target) {
  require_same_extent(pred.extent(), target.extent(), "confusion");
  ConfusionCounts c;
  const auto p = pred.bits();
  const auto t = target.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]) {
      ++(t[i] ? c.tp : c.fp);
    } else {
      ++(t[i] ? c.fn : c.tn);
    }
  }
  return c;
}

ConfusionCounts confusion(const LabelMask& pred, const LabelMask& target, ContactClass cls) {
  require_same_extent(pred.extent(), target.extent(), "confusion");
  ConfusionCounts c;
  const auto id = static_cast<std::uint8_t>(cls);
  const auto p = pred.labels();
  const auto t = target.labels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pp = p[i] == id;
    const bool tt = t[i] == id;
    if (pp) {
      ++(tt ? c.tp : c.fp);
    } else {
      ++(tt ? c.fn : c.tn);
    }
  }
  return c;
}

ConfusionCounts full_contact_metrics(const LabelMask& pred, const LabelMask& target) {
  require_same_extent(pred.extent(), target.extent(), "FULL contact confusion");
  ConfusionCounts c;
  const auto p = pred.labels();
  const auto t = target.labels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pp = p[i] != 0;
    const bool tt = t[i] != 0;
    if (pp) {
      ++(tt ? c.tp : c.fp);
    } else {
      ++(tt ? c.fn : c.tn);
    }
  }
  return c;
}

std::optional<double> iou(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp + c.fn); }
std::optional<double> dice(const ConfusionCounts& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }
std::optional<double> precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }
std::optional<double> recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kIou:
      return "IoU";
    case Metric::kDice:
      return "Dice";
    case Metric::kPrecision:
      return "Precision";
    case Metric::kRecall:
      return "Recall";
  }
  return "?";
}

MetricValues metric_values(const ConfusionCounts& c) { return {iou(c), dice(c), precision(c), recall(c)}; }

ImageMetrics evaluate_image(const std::string& image, int fold, const LabelMask& pred, const LabelMask& target) {
  return {image,
          fold,
          {metric_values(confusion(pred, target, ContactClass::kMtp)),
           metric_values(confusion(pred, target, ContactClass::kMfp)),
           metric_values(full_contact_metrics(pred, target))}};
}

const Stat& MetricsReport::at(const std::string& cls, Metric m) const {
  const auto it = std::find(classes.begin(), classes.end(), cls);
  if (it == classes.end()) throw RangeError("report has no class '" + cls + "'");
  return summary[static_cast<std::size_t>(it - classes.begin())][static_cast<std::size_t>(m)];
}

MetricsReport aggregate_folds(std::vector<std::string> classes, const std::vector<ImageMetrics>& rows,
                              const std::vector<int>& folds) {
  if (folds.empty()) throw ConfigError("no folds to aggregate");
  const std::size_t n_classes = classes.size();
  std::map<int, std::vector<const ImageMetrics*>> by_fold;
  for (int f : folds) by_fold[f];
  for (const auto& row : rows) {
    auto it = by_fold.find(row.fold);
    if (it == by_fold.end()) {
      throw ConfigError("image '" + row.image + "' belongs to unlisted fold " + std::to_string(row.fold));
    }
    if (row.per_class.size() != n_classes) {
      throw ConfigError("image '" + row.image + "' has " + std::to_string(row.per_class.size()) +
                        " class rows, expected " + std::to_string(n_classes));
    }
    it->second.push_back(&row);
  }

  MetricsReport report;
  report.classes = std::move(classes);
  report.images = rows;
  for (const auto& [fold, members] : by_fold) {
    if (members.empty()) throw ConfigError("fold " + std::to_string(fold) + " has no validation images");
    FoldStats fs{fold, members.size(), std::vector<std::array<Stat, kNumMetrics>>(n_classes)};
    for (std::size_t c = 0; c < n_classes; ++c) {
      for (std::size_t m = 0; m < kNumMetrics; ++m) {
        std::vector<double> values;
        for (const auto* row : members) {
          if (const auto& v = row->per_class[c][m]) values.push_back(*v);
        }
        fs.per_class[c][m] = describe(values);
      }
    }
    report.folds.push_back(std::move(fs));
  }

  report.summary.assign(n_classes, {});
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t m = 0; m < kNumMetrics; ++m) {
      double mean_sum = 0.0;
      double std_sum = 0.0;
      std::size_t used = 0;
      std::size_t count = 0;
      for (const auto& fs : report.folds) {
        const auto& s = fs.per_class[c][m];
        count += s.count;
        if (!s.mean) continue;
        mean_sum += *s.mean;
        std_sum += *s.std;
        ++used;
      }
      auto& out = report.summary[c][m];
      out.count = count;
      if (used > 0) {
        out.mean = mean_sum / static_cast<double>(used);
        out.std = std_sum / static_cast<double>(used);
      }
    }
  }
  return report;
}

std::string format_report_table(const MetricsReport& report) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-8s %-10s %10s %10s %6s\n", "class", "metric", "mean", "mean_std", "n");
  out += buf;
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    for (std::size_t m = 0; m < kNumMetrics; ++m) {
      const auto& s = report.summary[c][m];
      std::snprintf(buf, sizeof buf, "%-8s %-10s %10s %10s %6zu\n", report.classes[c].c_str(),
                    metric_name(static_cast<Metric>(m)), fixed(s.mean).c_str(), fixed(s.std).c_str(), s.count);
      out += buf;
    }
  }
  return out;
}

std::string format_report_csv(const MetricsReport& report) {
  std::string out = "class,metric,mean,mean_std,n\n";
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    for (std::size_t m = 0; m < kNumMetrics; ++m) {
      const auto& s = report.summary[c][m];
      out += report.classes[c] + "," + metric_name(static_cast<Metric>(m)) + "," + exact(s.mean) + "," + exact(s.std) +
             "," + std::to_string(s.count) + "\n";
    }
  }
  return out;
}

std::string format_per_image_csv(const MetricsReport& report) {
  std::string out = "image,fold,class,iou,dice,precision,recall\n";
  for (const auto& row : report.images) {
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
      out += row.image + "," + std::to_string(row.fold) + "," + report.classes[c];
      for (const auto& v : row.per_class[c]) out += "," + exact(v);
      out += "\n";
    }
  }
  return out;
}

std::vector<ImageMetrics> parse_per_image_csv(const std::string& text, const std::vector<std::string>& classes) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "image,fold,class,iou,dice,precision,recall") {
    throw FormatError("per-image metrics: unexpected header");
  }
  std::vector<ImageMetrics> rows;
  std::map<std::pair<std::string, int>, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 7) throw FormatError("per-image metrics: malformed record '" + line + "'");
    const auto cls = std::find(classes.begin(), classes.end(), cols[2]);
    if (cls == classes.end()) throw FormatError("per-image metrics: unknown class '" + cols[2] + "'");
    const int fold = std::stoi(cols[1]);
    auto [it, fresh] = index.emplace(std::make_pair(cols[0], fold), rows.size());
    if (fresh) rows.push_back({cols[0], fold, std::vector<MetricValues>(classes.size())});
    auto& values = rows[it->second].per_class[static_cast<std::size_t>(cls - classes.begin())];
    for (std::size_t m = 0; m < kNumMetrics; ++m) {
      const auto& cell = cols[3 + m];
      if (cell != "undef") values[m] = std::stod(cell);
    }
  }
  return rows;
}

}  // namespace hierseg
