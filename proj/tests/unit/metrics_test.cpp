#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hierseg/error.hpp"
#include "hierseg/mask.hpp"
#include "hierseg/metrics.hpp"
#include "support.hpp"

using namespace hierseg;
using namespace hierseg::testing;

namespace {

LabelMask labels_of(int h, int w, std::initializer_list<std::tuple<int, int, ContactClass>> on) {
  LabelMask m(h, w);
  for (auto [y, x, c] : on) m.set(y, x, c);
  return m;
}

ConfusionCounts brute_force(const BinaryMask& pred, const BinaryMask& target) {
  ConfusionCounts c;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const bool p = pred.at(y, x), t = target.at(y, x);
      if (p && t) ++c.tp;
      else if (p) ++c.fp;
      else if (t) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

ImageMetrics full_only(const std::string& name, int fold, MetricValues v) { return {name, fold, {v}}; }

}  // namespace

TEST(Confusion, HandCount) {
  const auto pred = labels_of(2, 2, {{0, 0, ContactClass::kMtp}, {0, 1, ContactClass::kMtp}});
  const auto target = labels_of(2, 2, {{0, 1, ContactClass::kMtp}, {1, 1, ContactClass::kMtp}});
  EXPECT_EQ(confusion(pred, target, ContactClass::kMtp), (ConfusionCounts{1, 1, 1, 1}));
  auto c = confusion(pred, pred, ContactClass::kMtp);
  EXPECT_EQ(c.fp, 0);
  EXPECT_EQ(c.fn, 0);
  LabelMask bg(2, 2);
  LabelMask all = labels_of(2, 2, {{0, 0, ContactClass::kMfp}, {0, 1, ContactClass::kMfp}, {1, 0, ContactClass::kMfp}, {1, 1, ContactClass::kMfp}});
  c = confusion(bg, all, ContactClass::kMfp);
  EXPECT_EQ(c.tp, 0);
  EXPECT_EQ(c.fn, 4);
  EXPECT_THROW(confusion(bg, LabelMask(2, 3), ContactClass::kMtp), ShapeError);
}

TEST(Formulas, HandValues) {
  const ConfusionCounts c{1, 1, 1, 0};
  EXPECT_DOUBLE_EQ(*iou(c), 1.0 / 3);
  EXPECT_DOUBLE_EQ(*dice(c), 0.5);
  EXPECT_DOUBLE_EQ(*precision(c), 0.5);
  EXPECT_DOUBLE_EQ(*recall(c), 0.5);
  const ConfusionCounts perfect{5, 0, 0, 3};
  for (auto v : metric_values(perfect)) EXPECT_EQ(*v, 1.0);
  const ConfusionCounts none{0, 0, 0, 9};
  for (auto v : metric_values(none)) EXPECT_FALSE(v.has_value());
  EXPECT_FALSE(precision(ConfusionCounts{0, 0, 3, 1}).has_value());
  EXPECT_EQ(*recall(ConfusionCounts{0, 0, 3, 1}), 0.0);
}

TEST(FullContact, IgnoresSubclassSwaps) {
  const auto pred = labels_of(1, 3, {{0, 0, ContactClass::kMtp}, {0, 1, ContactClass::kMfp}});
  const auto target = labels_of(1, 3, {{0, 0, ContactClass::kMfp}, {0, 1, ContactClass::kMtp}});
  EXPECT_EQ(full_contact_metrics(pred, target).tp, 2);
  const auto c = full_contact_metrics(LabelMask(1, 3), target);
  EXPECT_EQ(c.tp, 0);
  EXPECT_EQ(c.fp, 0);
}

TEST(MetricsProperty, FullContactMatchesUnionOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const auto pred = random_labels(rng, 9, 7);
    const auto target = random_labels(rng, 9, 7);
    const auto pu = unite(pred.class_mask(ContactClass::kMtp), pred.class_mask(ContactClass::kMfp));
    const auto tu = unite(target.class_mask(ContactClass::kMtp), target.class_mask(ContactClass::kMfp));
    ASSERT_EQ(full_contact_metrics(pred, target), brute_force(pu, tu));
  }
}

TEST(MetricsProperty, DiceFromIouAndRange) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> n(0, 6);
  for (int trial = 0; trial < 2000; ++trial) {
    const ConfusionCounts c{n(rng), n(rng), n(rng), n(rng)};
    const auto i = iou(c);
    const auto d = dice(c);
    ASSERT_EQ(i.has_value(), d.has_value());
    if (i) EXPECT_NEAR(*d, 2 * *i / (1 + *i), 1e-12);
    for (auto v : metric_values(c)) {
      if (v) {
        EXPECT_GE(*v, 0.0);
        EXPECT_LE(*v, 1.0);
      }
    }
  }
}

TEST(MetricsProperty, PrecisionRecallMonotoneInTruePositives) {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<int> n(0, 10);
  for (int trial = 0; trial < 500; ++trial) {
    const ConfusionCounts c{n(rng), n(rng), n(rng), n(rng)};
    // The extra pixel is correctly predicted: it was a false negative.
    if (c.fn == 0) continue;
    ConfusionCounts more = c;
    ++more.tp;
    --more.fn;
    if (auto p = precision(c)) EXPECT_GE(*precision(more), *p);
    if (auto r = recall(c)) EXPECT_GE(*recall(more), *r);
  }
}

TEST(Aggregate, IdenticalFoldsEqualSingleFold) {
  std::vector<ImageMetrics> one, two;
  const std::vector<double> dices{0.2, 0.6, 0.9};
  for (std::size_t i = 0; i < dices.size(); ++i) {
    const MetricValues v{dices[i] / 2, dices[i], std::nullopt, 1.0};
    one.push_back(full_only("a" + std::to_string(i), 0, v));
    two.push_back(full_only("a" + std::to_string(i), 0, v));
    two.push_back(full_only("b" + std::to_string(i), 1, v));
  }
  const auto r1 = aggregate_folds({"FULL"}, one, {0});
  const auto r2 = aggregate_folds({"FULL"}, two, {0, 1});
  for (Metric m : kAllMetrics) {
    EXPECT_EQ(r1.at("FULL", m).mean, r2.at("FULL", m).mean);
    EXPECT_EQ(r1.at("FULL", m).std, r2.at("FULL", m).std);
  }
  EXPECT_FALSE(r1.at("FULL", Metric::kPrecision).mean.has_value());
}

TEST(Aggregate, SingleImageFoldsHaveZeroStd) {
  std::vector<ImageMetrics> rows{full_only("a", 0, {0.1, 0.2, 0.3, 0.4}), full_only("b", 1, {0.5, 0.6, 0.7, 0.8})};
  const auto r = aggregate_folds({"FULL"}, rows, {0, 1});
  for (Metric m : kAllMetrics) EXPECT_EQ(*r.at("FULL", m).std, 0.0);
  EXPECT_NEAR(*r.at("FULL", Metric::kIou).mean, 0.3, 1e-15);
}

TEST(Aggregate, HandComputedTwoFoldThreeImages) {
  // Fold 0: Dice 1/2 and 1; fold 1: Dice 0.
  std::vector<ImageMetrics> rows;
  const auto add = [&](const std::string& name, int fold, std::initializer_list<std::tuple<int, int, ContactClass>> pred,
                       std::initializer_list<std::tuple<int, int, ContactClass>> target) {
    rows.push_back(evaluate_image(name, fold, labels_of(1, 4, pred), labels_of(1, 4, target)));
  };
  add("x", 0, {{0, 0, ContactClass::kMtp}, {0, 1, ContactClass::kMtp}}, {{0, 1, ContactClass::kMtp}, {0, 2, ContactClass::kMtp}});
  add("y", 0, {{0, 3, ContactClass::kMfp}}, {{0, 3, ContactClass::kMtp}});
  add("z", 1, {{0, 0, ContactClass::kMfp}}, {{0, 1, ContactClass::kMtp}});
  const auto r = aggregate_folds(kEvalClasses, rows, {0, 1});
  const Stat& d = r.at("FULL", Metric::kDice);
  EXPECT_NEAR(*d.mean, (0.75 + 0.0) / 2, 1e-15);
  EXPECT_NEAR(*d.std, (std::sqrt(0.125) + 0.0) / 2, 1e-15);
  EXPECT_EQ(d.count, 3u);
  // MTP: x has Dice 1/2, y and z Dice 0 (target MTP, nothing predicted).
  const Stat& m = r.at("MTP", Metric::kDice);
  EXPECT_NEAR(*m.mean, (0.25 + 0.0) / 2, 1e-15);
  // MFP never appears in a target and only z/y predict it: recall undefined.
  EXPECT_FALSE(r.at("MFP", Metric::kRecall).mean.has_value());
  EXPECT_EQ(r.at("MFP", Metric::kPrecision).count, 2u);
}

TEST(Aggregate, Errors) {
  std::vector<ImageMetrics> rows{full_only("a", 0, {0.1, 0.2, 0.3, 0.4})};
  EXPECT_THROW(aggregate_folds({"FULL"}, rows, {0, 1}), ConfigError);
  EXPECT_THROW(aggregate_folds({"FULL"}, rows, {1}), ConfigError);
  EXPECT_THROW(aggregate_folds({"FULL"}, rows, {}), ConfigError);
}

TEST(Report, TableShapeAndCsvRecomputation) {
  std::mt19937_64 rng(34);
  std::vector<ImageMetrics> rows;
  for (int i = 0; i < 12; ++i) {
    rows.push_back(evaluate_image("img" + std::to_string(i), i % 3, random_labels(rng, 6, 6), random_labels(rng, 6, 6)));
  }
  const auto report = aggregate_folds(kEvalClasses, rows, {0, 1, 2});
  const std::string table = format_report_table(report);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 1 + 3 * 4);
  const auto parsed = parse_per_image_csv(format_per_image_csv(report), kEvalClasses);
  const auto again = aggregate_folds(kEvalClasses, parsed, {0, 1, 2});
  for (const auto& cls : kEvalClasses) {
    for (Metric m : kAllMetrics) {
      const auto& a = report.at(cls, m);
      const auto& b = again.at(cls, m);
      ASSERT_EQ(a.mean.has_value(), b.mean.has_value());
      if (a.mean) {
        EXPECT_NEAR(*a.mean, *b.mean, 1e-9);
        EXPECT_NEAR(*a.std, *b.std, 1e-9);
      }
    }
  }
}
