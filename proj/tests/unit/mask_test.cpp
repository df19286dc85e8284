#include <gtest/gtest.h>

#include <random>

#include "hierseg/error.hpp"
#include "hierseg/mask.hpp"
#include "support.hpp"

using namespace hierseg;
using namespace hierseg::testing;

namespace {

BinaryMask mask_of(int h, int w, std::initializer_list<std::pair<int, int>> on) {
  BinaryMask m(h, w);
  for (auto [y, x] : on) m.set(y, x);
  return m;
}

}  // namespace

TEST(SetOps, HandCases) {
  const auto a = mask_of(2, 2, {{0, 0}, {0, 1}});
  const auto b = mask_of(2, 2, {{0, 1}, {1, 1}});
  const BinaryMask empty(2, 2);
  EXPECT_EQ(intersect(a, b), mask_of(2, 2, {{0, 1}}));
  EXPECT_EQ(intersect(a, a), a);
  EXPECT_EQ(intersect(a, empty), empty);
  EXPECT_EQ(unite(mask_of(2, 2, {{0, 0}}), mask_of(2, 2, {{1, 1}})), mask_of(2, 2, {{0, 0}, {1, 1}}));
  EXPECT_EQ(subtract(a, a), empty);
  EXPECT_EQ(subtract(a, empty), a);
  EXPECT_THROW(intersect(a, BinaryMask(2, 3)), ShapeError);
  EXPECT_THROW(unite(a, BinaryMask(3, 2)), ShapeError);
  EXPECT_THROW(subtract(a, BinaryMask(1, 1)), ShapeError);
}

TEST(SetOps, BooleanLaws) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_mask(rng, 7, 9, 0.4);
    const auto b = random_mask(rng, 7, 9, 0.5);
    const auto c = random_mask(rng, 7, 9, 0.6);
    EXPECT_EQ(intersect(a, b), intersect(b, a));
    EXPECT_EQ(unite(a, b), unite(b, a));
    EXPECT_EQ(unite(a, a), a);
    EXPECT_EQ(complement(unite(a, b)), intersect(complement(a), complement(b)));
    EXPECT_EQ(complement(intersect(a, b)), unite(complement(a), complement(b)));
    EXPECT_EQ(intersect(a, unite(b, c)), unite(intersect(a, b), intersect(a, c)));
    EXPECT_EQ(subtract(a, b), intersect(a, complement(b)));
  }
}

TEST(Generate, HandCase) {
  const auto ap = mask_of(2, 2, {{0, 0}, {0, 1}, {1, 0}});
  const auto td_rd = mask_of(2, 2, {{0, 1}, {1, 1}});
  const auto m = generate_mtp_mfp(ap, td_rd, td_rd);
  EXPECT_EQ(m.class_mask(ContactClass::kMtp), mask_of(2, 2, {{0, 1}}));
  EXPECT_EQ(m.class_mask(ContactClass::kMfp), mask_of(2, 2, {{0, 0}, {1, 0}}));
  EXPECT_EQ(m.at(1, 1), ContactClass::kBackground);
}

TEST(Generate, DisjointAndContained) {
  const auto ap = mask_of(3, 3, {{0, 0}, {1, 1}});
  const auto other = mask_of(3, 3, {{2, 2}});
  auto m = generate_mtp_mfp(ap, other, other);
  EXPECT_TRUE(m.class_mask(ContactClass::kMtp).empty());
  EXPECT_EQ(m.class_mask(ContactClass::kMfp), ap);
  const auto all = complement(BinaryMask(3, 3));
  m = generate_mtp_mfp(ap, all, all);
  EXPECT_EQ(m.class_mask(ContactClass::kMtp), ap);
  EXPECT_TRUE(m.class_mask(ContactClass::kMfp).empty());
  EXPECT_THROW(generate_mtp_mfp(ap, BinaryMask(3, 4), other), ShapeError);
}

TEST(GenerateProperty, PartitionOfAp) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> density(0.05, 0.95);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto ap = random_mask(rng, 12, 10, density(rng));
    const auto td = random_mask(rng, 12, 10, density(rng));
    const auto rd = random_mask(rng, 12, 10, density(rng));
    const auto m = generate_mtp_mfp(ap, td, rd);
    const auto mtp = m.class_mask(ContactClass::kMtp);
    const auto mfp = m.class_mask(ContactClass::kMfp);
    ASSERT_EQ(unite(mtp, mfp), ap);
    ASSERT_TRUE(intersect(mtp, mfp).empty());
    ASSERT_EQ(mtp, intersect(ap, intersect(td, rd)));
  }
}

TEST(Codec, GrayValues) {
  LabelMask m(1, 3);
  m.set(0, 1, ContactClass::kMtp);
  m.set(0, 2, ContactClass::kMfp);
  const auto r = encode_label_mask(m);
  ASSERT_EQ(r.channels(), 1);
  EXPECT_EQ(r.at(0, 0), 0);
  EXPECT_EQ(r.at(0, 1), 255);
  EXPECT_EQ(r.at(0, 2), 128);
}

TEST(Codec, RoundTrip) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_labels(rng, 9, 11);
    EXPECT_EQ(decode_label_mask(encode_label_mask(m)), m);
    const auto b = random_mask(rng, 9, 11, 0.5);
    EXPECT_EQ(decode_binary_mask(encode_binary_mask(b)), b);
  }
}

TEST(Codec, IllegalValuesAreListed) {
  Raster8 r(2, 2, 1, 0);
  r.at(0, 1) = 7;
  r.at(1, 1) = 37;
  try {
    decode_label_mask(r);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('7'), std::string::npos);
    EXPECT_NE(msg.find("37"), std::string::npos);
  }
  Raster8 b(1, 1, 1, 128);
  EXPECT_THROW(decode_binary_mask(b), FormatError);
  EXPECT_THROW(decode_label_mask(Raster8(1, 1, 3)), FormatError);
}

TEST(Transform, IdentityIsUnchanged) {
  std::mt19937_64 rng(24);
  const auto m = random_mask(rng, 1000, 1000, 0.3);
  const auto t = PatientTransform::identity({1000, 1000});
  EXPECT_EQ(apply_patient_transform(m, t), m);
  Raster8 img(16, 16, 3);
  std::uniform_int_distribution<int> v(0, 255);
  for (auto& b : img.data()) b = static_cast<std::uint8_t>(v(rng));
  PatientTransform small = PatientTransform::identity({16, 16});
  EXPECT_EQ(apply_patient_transform(img, small), img);
}

TEST(Transform, NearestUpscaleMakesBlocks) {
  std::mt19937_64 rng(25);
  const auto src = random_mask(rng, 600, 600, 0.3);
  const PatientTransform t{50, 70, 500, 500, 1000};
  const auto out = apply_patient_transform(src, t);
  ASSERT_EQ(out.extent(), (Extent{1000, 1000}));
  std::size_t crop_count = 0;
  for (int y = 0; y < 500; ++y) {
    for (int x = 0; x < 500; ++x) {
      const bool v = src.at(70 + y, 50 + x);
      crop_count += v;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) ASSERT_EQ(out.at(2 * y + dy, 2 * x + dx), v);
    }
  }
  EXPECT_EQ(out.count(), 4 * crop_count);
}

TEST(Transform, OutOfBoundsCrop) {
  const PatientTransform t{10, 0, 100, 100, 1000};
  EXPECT_THROW(apply_patient_transform(BinaryMask(100, 100), t), RangeError);
  EXPECT_THROW(PatientTransform::identity({10, 20}), RangeError);
}

TEST(Transform, SidecarRoundTrip) {
  const PatientTransform t{3, 4, 50, 60, 1000};
  EXPECT_EQ(parse_transform(format_transform(t)), t);
  EXPECT_THROW(parse_transform("crop_x: 1\n"), FormatError);
  EXPECT_THROW(parse_transform("crop_x: a\ncrop_y: 0\ncrop_width: 1\ncrop_height: 1\noutput_size: 1\n"), FormatError);
}

TEST(Overlay, Colours) {
  const auto pred = mask_of(1, 3, {{0, 0}, {0, 1}});
  const auto target = mask_of(1, 3, {{0, 1}});
  const auto img = render_overlay(pred, target);
  ASSERT_EQ(img.channels(), 3);
  const auto rgb = [&](int x) { return Rgb{img.at(0, x, 0), img.at(0, x, 1), img.at(0, x, 2)}; };
  EXPECT_EQ(rgb(0), kOverlayFalsePositive);
  EXPECT_EQ(rgb(1), kOverlayTruePositive);
  EXPECT_EQ(rgb(2), (Rgb{0, 0, 0}));
  EXPECT_THROW(render_overlay(pred, BinaryMask(2, 3)), ShapeError);
}

TEST(OverlayProperty, PartitionsPositives) {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = random_mask(rng, 8, 8, 0.4);
    const auto target = random_mask(rng, 8, 8, 0.4);
    const auto img = render_overlay(pred, target);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const Rgb c{img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)};
        const bool p = pred.at(y, x), t = target.at(y, x);
        const Rgb expect = p && t ? kOverlayTruePositive : p ? kOverlayFalsePositive : t ? kOverlayFalseNegative : Rgb{0, 0, 0};
        ASSERT_EQ(c, expect);
      }
    }
  }
}

TEST(Overlay, BlendsOverBase) {
  const auto m = mask_of(1, 2, {{0, 0}});
  Raster8 base(1, 2, 3, 100);
  const auto img = render_overlay(m, m, base);
  EXPECT_EQ(img.extent(), base.extent());
  EXPECT_EQ(img.at(0, 1, 0), 100);
  EXPECT_NE(img.at(0, 0, 0), 100);
  EXPECT_GT(img.at(0, 0, 0), img.at(0, 0, 2));
}
