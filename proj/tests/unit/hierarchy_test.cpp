#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <random>

#include "hierseg/error.hpp"
#include "hierseg/hierarchy.hpp"

using namespace hierseg;

namespace {

HierarchySpec occlusal_spec() {
  return {{"BG", "MTP", "MFP"}, {{{"BG", {"BG"}}, {"FULL", {"MTP", "MFP"}}}}};
}

std::vector<double> random_simplex(std::mt19937_64& rng, int n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  for (double& v : p) v = e(rng);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

TEST(Hierarchy, BuildsTwoLevelOcclusalTree) {
  const auto h = build_hierarchy(occlusal_spec());
  EXPECT_EQ(h.num_levels(), 2);
  EXPECT_EQ(h.num_leaves(), 3);
  const int full = h.find_node(0, "FULL");
  ASSERT_GE(full, 0);
  EXPECT_EQ(h.level(0)[static_cast<std::size_t>(full)].leaves, (std::vector<int>{1, 2}));
}

TEST(Hierarchy, FlatSpecGivesSingleLevel) {
  const auto h = build_hierarchy({{"A", "B"}, {}});
  ASSERT_EQ(h.num_levels(), 1);
  ASSERT_EQ(h.num_nodes(0), 2);
  EXPECT_EQ(h.level(0)[0].leaves, std::vector<int>{0});
  EXPECT_EQ(h.level(0)[1].leaves, std::vector<int>{1});
}

TEST(Hierarchy, RejectsOverlappingGroups) {
  const HierarchySpec spec{{"A", "B", "C"}, {{{"G", {"A", "B"}}, {"G2", {"B", "C"}}}}};
  try {
    build_hierarchy(spec);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("G2"), std::string::npos) << e.what();
  }
}

TEST(Hierarchy, RejectsMissingEmptyUnknownAndNonRefining) {
  EXPECT_THROW(build_hierarchy({{"A", "B", "C"}, {{{"G", {"A", "B"}}}}}), ValidationError);
  EXPECT_THROW(build_hierarchy({{"A", "B"}, {{{"G", {"A", "B"}}, {"E", {}}}}}), ValidationError);
  EXPECT_THROW(build_hierarchy({{"A", "B"}, {{{"G", {"A", "Z"}}}}}), ValidationError);
  EXPECT_THROW(build_hierarchy({{"A"}, {}}), ValidationError);
  // Level 1 splits {A,B} | {C,D}; level 0 groups {A,C} which crosses it.
  const HierarchySpec crossing{{"A", "B", "C", "D"},
                               {{{"X", {"A", "C"}}, {"Y", {"B", "D"}}}, {{"P", {"A", "B"}}, {"Q", {"C", "D"}}}}};
  EXPECT_THROW(build_hierarchy(crossing), ValidationError);
}

TEST(Hierarchy, DefaultOcclusal) {
  const auto h = default_occlusal_hierarchy();
  EXPECT_EQ(h.num_leaves(), 3);
  EXPECT_EQ(h.num_levels(), 2);
  EXPECT_EQ(h.leaf_names(), (std::vector<std::string>{"Background", "MTP", "MFP"}));
  const int full = h.find_node(0, "FULL");
  ASSERT_GE(full, 0);
  EXPECT_EQ(h.level(0)[static_cast<std::size_t>(full)].leaves, (std::vector<int>{1, 2}));
  const auto finest = h.level(h.finest_level());
  ASSERT_EQ(finest.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(finest[static_cast<std::size_t>(i)].leaves, std::vector<int>{i});
}

TEST(Hierarchy, ProjectTarget) {
  const auto h = default_occlusal_hierarchy();
  EXPECT_EQ(h.project_target(1, 0), h.find_node(0, "FULL"));
  EXPECT_EQ(h.project_target(0, 0), h.find_node(0, "Background"));
  EXPECT_EQ(h.project_target(2, 1), 2);
  EXPECT_THROW(h.project_target(3, 0), RangeError);
  EXPECT_THROW(h.project_target(0, 2), RangeError);
  EXPECT_THROW(h.project_target(-1, 0), RangeError);
}

TEST(Hierarchy, AggregateProbs) {
  const auto h = default_occlusal_hierarchy();
  const int bg = h.find_node(0, "Background");
  const int full = h.find_node(0, "FULL");
  const std::vector<double> uniform{1.0 / 3, 1.0 / 3, 1.0 / 3};
  auto q = h.aggregate_probs(uniform, 0);
  EXPECT_NEAR(q[static_cast<std::size_t>(bg)], 1.0 / 3, 1e-15);
  EXPECT_NEAR(q[static_cast<std::size_t>(full)], 2.0 / 3, 1e-15);
  q = h.aggregate_probs(std::vector<double>{0, 0, 1}, 0);
  EXPECT_EQ(q[static_cast<std::size_t>(bg)], 0.0);
  EXPECT_EQ(q[static_cast<std::size_t>(full)], 1.0);
  const std::vector<double> p{0.2, 0.5, 0.3};
  EXPECT_EQ(h.aggregate_probs(p, 1), p);
}

TEST(Hierarchy, AggregateRejectsUnnormalised) {
  const auto h = default_occlusal_hierarchy();
  EXPECT_THROW(h.aggregate_probs(std::vector<double>{0.5, 0.5, 0.5}, 0), ContractError);
  EXPECT_THROW(h.aggregate_probs(std::vector<double>{1.5, -0.5, 0.0}, 0), ContractError);
  EXPECT_THROW(h.aggregate_probs(std::vector<double>{0.5, 0.5}, 0), ContractError);
}

TEST(HierarchyProperty, ConservationCompositionAndUniqueness) {
  // Three levels over five leaves.
  const HierarchySpec spec{{"a", "b", "c", "d", "e"},
                           {{{"X", {"a", "b", "c"}}, {"Y", {"d", "e"}}},
                            {{"P", {"a"}}, {"Q", {"b", "c"}}, {"R", {"d", "e"}}}}};
  const auto h = build_hierarchy(spec);
  ASSERT_EQ(h.num_levels(), 3);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_simplex(rng, 5);
    for (int l = 0; l < h.num_levels(); ++l) {
      const auto q = h.aggregate_probs(p, l);
      for (double v : q) EXPECT_GE(v, 0.0);
      EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
      if (l + 1 < h.num_levels()) {
        // Merge the finer level's nodes into their parents.
        const auto finer = h.aggregate_probs(p, l + 1);
        std::vector<double> merged(q.size(), 0.0);
        for (int n = 0; n < h.num_nodes(l + 1); ++n) {
          const int leaf = h.level(l + 1)[static_cast<std::size_t>(n)].leaves.front();
          merged[static_cast<std::size_t>(h.project_target(leaf, l))] += finer[static_cast<std::size_t>(n)];
        }
        for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(merged[i], q[i], 1e-14);
      }
    }
  }
  for (int l = 0; l < h.num_levels(); ++l) {
    for (int leaf = 0; leaf < 5; ++leaf) {
      int hits = 0;
      for (const auto& node : h.level(l)) hits += static_cast<int>(std::count(node.leaves.begin(), node.leaves.end(), leaf));
      EXPECT_EQ(hits, 1);
      const auto& node = h.level(l)[static_cast<std::size_t>(h.project_target(leaf, l))];
      EXPECT_NE(std::find(node.leaves.begin(), node.leaves.end(), leaf), node.leaves.end());
    }
  }
}

TEST(HierarchyConfig, ParseFormatRoundTrip) {
  const auto h = default_occlusal_hierarchy();
  const auto again = build_hierarchy(parse_hierarchy(format_hierarchy(h)));
  EXPECT_EQ(again, h);
}

TEST(HierarchyConfig, BundledFileMatchesDefault) {
  const auto h = build_hierarchy(load_hierarchy_spec(HIERSEG_BUNDLED_HIERARCHY));
  EXPECT_EQ(h, default_occlusal_hierarchy());
}

TEST(HierarchyConfig, MalformedDocuments) {
  EXPECT_THROW(parse_hierarchy("leaves: ["), ValidationError);
  EXPECT_THROW(parse_hierarchy("levels: []"), ValidationError);
  EXPECT_THROW(parse_hierarchy("leaves: [A, B]\nlevels: 3"), ValidationError);
  EXPECT_THROW(load_hierarchy_spec("/nonexistent/h.yaml"), IoError);
}
