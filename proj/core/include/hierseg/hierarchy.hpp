#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hierseg {

// One named group of leaf names at a coarser level.
struct GroupSpec {
  std::string name;
  std::vector<std::string> leaves;
};

// Unvalidated hierarchy description. `levels` runs coarse -> fine and may
// omit the finest (singleton) level; it is appended when missing.
struct HierarchySpec {
  std::vector<std::string> leaves;
  std::vector<std::vector<GroupSpec>> levels;
};

struct HierarchyNode {
  std::string name;
  std::vector<int> leaves;  // ascending leaf indices

  bool operator==(const HierarchyNode&) const = default;
};

// Ordered levels of leaf-set partitions, coarse -> fine. The last level is
// always the identity partition. Immutable once built.
class ClassHierarchy {
 public:
  int num_leaves() const { return static_cast<int>(leaf_names_.size()); }
  int num_levels() const { return static_cast<int>(levels_.size()); }
  int finest_level() const { return num_levels() - 1; }

  const std::vector<std::string>& leaf_names() const { return leaf_names_; }
  std::span<const HierarchyNode> level(int level) const;
  int num_nodes(int level) const { return static_cast<int>(this->level(level).size()); }

  // Node at `level` whose leaf set contains `leaf`.
  int project_target(int leaf, int level) const;

  // Same as project_target without range checks; for inner loops.
  int node_of(int leaf, int level) const {
    return node_of_[static_cast<std::size_t>(level) * leaf_names_.size() + static_cast<std::size_t>(leaf)];
  }

  // Node probabilities at `level` from a normalised leaf probability vector.
  // Throws ContractError when the input is negative or does not sum to 1
  // within 1e-9.
  std::vector<double> aggregate_probs(std::span<const double> leaf_probs, int level) const;

  // Node index by name at `level`, or -1.
  int find_node(int level, std::string_view name) const;

  bool operator==(const ClassHierarchy&) const = default;

 private:
  friend ClassHierarchy build_hierarchy(const HierarchySpec& spec);

  std::vector<std::string> leaf_names_;
  std::vector<std::vector<HierarchyNode>> levels_;
  std::vector<int> node_of_;  // [level][leaf]
};

// Validates `spec` and builds the hierarchy. Throws ValidationError naming
// the offending node for overlapping, empty, unknown or missing groups and
// for levels that do not refine their predecessor.
ClassHierarchy build_hierarchy(const HierarchySpec& spec);

// Background / FULL = {MTP, MFP} over the leaves Background, MTP, MFP.
ClassHierarchy default_occlusal_hierarchy();

// A flat single-level hierarchy over `leaves`.
ClassHierarchy flat_hierarchy(std::vector<std::string> leaves);

// Hierarchy documents:
//
//   leaves: [Background, MTP, MFP]
//   levels:
//     - {Background: [Background], FULL: [MTP, MFP]}
HierarchySpec parse_hierarchy(std::string_view text);
HierarchySpec load_hierarchy_spec(const std::filesystem::path& path);
std::string format_hierarchy(const ClassHierarchy& h);

}  // namespace hierseg
