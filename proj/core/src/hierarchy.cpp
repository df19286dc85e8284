#include "hierseg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "hierseg/error.hpp"

namespace hierseg {

namespace {

constexpr double kNormTolerance = 1e-9;

bool is_identity_level(const std::vector<GroupSpec>& groups, const std::vector<std::string>& leaves) {
  if (groups.size() != leaves.size()) return false;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].leaves.size() != 1 || groups[i].leaves[0] != leaves[i]) return false;
  }
  return true;
}

std::vector<HierarchyNode> resolve_level(const std::vector<GroupSpec>& groups,
                                         const std::map<std::string, int>& leaf_index, std::size_t level_no) {
  const auto where = " at level " + std::to_string(level_no);
  if (groups.empty()) throw ValidationError("level " + std::to_string(level_no) + " has no groups");

  std::vector<HierarchyNode> nodes;
  std::vector<std::string> owner(leaf_index.size());
  std::set<std::string> names;
  for (const auto& g : groups) {
    if (!names.insert(g.name).second) throw ValidationError("duplicate node '" + g.name + "'" + where);
    if (g.leaves.empty()) throw ValidationError("empty group '" + g.name + "'" + where);
    HierarchyNode node{g.name, {}};
    for (const auto& leaf : g.leaves) {
      auto it = leaf_index.find(leaf);
      if (it == leaf_index.end()) {
        throw ValidationError("group '" + g.name + "'" + where + " names unknown leaf '" + leaf + "'");
      }
      auto& prev = owner[static_cast<std::size_t>(it->second)];
      if (!prev.empty()) {
        throw ValidationError("overlapping groups '" + prev + "' and '" + g.name + "'" + where + " share leaf '" +
                              leaf + "'");
      }
      prev = g.name;
      node.leaves.push_back(it->second);
    }
    std::sort(node.leaves.begin(), node.leaves.end());
    nodes.push_back(std::move(node));
  }
  for (const auto& [name, idx] : leaf_index) {
    if (owner[static_cast<std::size_t>(idx)].empty()) {
      throw ValidationError("leaf '" + name + "' is missing from every group" + where);
    }
  }
  return nodes;
}

std::vector<std::string> as_string_list(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsSequence()) throw ValidationError(what + " must be a list");
  std::vector<std::string> out;
  for (const auto& item : node) {
    if (!item.IsScalar()) throw ValidationError(what + " entries must be names");
    out.push_back(item.as<std::string>());
  }
  return out;
}

}  // namespace

std::span<const HierarchyNode> ClassHierarchy::level(int level) const {
  if (level < 0 || level >= num_levels()) {
    throw RangeError("hierarchy level " + std::to_string(level) + " out of range [0, " +
                     std::to_string(num_levels()) + ")");
  }
  return levels_[static_cast<std::size_t>(level)];
}

int ClassHierarchy::project_target(int leaf, int level) const {
  if (leaf < 0 || leaf >= num_leaves()) {
    throw RangeError("leaf index " + std::to_string(leaf) + " out of range [0, " + std::to_string(num_leaves()) +
                     ")");
  }
  if (level < 0 || level >= num_levels()) {
    throw RangeError("hierarchy level " + std::to_string(level) + " out of range [0, " +
                     std::to_string(num_levels()) + ")");
  }
  return node_of(leaf, level);
}

std::vector<double> ClassHierarchy::aggregate_probs(std::span<const double> leaf_probs, int level) const {
  const auto nodes = this->level(level);
  if (static_cast<int>(leaf_probs.size()) != num_leaves()) {
    throw ContractError("probability vector has " + std::to_string(leaf_probs.size()) + " entries, expected " +
                        std::to_string(num_leaves()));
  }
  double total = 0.0;
  for (double p : leaf_probs) {
    if (!(p >= 0.0)) throw ContractError("leaf probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw ContractError("leaf probabilities sum to " + std::to_string(total) + ", expected 1");
  }
  std::vector<double> out(nodes.size(), 0.0);
  for (std::size_t k = 0; k < leaf_probs.size(); ++k) {
    out[static_cast<std::size_t>(node_of(static_cast<int>(k), level))] += leaf_probs[k];
  }
  return out;
}

int ClassHierarchy::find_node(int level, std::string_view name) const {
  const auto nodes = this->level(level);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

ClassHierarchy build_hierarchy(const HierarchySpec& spec) {
  if (spec.leaves.size() < 2) throw ValidationError("a hierarchy needs at least two leaves");
  std::map<std::string, int> leaf_index;
  for (std::size_t i = 0; i < spec.leaves.size(); ++i) {
    if (spec.leaves[i].empty()) throw ValidationError("leaf names must be non-empty");
    if (!leaf_index.emplace(spec.leaves[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate leaf '" + spec.leaves[i] + "'");
    }
  }

  std::vector<std::vector<GroupSpec>> levels = spec.levels;
  if (levels.empty() || !is_identity_level(levels.back(), spec.leaves)) {
    std::vector<GroupSpec> finest;
    for (const auto& leaf : spec.leaves) finest.push_back({leaf, {leaf}});
    levels.push_back(std::move(finest));
  }

  ClassHierarchy h;
  h.leaf_names_ = spec.leaves;
  for (std::size_t l = 0; l < levels.size(); ++l) h.levels_.push_back(resolve_level(levels[l], leaf_index, l));

  const auto n = spec.leaves.size();
  h.node_of_.assign(levels.size() * n, -1);
  for (std::size_t l = 0; l < h.levels_.size(); ++l) {
    for (std::size_t node = 0; node < h.levels_[l].size(); ++node) {
      for (int leaf : h.levels_[l][node].leaves) h.node_of_[l * n + static_cast<std::size_t>(leaf)] = static_cast<int>(node);
    }
  }

  // Each node of level l+1 must sit inside a single node of level l.
  for (std::size_t l = 0; l + 1 < h.levels_.size(); ++l) {
    for (const auto& child : h.levels_[l + 1]) {
      const int parent = h.node_of_[l * n + static_cast<std::size_t>(child.leaves.front())];
      for (int leaf : child.leaves) {
        if (h.node_of_[l * n + static_cast<std::size_t>(leaf)] != parent) {
          throw ValidationError("node '" + child.name + "' at level " + std::to_string(l + 1) +
                                " does not refine level " + std::to_string(l) + ": its leaves span several nodes");
        }
      }
    }
  }
  return h;
}

ClassHierarchy default_occlusal_hierarchy() {
  HierarchySpec spec;
  spec.leaves = {"Background", "MTP", "MFP"};
  spec.levels = {{{"Background", {"Background"}}, {"FULL", {"MTP", "MFP"}}}};
  return build_hierarchy(spec);
}

ClassHierarchy flat_hierarchy(std::vector<std::string> leaves) {
  HierarchySpec spec;
  spec.leaves = std::move(leaves);
  return build_hierarchy(spec);
}

HierarchySpec parse_hierarchy(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("hierarchy document: ") + e.what());
  }
  if (!root.IsMap()) throw ValidationError("hierarchy document must be a mapping");

  HierarchySpec spec;
  spec.leaves = as_string_list(root["leaves"], "leaves");
  if (const auto levels = root["levels"]) {
    if (!levels.IsSequence()) throw ValidationError("levels must be a list");
    for (const auto& level : levels) {
      if (!level.IsMap()) throw ValidationError("each level must map group names to leaf lists");
      std::vector<GroupSpec> groups;
      for (const auto& kv : level) {
        const auto name = kv.first.as<std::string>();
        groups.push_back({name, as_string_list(kv.second, "group '" + name + "'")});
      }
      spec.levels.push_back(std::move(groups));
    }
  }
  return spec;
}

HierarchySpec load_hierarchy_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read hierarchy file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_hierarchy(ss.str());
}

std::string format_hierarchy(const ClassHierarchy& h) {
  auto list = [](const std::vector<std::string>& names) {
    std::string s = "[";
    for (std::size_t i = 0; i < names.size(); ++i) s += (i ? ", " : "") + names[i];
    return s + "]";
  };
  std::string out = "leaves: " + list(h.leaf_names()) + "\nlevels:\n";
  for (int l = 0; l < h.num_levels(); ++l) {
    out += "  - {";
    const auto nodes = h.level(l);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::vector<std::string> names;
      for (int leaf : nodes[i].leaves) names.push_back(h.leaf_names()[static_cast<std::size_t>(leaf)]);
      out += (i ? ", " : "") + nodes[i].name + ": " + list(names);
    }
    out += "}\n";
  }
  return out;
}

}  // namespace hierseg
