#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>

#include "ufsim/types.hpp"

namespace ufsim {

/// Background cgroups ordered by (group vruntime, cgroup id), plus the stash that
/// parks a cgroup's node while it has no runnable tasks. Once a cgroup has a node
/// it lives in exactly one of the two.
class RunnableTree {
 public:
  struct Node {
    std::uint64_t key = 0;
    CgroupId cgroup = kNoCgroup;
    friend bool operator==(const Node&, const Node&) = default;
  };

  /// Puts the cgroup's node into the tree, pulling it from the stash if parked.
  /// No-op when already present.
  void activate(CgroupId cg, std::uint64_t key);
  /// Moves a tree node into the stash.
  void park(CgroupId cg);
  void rekey(CgroupId cg, std::uint64_t key);

  std::optional<Node> peek() const;
  bool in_tree(CgroupId cg) const { return keys_.count(cg) != 0; }
  bool parked(CgroupId cg) const { return stash_.count(cg) != 0; }
  std::size_t size() const { return tree_.size(); }
  bool empty() const { return tree_.empty(); }
  std::size_t stash_size() const { return stash_.size(); }
  /// Key currently cached for a tree-resident cgroup.
  std::uint64_t key_of(CgroupId cg) const { return keys_.at(cg); }
  /// Nodes in key order.
  const std::set<std::pair<std::uint64_t, CgroupId>>& ordered() const { return tree_; }
  /// Smallest cached key found by a linear scan, independent of the tree order.
  std::optional<std::uint64_t> min_key_by_scan() const;

 private:
  std::set<std::pair<std::uint64_t, CgroupId>> tree_;
  std::map<CgroupId, std::uint64_t> keys_;
  std::set<CgroupId> stash_;
};

}  // namespace ufsim
