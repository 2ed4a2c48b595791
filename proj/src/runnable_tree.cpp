#include "ufsim/runnable_tree.hpp"

namespace ufsim {

void RunnableTree::activate(CgroupId cg, std::uint64_t key) {
  if (keys_.count(cg)) return;
  stash_.erase(cg);
  tree_.emplace(key, cg);
  keys_[cg] = key;
}

void RunnableTree::park(CgroupId cg) {
  auto it = keys_.find(cg);
  if (it == keys_.end()) return;
  tree_.erase({it->second, cg});
  keys_.erase(it);
  stash_.insert(cg);
}

void RunnableTree::rekey(CgroupId cg, std::uint64_t key) {
  auto& k = keys_.at(cg);
  tree_.erase({k, cg});
  k = key;
  tree_.emplace(key, cg);
}

std::optional<RunnableTree::Node> RunnableTree::peek() const {
  if (tree_.empty()) return std::nullopt;
  const auto& [key, cg] = *tree_.begin();
  return Node{key, cg};
}

std::optional<std::uint64_t> RunnableTree::min_key_by_scan() const {
  std::optional<std::uint64_t> best;
  for (const auto& [cg, key] : keys_)
    if (!best || key < *best) best = key;
  return best;
}

}  // namespace ufsim
