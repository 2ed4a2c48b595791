#pragma once

#include <map>
#include <optional>
#include <set>

#include "ufsim/model.hpp"

namespace ufsim {

struct BoostDecision {
  enum class Kind : std::uint8_t { Boost, Unboost } kind;
  TaskId task = kNoTask;
  LockId lock = 0;
  friend bool operator==(const BoostDecision&, const BoostDecision&) = default;
};

/// Lock activity reported by workloads, and the boost decisions derived from it.
class HintMap {
 public:
  struct Entry {
    std::optional<TaskId> holder;
    Tier holder_tier = Tier::Background;
    std::set<TaskId> ts_waiters;
  };

  explicit HintMap(bool enabled = true) : enabled_(enabled) {}
  void set_enabled(bool on) { enabled_ = on; }
  bool enabled() const { return enabled_; }

  /// Updates the map. Returns a boost when a time-sensitive task attempts a lock
  /// held by an unboosted background task, and an unboost when a boosted holder
  /// releases the lock it was boosted for. Never decides anything while disabled.
  std::optional<BoostDecision> publish(const HintEvent& e, Tier worker_tier);
  /// The worker gave up on the lock without acquiring it.
  void abandon(TaskId worker, LockId lock);

  const Entry* find(LockId lock) const;
  bool boosted(TaskId task) const { return boosts_.count(task) != 0; }
  std::size_t active_boosts() const { return boosts_.size(); }

 private:
  bool enabled_;
  std::map<LockId, Entry> locks_;
  std::map<TaskId, LockId> boosts_;
};

}  // namespace ufsim
