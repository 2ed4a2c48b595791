#include "ufsim/hinting.hpp"

namespace ufsim {

std::optional<BoostDecision> HintMap::publish(const HintEvent& e, Tier worker_tier) {
  Entry& entry = locks_[e.lock];
  switch (e.kind) {
    case HintKind::Attempt: {
      if (worker_tier != Tier::TimeSensitive) return std::nullopt;
      if (entry.holder == e.worker) return std::nullopt;
      entry.ts_waiters.insert(e.worker);
      if (!enabled_ || !entry.holder || entry.holder_tier != Tier::Background) return std::nullopt;
      if (boosts_.count(*entry.holder)) return std::nullopt;
      boosts_[*entry.holder] = e.lock;
      return BoostDecision{BoostDecision::Kind::Boost, *entry.holder, e.lock};
    }
    case HintKind::Acquired:
      entry.holder = e.worker;
      entry.holder_tier = worker_tier;
      entry.ts_waiters.erase(e.worker);
      return std::nullopt;
    case HintKind::Released: {
      if (entry.holder != e.worker)
        throw SimulationError("task " + std::to_string(e.worker) + " released lock " +
                              std::to_string(e.lock) + " it does not hold");
      entry.holder.reset();
      auto it = boosts_.find(e.worker);
      if (it == boosts_.end() || it->second != e.lock) return std::nullopt;
      boosts_.erase(it);
      return BoostDecision{BoostDecision::Kind::Unboost, e.worker, e.lock};
    }
  }
  return std::nullopt;
}

void HintMap::abandon(TaskId worker, LockId lock) {
  auto it = locks_.find(lock);
  if (it != locks_.end()) it->second.ts_waiters.erase(worker);
}

const HintMap::Entry* HintMap::find(LockId lock) const {
  auto it = locks_.find(lock);
  return it == locks_.end() ? nullptr : &it->second;
}

}  // namespace ufsim
