#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ufsim/types.hpp"

namespace ufsim {

/// Exact non-negative fraction, kept reduced.
struct Rational {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  static Rational make(std::uint64_t n, std::uint64_t d);
  Rational operator*(const Rational& o) const;
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) = default;
};

/// Up to 64 CPUs; bit i set means CPU i is allowed.
class CpuSet {
 public:
  CpuSet() = default;
  explicit CpuSet(std::uint64_t bits) : bits_(bits) {}
  static CpuSet all(int ncpus);
  static CpuSet of(std::initializer_list<CpuId> cpus);

  bool contains(CpuId c) const { return c >= 0 && c < 64 && ((bits_ >> c) & 1U); }
  void insert(CpuId c) { bits_ |= (1ULL << c); }
  bool empty() const { return bits_ == 0; }
  int size() const { return __builtin_popcountll(bits_); }
  std::uint64_t bits() const { return bits_; }
  CpuId first() const { return bits_ ? __builtin_ctzll(bits_) : kNoCpu; }
  friend bool operator==(CpuSet, CpuSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

struct Cgroup {
  CgroupId id = kNoCgroup;
  std::string name;
  CgroupId parent = kNoCgroup;  // kNoCgroup: child of the root
  Tier tier = Tier::Background;
  Weight weight{kWeightScale};
  int rt_priority = 0;  // 0: derive from tier under real-time baselines
  std::uint64_t group_vruntime = 0;
};

enum class TaskState : std::uint8_t { Runnable, Running, Blocked, Finished, Panicked };

std::string_view to_string(TaskState s);

/// Legal lifecycle edges: Runnable->Running->{Runnable,Blocked,Finished,Panicked}, Blocked->Runnable.
bool valid_transition(TaskState from, TaskState to);

enum class BlockReason : std::uint8_t { Io, Lock, ClientThink };

struct Task {
  TaskId id = kNoTask;
  std::string name;   // workload group label
  CgroupId cgroup = kNoCgroup;
  std::uint64_t vruntime = 0;  // weight-scaled nanoseconds
  TaskState state = TaskState::Blocked;
  CpuSet affinity;
  bool boosted = false;
  std::optional<LockId> boost_lock;
  CpuId last_cpu = kNoCpu;
  CpuId home_cpu = kNoCpu;  // placement hint before the task first runs
};

/// Cgroup hierarchy. Leaves carry tasks; tiers never mix within a subtree.
class CgroupTree {
 public:
  /// Tier from the name prefix: "ts_" or "bg_". Anything else is a ConfigError.
  static Tier tier_from_name(const std::string& name);

  CgroupId add(const std::string& name, std::optional<std::string> parent, Weight weight,
               int rt_priority = 0);

  const Cgroup& at(CgroupId id) const { return groups_.at(static_cast<std::size_t>(id)); }
  Cgroup& at(CgroupId id) { return groups_.at(static_cast<std::size_t>(id)); }
  std::optional<CgroupId> find(const std::string& name) const;
  std::size_t size() const { return groups_.size(); }
  const std::vector<Cgroup>& all() const { return groups_; }
  std::vector<CgroupId> children(CgroupId parent) const;
  bool is_leaf(CgroupId id) const { return children(id).empty(); }

  /// Share of the machine: product over ancestors of weight / sum of sibling weights.
  /// With `runnable`, only siblings whose subtree has a runnable member count;
  /// the queried cgroup and its ancestors always count.
  Rational effective_weight(CgroupId id, const std::vector<bool>* runnable = nullptr) const;

  /// Weight used for vruntime scaling: share x sum of top-level weights within the
  /// cgroup's tier. Equals the plain weight for a top-level cgroup.
  Rational scaled_weight(CgroupId id) const;

 private:
  bool subtree_runnable(CgroupId id, const std::vector<bool>& runnable) const;

  std::vector<Cgroup> groups_;
};

/// `ran` converted to weight-scaled vruntime: ran x kWeightScale / scaled_weight.
std::uint64_t scale_runtime(SimDuration ran, const Rational& scaled_weight);

/// Raise a lagging task to at most one slice behind its group.
constexpr std::uint64_t clamp_vruntime(std::uint64_t task_vr, std::uint64_t group_vr,
                                       SimDuration slice) {
  const std::uint64_t bound = group_vr > slice ? group_vr - slice : 0;
  return task_vr > bound ? task_vr : bound;
}

struct LockState {
  LockId id = 0;
  std::optional<TaskId> holder;
  std::vector<TaskId> waiters;
  std::map<TaskId, int> consecutive_failures;
};

enum class HintKind : std::uint8_t { Attempt, Acquired, Released };

struct HintEvent {
  TaskId worker = kNoTask;
  LockId lock = 0;
  HintKind kind = HintKind::Attempt;
};

}  // namespace ufsim
