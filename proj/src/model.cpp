#include "ufsim/model.hpp"

#include <numeric>

namespace ufsim {

std::string_view to_string(Tier t) {
  return t == Tier::TimeSensitive ? "time_sensitive" : "background";
}

std::string_view to_string(TaskState s) {
  switch (s) {
    case TaskState::Runnable: return "runnable";
    case TaskState::Running: return "running";
    case TaskState::Blocked: return "blocked";
    case TaskState::Finished: return "finished";
    case TaskState::Panicked: return "panicked";
  }
  return "?";
}

bool valid_transition(TaskState from, TaskState to) {
  switch (from) {
    case TaskState::Runnable: return to == TaskState::Running;
    case TaskState::Running:
      return to == TaskState::Runnable || to == TaskState::Blocked ||
             to == TaskState::Finished || to == TaskState::Panicked;
    case TaskState::Blocked: return to == TaskState::Runnable;
    default: return false;
  }
}

Rational Rational::make(std::uint64_t n, std::uint64_t d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  const std::uint64_t g = std::gcd(n, d);
  return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
}

Rational Rational::operator*(const Rational& o) const {
  // Cross-reduce first to keep the terms small.
  const std::uint64_t g1 = std::gcd(num, o.den);
  const std::uint64_t g2 = std::gcd(o.num, den);
  return make((num / g1) * (o.num / g2), (den / g2) * (o.den / g1));
}

CpuSet CpuSet::all(int ncpus) {
  return CpuSet(ncpus >= 64 ? ~0ULL : ((1ULL << ncpus) - 1));
}

CpuSet CpuSet::of(std::initializer_list<CpuId> cpus) {
  CpuSet s;
  for (CpuId c : cpus) s.insert(c);
  return s;
}

Tier CgroupTree::tier_from_name(const std::string& name) {
  if (name.rfind("ts_", 0) == 0) return Tier::TimeSensitive;
  if (name.rfind("bg_", 0) == 0) return Tier::Background;
  throw ConfigError("cgroup name '" + name + "' must start with 'ts_' or 'bg_'");
}

CgroupId CgroupTree::add(const std::string& name, std::optional<std::string> parent,
                         Weight weight, int rt_priority) {
  if (find(name)) throw ConfigError("duplicate cgroup '" + name + "'");
  Cgroup g;
  g.id = static_cast<CgroupId>(groups_.size());
  g.name = name;
  g.tier = tier_from_name(name);
  g.weight = weight;
  g.rt_priority = rt_priority;
  if (parent) {
    auto p = find(*parent);
    if (!p) throw ConfigError("cgroup '" + name + "' has unknown parent '" + *parent + "'");
    if (at(*p).tier != g.tier)
      throw ConfigError("cgroup '" + name + "' tier differs from parent '" + *parent + "'");
    g.parent = *p;
  }
  groups_.push_back(std::move(g));
  return groups_.back().id;
}

std::optional<CgroupId> CgroupTree::find(const std::string& name) const {
  for (const auto& g : groups_)
    if (g.name == name) return g.id;
  return std::nullopt;
}

std::vector<CgroupId> CgroupTree::children(CgroupId parent) const {
  std::vector<CgroupId> out;
  for (const auto& g : groups_)
    if (g.parent == parent) out.push_back(g.id);
  return out;
}

bool CgroupTree::subtree_runnable(CgroupId id, const std::vector<bool>& runnable) const {
  if (static_cast<std::size_t>(id) < runnable.size() && runnable[static_cast<std::size_t>(id)])
    return true;
  for (CgroupId c : children(id))
    if (subtree_runnable(c, runnable)) return true;
  return false;
}

Rational CgroupTree::effective_weight(CgroupId id, const std::vector<bool>* runnable) const {
  Rational share{1, 1};
  for (CgroupId cur = id; cur != kNoCgroup; cur = at(cur).parent) {
    std::uint64_t sum = 0;
    for (CgroupId sib : children(at(cur).parent)) {
      if (sib == cur || !runnable || subtree_runnable(sib, *runnable))
        sum += at(sib).weight.value();
    }
    share = share * Rational::make(at(cur).weight.value(), sum);
  }
  return share;
}

Rational CgroupTree::scaled_weight(CgroupId id) const {
  const Tier tier = at(id).tier;
  std::uint64_t top = 0;
  for (const auto& g : groups_)
    if (g.parent == kNoCgroup && g.tier == tier) top += g.weight.value();
  // Shares below the top level are tier-local: siblings of a top-level cgroup
  // in the other tier do not dilute it.
  Rational share{1, 1};
  for (CgroupId cur = id; cur != kNoCgroup; cur = at(cur).parent) {
    std::uint64_t sum = 0;
    for (CgroupId sib : children(at(cur).parent))
      if (at(sib).tier == tier) sum += at(sib).weight.value();
    share = share * Rational::make(at(cur).weight.value(), sum);
  }
  return share * Rational::make(top, 1);
}

std::uint64_t scale_runtime(SimDuration ran, const Rational& scaled_weight) {
  const unsigned __int128 v = static_cast<unsigned __int128>(ran) * kWeightScale * scaled_weight.den;
  return static_cast<std::uint64_t>(v / scaled_weight.num);
}

}  // namespace ufsim
