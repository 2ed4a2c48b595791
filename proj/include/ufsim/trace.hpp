#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ufsim/types.hpp"

namespace ufsim {

enum class EventKind : std::uint8_t {
  Switch,       // cpu, arg1=prev (-1 idle), arg2=next (-1 idle), arg3=switch overhead ns
  Wakeup,       // arg1=task
  Kick,         // cpu, arg1=reason (0 idle, 1 preempt), arg2=task that triggered it
  Enqueue,      // cpu=target cpu or -1, arg1=task, arg2=cgroup for group queues else -1
  LockAttempt,  // cpu, arg1=task, arg2=lock, arg3=1 on success
  LockRelease,  // cpu, arg1=task, arg2=lock
  Boost,        // arg1=task, arg2=lock
  Unboost,      // arg1=task
  Panic,        // arg1=task, arg2=consecutive failures
  RequestDone,  // cpu, arg1=task, arg2=latency ns
  Reassign,     // arg1=task, arg2=new cgroup
  Diag,         // arg1=diagnostic code, arg2=value
};

enum class KickReason : std::uint8_t { Idle = 0, Preempt = 1 };

enum class DiagCode : std::int64_t {
  DispatchRetryExhausted = 1,
  BoostLeak = 2,
};

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct SimEvent {
  SimTime time = 0;
  EventKind kind = EventKind::Diag;
  CpuId cpu = kNoCpu;
  std::int64_t arg1 = -1;
  std::int64_t arg2 = -1;
  std::int64_t arg3 = -1;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

/// Append-only, time-ordered event log of one run.
class Trace {
 public:
  void push(const SimEvent& e);
  const std::vector<SimEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  void reserve(std::size_t n) { events_.reserve(n); }

  /// CSV with header `time_ns,cpu,kind,arg1,arg2,arg3`.
  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
  static Trace read_csv(std::istream& is);

 private:
  std::vector<SimEvent> events_;
};

}  // namespace ufsim
