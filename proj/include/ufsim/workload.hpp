#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <variant>

#include "ufsim/model.hpp"
#include "ufsim/scenario.hpp"

namespace ufsim {

/// Per-task random stream. Seeded from (scenario seed, task id) only, so adding a
/// task never perturbs another task's draws.
class Rng {
 public:
  Rng(std::uint64_t scenario_seed, TaskId task);
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

std::uint64_t splitmix64(std::uint64_t x);

namespace action {
struct Compute { SimDuration amount; };
struct Sleep { SimDuration amount; BlockReason reason; };
/// One test-and-set on `lock`. A failed check with `final_check` set counts
/// toward the lock's consecutive-failure counter.
struct TryLock { LockId lock; bool final_check; };
struct Unlock { LockId lock; };
struct Complete { SimDuration latency; };
struct Panic { int failures; };
struct Exit {};
}  // namespace action

using Action = std::variant<action::Compute, action::Sleep, action::TryLock, action::Unlock,
                            action::Complete, action::Panic, action::Exit>;

struct StepContext {
  SimTime now = 0;
  bool last_lock_ok = false;
  int lock_failures = 0;  // consecutive failed rounds on the lock last tried
  Rng* rng = nullptr;
};

/// Resumable workload program. The engine calls `next` whenever the previous
/// action has completed (compute consumed, sleep elapsed, lock op applied).
class Behavior {
 public:
  virtual ~Behavior() = default;
  virtual Action next(const StepContext& ctx) = 0;
};

/// Closed-loop client: service demand, completion, think time, repeat.
class BurstyClient : public Behavior {
 public:
  /// A request arrives when the client finishes thinking, so queueing delay
  /// before the task gets a CPU counts toward its latency.
  explicit BurstyClient(BurstyParams p, SimTime start = 0) : params_(std::move(p)), arrival_(start) {}
  Action next(const StepContext& ctx) override;

  std::uint64_t issued() const { return issued_; }
  std::uint64_t completed() const { return completed_; }

 private:
  enum class Phase { Issue, Done, Think };
  BurstyParams params_;
  Phase phase_ = Phase::Issue;
  SimTime arrival_ = 0;
  std::uint64_t issued_ = 0;
  std::uint64_t completed_ = 0;
};

/// Endless loop of fixed-size iterations; each iteration completes one request.
class BoundLoop : public Behavior {
 public:
  explicit BoundLoop(BoundParams p) : params_(std::move(p)) {}
  Action next(const StepContext& ctx) override;

 private:
  BoundParams params_;
  bool computing_ = false;
  SimTime iteration_start_ = 0;
};

/// Spin-then-sleep acquisition of one lock, then a critical section.
/// Holder: acquire, compute `holder_work`, release, exit.
/// Waiter: acquire, record completion, release, exit.
class SpinLockUser : public Behavior {
 public:
  SpinLockUser(SpinLockParams p, LockId lock, bool holder, SimTime start)
      : params_(p), lock_(lock), holder_(holder), start_(start), backoff_(p.sleep_initial) {}
  Action next(const StepContext& ctx) override;

 private:
  enum class Phase { Try, Spin, Recheck, Sleeping, Acquired, Working, Released, Done };
  SpinLockParams params_;
  LockId lock_;
  bool holder_;
  SimTime start_;
  SimDuration backoff_;
  Phase phase_ = Phase::Try;
};

std::unique_ptr<Behavior> make_behavior(const WorkloadSpec& spec, SimTime start);

}  // namespace ufsim
