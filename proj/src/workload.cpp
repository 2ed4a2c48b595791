#include "ufsim/workload.hpp"

#include <cmath>

namespace ufsim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t scenario_seed, TaskId task)
    : gen_(splitmix64(splitmix64(scenario_seed) ^ static_cast<std::uint64_t>(task + 1))) {}

double Rng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

SimDuration Distribution::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Constant: return mean;
    case Kind::Uniform: {
      const double u = rng.uniform();
      return lo + static_cast<SimDuration>(u * static_cast<double>(hi - lo));
    }
    case Kind::Exponential: {
      const double u = rng.uniform();
      return static_cast<SimDuration>(-std::log1p(-u) * static_cast<double>(mean));
    }
  }
  return mean;
}

SimDuration Distribution::expected() const {
  return kind == Kind::Uniform ? (lo + hi) / 2 : mean;
}

Action BurstyClient::next(const StepContext& ctx) {
  switch (phase_) {
    case Phase::Issue:
      ++issued_;
      phase_ = Phase::Done;
      return action::Compute{params_.service.sample(*ctx.rng)};
    case Phase::Done:
      ++completed_;
      phase_ = Phase::Think;
      return action::Complete{ctx.now - arrival_};
    case Phase::Think: {
      phase_ = Phase::Issue;
      const SimDuration think = params_.think.sample(*ctx.rng);
      arrival_ = ctx.now + think;
      return action::Sleep{think, BlockReason::ClientThink};
    }
  }
  return action::Exit{};
}

Action BoundLoop::next(const StepContext& ctx) {
  if (!computing_) {
    computing_ = true;
    iteration_start_ = ctx.now;
    return action::Compute{params_.iteration_work};
  }
  computing_ = false;
  return action::Complete{ctx.now - iteration_start_};
}

Action SpinLockUser::next(const StepContext& ctx) {
  switch (phase_) {
    case Phase::Try:
      phase_ = Phase::Spin;
      return action::TryLock{lock_, false};
    case Phase::Spin:
      if (ctx.last_lock_ok) break;
      phase_ = Phase::Recheck;
      return action::Compute{params_.spin_cost *
                             static_cast<SimDuration>(params_.spin_attempts_before_sleep)};
    case Phase::Recheck:
      phase_ = Phase::Sleeping;
      return action::TryLock{lock_, true};
    case Phase::Sleeping: {
      if (ctx.last_lock_ok) break;
      if (ctx.lock_failures >= params_.panic_threshold) {
        phase_ = Phase::Done;
        return action::Panic{ctx.lock_failures};
      }
      const SimDuration d = backoff_;
      backoff_ = std::min(backoff_ * 2, params_.sleep_cap);
      phase_ = Phase::Try;
      return action::Sleep{d, BlockReason::Lock};
    }
    case Phase::Acquired:
      if (holder_) {
        phase_ = Phase::Working;
        return action::Compute{params_.holder_work};
      }
      phase_ = Phase::Released;
      return action::Complete{ctx.now - start_};
    case Phase::Working:
      phase_ = Phase::Released;
      return action::Unlock{lock_};
    case Phase::Released:
      phase_ = Phase::Done;
      if (holder_) return action::Complete{ctx.now - start_};
      return action::Unlock{lock_};
    case Phase::Done:
      return action::Exit{};
  }
  // Lock acquired on the last check.
  phase_ = Phase::Acquired;
  return next(ctx);
}

std::unique_ptr<Behavior> make_behavior(const WorkloadSpec& spec, SimTime start) {
  switch (spec.kind) {
    case WorkloadKind::Bursty: return std::make_unique<BurstyClient>(spec.bursty, start);
    case WorkloadKind::Bound: return std::make_unique<BoundLoop>(spec.bound);
    case WorkloadKind::LockHolder:
      return std::make_unique<SpinLockUser>(spec.lock, spec.lock_id, true, start);
    case WorkloadKind::LockWaiter:
      return std::make_unique<SpinLockUser>(spec.lock, spec.lock_id, false, start);
  }
  return nullptr;
}

}  // namespace ufsim
