#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ufsim {

/// Simulated time and durations, in nanoseconds since simulation start.
using SimTime = std::uint64_t;
using SimDuration = std::uint64_t;

inline constexpr SimTime kForever = std::numeric_limits<SimTime>::max();

constexpr SimDuration ns(std::uint64_t v) { return v; }
constexpr SimDuration us(std::uint64_t v) { return v * 1000ULL; }
constexpr SimDuration ms(std::uint64_t v) { return v * 1000ULL * 1000ULL; }
constexpr SimDuration sec(std::uint64_t v) { return v * 1000ULL * 1000ULL * 1000ULL; }

using TaskId = std::int32_t;
using CpuId = std::int32_t;
using CgroupId = std::int32_t;
using LockId = std::int32_t;

inline constexpr TaskId kNoTask = -1;
inline constexpr CpuId kNoCpu = -1;
inline constexpr CgroupId kNoCgroup = -1;

/// Default cgroup weight; anchors weight-scaled vruntime to wall time.
inline constexpr std::uint64_t kWeightScale = 100;

enum class Tier : std::uint8_t { TimeSensitive, Background };

std::string_view to_string(Tier t);

/// cgroup cpu.weight, always within [1, 10000].
class Weight {
 public:
  static constexpr std::uint32_t kMin = 1;
  static constexpr std::uint32_t kMax = 10000;

  explicit Weight(std::int64_t v) : value_(static_cast<std::uint32_t>(v)) {
    if (v < kMin || v > kMax)
      throw std::invalid_argument("weight " + std::to_string(v) + " outside [1, 10000]");
  }
  std::uint32_t value() const { return value_; }
  friend bool operator==(Weight, Weight) = default;

 private:
  std::uint32_t value_;
};

/// Rejected scenario configuration. `line` is 0 when no source position applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// An engine or policy invariant did not hold; the run is aborted.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ufsim
