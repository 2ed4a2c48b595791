#include "ufsim/trace.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace ufsim {
namespace {

constexpr std::array<std::string_view, 12> kNames = {
    "switch", "wakeup", "kick", "enqueue", "lock_attempt", "lock_release",
    "boost", "unboost", "panic", "request_done", "reassign", "diag"};

template <typename T>
T parse_field(std::string_view s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad field '" +
                             std::string(s) + "'");
  return v;
}

}  // namespace

std::string_view to_string(EventKind k) { return kNames.at(static_cast<std::size_t>(k)); }

EventKind event_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == s) return static_cast<EventKind>(i);
  throw std::runtime_error("unknown trace event kind '" + std::string(s) + "'");
}

void Trace::push(const SimEvent& e) {
  if (!events_.empty() && e.time < events_.back().time)
    throw SimulationError("trace event out of time order");
  events_.push_back(e);
}

void Trace::write_csv(std::ostream& os) const {
  os << "time_ns,cpu,kind,arg1,arg2,arg3\n";
  for (const auto& e : events_) {
    os << e.time << ',' << e.cpu << ',' << to_string(e.kind) << ',' << e.arg1 << ',' << e.arg2
       << ',' << e.arg3 << '\n';
  }
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

Trace Trace::read_csv(std::istream& is) {
  Trace t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (n == 1 && line.rfind("time_ns", 0) == 0) continue;
    if (line.empty()) continue;
    std::array<std::string_view, 6> f;
    std::string_view rest = line;
    for (std::size_t i = 0; i < 6; ++i) {
      auto comma = rest.find(',');
      if (i < 5 && comma == std::string_view::npos)
        throw std::runtime_error("trace line " + std::to_string(n) + ": expected 6 fields");
      f[i] = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    SimEvent e;
    e.time = parse_field<SimTime>(f[0], n);
    e.cpu = parse_field<CpuId>(f[1], n);
    e.kind = event_kind_from_string(f[2]);
    e.arg1 = parse_field<std::int64_t>(f[3], n);
    e.arg2 = parse_field<std::int64_t>(f[4], n);
    e.arg3 = parse_field<std::int64_t>(f[5], n);
    t.push(e);
  }
  return t;
}

}  // namespace ufsim
