#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hsps/errors.hpp"

namespace hsps {

enum class Channel : uint8_t { D1 = 1, D2 = 2, D3 = 3 };

inline const char* to_string(Channel c) {
  switch (c) {
    case Channel::D1: return "D1";
    case Channel::D2: return "D2";
    case Channel::D3: return "D3";
  }
  return "?";
}

struct EventRecord {
  uint64_t pulse;
  Channel channel;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct StreamInfo {
  uint64_t seed = 0;
  uint64_t n_pulses = 0;
  double rep_rate_hz = 0.0;
  std::string topology;       // "two_detector" | "three_detector"
  std::string config_digest;  // provenance of the generating configuration
};

// Ordered detection records: pulse_index non-decreasing, at most one record
// per (pulse, channel) since threshold detectors click at most once per pulse.
struct EventStream {
  StreamInfo info;
  std::vector<EventRecord> records;

  std::array<uint64_t, 3> channel_totals() const {
    std::array<uint64_t, 3> t{0, 0, 0};
    for (const auto& r : records) t[size_t(uint8_t(r.channel)) - 1]++;
    return t;
  }

  void validate() const {
    uint64_t prev_pulse = 0;
    uint8_t prev_mask = 0;
    bool first = true;
    for (const auto& r : records) {
      uint8_t bit = uint8_t(1u << (uint8_t(r.channel) - 1));
      if (!first && r.pulse < prev_pulse)
        throw format_error("event stream: pulse_index decreases");
      if (!first && r.pulse == prev_pulse && (prev_mask & bit))
        throw format_error("event stream: duplicate (pulse, channel) record");
      if (r.pulse >= info.n_pulses && info.n_pulses > 0)
        throw format_error("event stream: pulse_index beyond n_pulses");
      if (r.pulse != prev_pulse || first) prev_mask = 0;
      prev_mask |= bit;
      prev_pulse = r.pulse;
      first = false;
    }
  }
};

}  // namespace hsps
