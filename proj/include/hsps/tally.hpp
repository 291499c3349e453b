#pragma once

// Single-pass coincidence counting over an ordered event stream: per-channel
// singles, same-slot multi-fold counts, and the D1-D2 delay histogram over
// pulse offsets |delta| <= window. Memory is O(window), independent of stream
// length.

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "hsps/errors.hpp"
#include "hsps/event_stream.hpp"

namespace hsps {

struct CoincidenceTally {
  uint64_t c1 = 0, c2 = 0, c3 = 0;
  uint64_t c12 = 0, c13 = 0, c23 = 0;
  uint64_t c123 = 0;
  int window = 0;                     // W: histogram covers delta in [-W, +W]
  std::vector<uint64_t> delay_hist;   // index delta + W
  uint64_t n_pulses = 0;
  double rep_rate_hz = 0.0;

  uint64_t hist_at(int delta) const { return delay_hist[size_t(delta + window)]; }
  uint64_t zero_delay() const { return hist_at(0); }

  uint64_t off_zero_total() const {
    uint64_t s = 0;
    for (int d = -window; d <= window; ++d)
      if (d != 0) s += hist_at(d);
    return s;
  }

  double accidental_mean() const { return double(off_zero_total()) / double(2 * window); }

  // Field-wise sum; exact for independent streams (shard boundaries of a split
  // stream lose only cross-boundary histogram pairs within the window).
  void merge(const CoincidenceTally& other) {
    if (other.window != window) throw parameter_domain_error("tally merge: window mismatch");
    if (other.rep_rate_hz != rep_rate_hz && rep_rate_hz != 0.0 && other.rep_rate_hz != 0.0)
      throw parameter_domain_error("tally merge: rep_rate mismatch");
    c1 += other.c1;
    c2 += other.c2;
    c3 += other.c3;
    c12 += other.c12;
    c13 += other.c13;
    c23 += other.c23;
    c123 += other.c123;
    for (size_t i = 0; i < delay_hist.size(); ++i) delay_hist[i] += other.delay_hist[i];
    n_pulses += other.n_pulses;
    if (rep_rate_hz == 0.0) rep_rate_hz = other.rep_rate_hz;
  }
};

class TallyBuilder {
 public:
  explicit TallyBuilder(int window = 10) {
    if (window < 1) throw parameter_domain_error("tally window: must be >= 1");
    t_.window = window;
    t_.delay_hist.assign(size_t(2 * window + 1), 0);
  }

  void add(const EventRecord& r) {
    uint8_t bit = uint8_t(1u << (uint8_t(r.channel) - 1));
    if (has_current_ && r.pulse < cur_pulse_)
      throw format_error("tally: stream not sorted by pulse_index");
    if (has_current_ && r.pulse == cur_pulse_) {
      if (cur_mask_ & bit) throw format_error("tally: duplicate (pulse, channel) record");
      cur_mask_ |= bit;
      return;
    }
    fold();
    cur_pulse_ = r.pulse;
    cur_mask_ = bit;
    has_current_ = true;
  }

  void add(std::span<const EventRecord> records) {
    for (const auto& r : records) add(r);
  }

  CoincidenceTally finish(uint64_t n_pulses, double rep_rate_hz) {
    fold();
    has_current_ = false;
    t_.n_pulses = n_pulses;
    t_.rep_rate_hz = rep_rate_hz;
    return t_;
  }

 private:
  void fold() {
    if (!has_current_) return;
    const bool m1 = cur_mask_ & 1, m2 = cur_mask_ & 2, m3 = cur_mask_ & 4;
    t_.c1 += m1;
    t_.c2 += m2;
    t_.c3 += m3;
    t_.c12 += m1 && m2;
    t_.c13 += m1 && m3;
    t_.c23 += m2 && m3;
    t_.c123 += m1 && m2 && m3;
    if (m1 && m2) t_.delay_hist[size_t(t_.window)]++;

    if (m1 || m2) {
      const uint64_t W = uint64_t(t_.window);
      while (!recent_.empty() && recent_.front().pulse + W < cur_pulse_) recent_.pop_front();
      for (const auto& past : recent_) {
        int d = int(cur_pulse_ - past.pulse);  // 1..W
        if (m2 && (past.mask & 1)) t_.delay_hist[size_t(t_.window + d)]++;  // D1 then, D2 now
        if (m1 && (past.mask & 2)) t_.delay_hist[size_t(t_.window - d)]++;  // D2 then, D1 now
      }
      recent_.push_back({cur_pulse_, uint8_t(cur_mask_ & 3)});
    }
  }

  struct Past {
    uint64_t pulse;
    uint8_t mask;
  };

  CoincidenceTally t_;
  std::deque<Past> recent_;
  uint64_t cur_pulse_ = 0;
  uint8_t cur_mask_ = 0;
  bool has_current_ = false;
};

inline CoincidenceTally tally(const EventStream& stream, int window = 10) {
  TallyBuilder b(window);
  b.add(std::span<const EventRecord>(stream.records));
  return b.finish(stream.info.n_pulses, stream.info.rep_rate_hz);
}

}  // namespace hsps
