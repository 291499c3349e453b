#pragma once

// Pulse-by-pulse Monte Carlo of the pair source and detection chain.
//
// Per pulse: draw the pair number n from the configured law; each signal
// photon survives collection with probability eta_s, each idler photon with
// eta_i * twin_survival (the filter-mismatch factor removes coincidences, not
// heralds); detected noise photons arrive Poisson(nu*eta) per channel (the
// per-pulse noise mean is defined pre-collection, so thinning is applied
// analytically); dark counts are a per-pulse Bernoulli d/R per detector. A
// threshold detector clicks iff at least one photon or dark event lands. In
// the three-detector topology each idler-arm photon routes 50:50 to D2/D3.
//
// All randomness is keyed by (seed, pulse, draw purpose), so the output is a
// pure function of the configuration: block decomposition and thread count
// cannot change a single bit of the stream.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hsps/digest.hpp"
#include "hsps/errors.hpp"
#include "hsps/event_stream.hpp"
#include "hsps/rng.hpp"
#include "hsps/source_model.hpp"

namespace hsps {

enum class Topology { two_detector, three_detector };

inline const char* to_string(Topology t) {
  return t == Topology::two_detector ? "two_detector" : "three_detector";
}

struct RunConfig {
  SourceModel model;
  uint64_t n_pulses = 0;
  uint64_t seed = 1;
  Topology topology = Topology::two_detector;
  uint64_t block_size = 1u << 20;
  uint64_t dead_time_slots = 0;  // 0 = no detector dead time
  unsigned threads = 0;          // 0 = hardware concurrency

  void validate() const {
    model.validate();
    if (n_pulses < 1) throw parameter_domain_error("n_pulses: must be >= 1");
    if (n_pulses > (uint64_t(1) << 62)) throw run_size_error("n_pulses: exceeds 2^62 pulse slots");
    if (block_size < 1) throw parameter_domain_error("block_size: must be >= 1");
  }
};

// Canonical text of everything that determines the stream bit-for-bit
// (thread count excluded: it never affects output).
inline std::string run_config_canonical_text(const RunConfig& cfg) {
  const SourceModel& m = cfg.model;
  std::string s;
  auto add = [&s](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
  auto fd = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  add("schema", "1");
  add("rep_rate_hz", fd(m.rep_rate_hz));
  add("pair_law", to_string(m.pair_dist.kind()));
  add("mu", fd(m.pair_dist.mu()));
  if (m.pair_dist.kind() == PairLaw::explicit_table) {
    std::string t;
    for (double p : m.pair_dist.table()) {
      if (!t.empty()) t += ",";
      t += fd(p);
    }
    add("pair_table", t);
  }
  add("eta_signal", fd(m.eta_signal));
  add("eta_idler", fd(m.eta_idler));
  add("noise_signal", fd(m.noise_signal));
  add("noise_idler", fd(m.noise_idler));
  add("dark_signal_hz", fd(m.dark_signal_hz));
  add("dark_idler_hz", fd(m.dark_idler_hz));
  add("twin_survival", fd(m.twin_survival));
  if (m.pump_law) {
    add("pump_gamma", fd(m.pump_law->gamma));
    add("pump_peak_power_w", fd(m.pump_law->peak_power_w));
    add("pump_eff_length_m", fd(m.pump_law->eff_length_m));
    add("pump_calib_k", fd(m.pump_law->calib_k));
  }
  add("pulse_width_s", fd(m.pulse_width_s));
  add("n_pulses", std::to_string(cfg.n_pulses));
  add("seed", std::to_string(cfg.seed));
  add("topology", to_string(cfg.topology));
  add("block_size", std::to_string(cfg.block_size));
  add("dead_time_slots", std::to_string(cfg.dead_time_slots));
  return s;
}

inline std::string run_config_digest(const RunConfig& cfg) {
  return digest_hex(run_config_canonical_text(cfg));
}

namespace detail {

struct SimParams {
  PairDistribution dist = PairDistribution::poissonian(0.0);
  bool has_pairs = false;
  double eta_signal = 0.0;
  double p_idler = 0.0;       // eta_idler * twin_survival, per idler photon
  double p_idler_half = 0.0;  // 50:50 split arm
  double noise_mean_signal = 0.0;  // nu_s * eta_s, detected noise mean
  double noise_mean_idler = 0.0;
  double p_dark_s = 0.0;  // d/R per pulse slot
  double p_dark_i = 0.0;

  explicit SimParams(const SourceModel& m)
      : dist(m.pair_dist),
        eta_signal(m.eta_signal),
        p_idler(m.eta_idler * m.twin_survival),
        p_idler_half(0.5 * m.eta_idler * m.twin_survival),
        noise_mean_signal(m.noise_signal * m.eta_signal),
        noise_mean_idler(m.noise_idler * m.eta_idler),
        p_dark_s(m.dark_signal_hz / m.rep_rate_hz),
        p_dark_i(m.dark_idler_hz / m.rep_rate_hz) {
    has_pairs = dist.mu() > 0.0;
    if (dist.kind() == PairLaw::explicit_table)
      has_pairs = has_pairs || dist.table().size() > 1;
  }
};

struct PulseClicks {
  bool d1 = false, d2 = false, d3 = false;
};

inline PulseClicks simulate_pulse(const SimParams& sp, uint64_t seed, uint64_t pulse,
                                  Topology topo) {
  PulseClicks c;
  if (sp.has_pairs) {
    KeyedStream pair_rng(seed, pulse, Draw::pair_count);
    uint64_t n = sample_pair_count(sp.dist, pair_rng);
    if (n > 0) {
      if (sp.eta_signal > 0.0) {
        KeyedStream thin(seed, pulse, Draw::signal_thin);
        for (uint64_t j = 0; j < n && !c.d1; ++j) c.d1 = thin.bernoulli(sp.eta_signal);
      }
      if (sp.p_idler > 0.0) {
        KeyedStream thin(seed, pulse, Draw::idler_thin);
        if (topo == Topology::two_detector) {
          for (uint64_t j = 0; j < n && !c.d2; ++j) c.d2 = thin.bernoulli(sp.p_idler);
        } else {
          for (uint64_t j = 0; j < n && !(c.d2 && c.d3); ++j) {
            double u = thin.next_double();
            if (u < sp.p_idler_half) c.d2 = true;
            else if (u < sp.p_idler) c.d3 = true;
          }
        }
      }
    }
  }
  if (sp.noise_mean_signal > 0.0 && !c.d1) {
    KeyedStream noise(seed, pulse, Draw::noise_signal);
    c.d1 = noise.poisson(sp.noise_mean_signal) > 0;
  }
  if (sp.noise_mean_idler > 0.0) {
    if (topo == Topology::two_detector) {
      if (!c.d2) {
        KeyedStream noise(seed, pulse, Draw::noise_idler);
        c.d2 = noise.poisson(sp.noise_mean_idler) > 0;
      }
    } else if (!(c.d2 && c.d3)) {
      KeyedStream noise(seed, pulse, Draw::noise_idler);
      uint64_t k = noise.poisson(sp.noise_mean_idler);
      for (uint64_t j = 0; j < k && !(c.d2 && c.d3); ++j) {
        if (noise.bernoulli(0.5)) c.d2 = true;
        else c.d3 = true;
      }
    }
  }
  if (sp.p_dark_s > 0.0 && !c.d1) {
    KeyedStream dark(seed, pulse, Draw::dark_d1);
    c.d1 = dark.bernoulli(sp.p_dark_s);
  }
  if (sp.p_dark_i > 0.0) {
    if (!c.d2) {
      KeyedStream dark(seed, pulse, Draw::dark_d2);
      c.d2 = dark.bernoulli(sp.p_dark_i);
    }
    if (topo == Topology::three_detector && !c.d3) {
      KeyedStream dark(seed, pulse, Draw::dark_d3);
      c.d3 = dark.bernoulli(sp.p_dark_i);
    }
  }
  return c;
}

inline void generate_block(const SimParams& sp, const RunConfig& cfg, uint64_t first,
                           uint64_t last, std::vector<EventRecord>& out) {
  out.clear();
  for (uint64_t p = first; p < last; ++p) {
    PulseClicks c = simulate_pulse(sp, cfg.seed, p, cfg.topology);
    if (c.d1) out.push_back({p, Channel::D1});
    if (c.d2) out.push_back({p, Channel::D2});
    if (c.d3) out.push_back({p, Channel::D3});
  }
}

// Applies detector dead time during the in-order pass: a click blanks its
// channel for the next dead_time_slots pulse slots.
class DeadTimeFilter {
 public:
  explicit DeadTimeFilter(uint64_t dead_slots) : dead_(dead_slots) {}

  bool accept(const EventRecord& r) {
    if (dead_ == 0) return true;
    auto& next_ok = next_ok_[uint8_t(r.channel) - 1];
    if (r.pulse < next_ok) return false;
    next_ok = r.pulse + dead_ + 1;
    return true;
  }

 private:
  uint64_t dead_;
  uint64_t next_ok_[3] = {0, 0, 0};
};

}  // namespace detail

// Streams the simulated records block by block, in block order, to `consume`.
// Safe to call concurrently; each invocation owns its workers.
inline void simulate_blocks(const RunConfig& cfg,
                            const std::function<void(std::span<const EventRecord>)>& consume) {
  cfg.validate();
  const detail::SimParams sp(cfg.model);
  const uint64_t n_blocks = (cfg.n_pulses + cfg.block_size - 1) / cfg.block_size;
  unsigned threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  if (threads < 1) threads = 1;

  detail::DeadTimeFilter dead(cfg.dead_time_slots);
  auto deliver = [&](std::vector<EventRecord>& block) {
    if (cfg.dead_time_slots > 0) {
      size_t kept = 0;
      for (size_t i = 0; i < block.size(); ++i)
        if (dead.accept(block[i])) block[kept++] = block[i];
      block.resize(kept);
    }
    consume(std::span<const EventRecord>(block));
  };

  if (threads == 1 || n_blocks == 1) {
    std::vector<EventRecord> block;
    for (uint64_t b = 0; b < n_blocks; ++b) {
      uint64_t first = b * cfg.block_size;
      uint64_t last = std::min(cfg.n_pulses, first + cfg.block_size);
      detail::generate_block(sp, cfg, first, last, block);
      deliver(block);
    }
    return;
  }

  std::vector<std::vector<EventRecord>> done(n_blocks);
  std::vector<char> ready(n_blocks, 0);
  std::atomic<uint64_t> next_block{0};
  std::mutex mtx;
  std::condition_variable cv;

  auto worker = [&]() {
    for (;;) {
      uint64_t b = next_block.fetch_add(1);
      if (b >= n_blocks) return;
      uint64_t first = b * cfg.block_size;
      uint64_t last = std::min(cfg.n_pulses, first + cfg.block_size);
      std::vector<EventRecord> block;
      detail::generate_block(sp, cfg, first, last, block);
      {
        std::lock_guard<std::mutex> lk(mtx);
        done[b] = std::move(block);
        ready[b] = 1;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);

  for (uint64_t b = 0; b < n_blocks; ++b) {
    std::unique_lock<std::mutex> lk(mtx);
    cv.wait(lk, [&] { return ready[b] != 0; });
    std::vector<EventRecord> block = std::move(done[b]);
    lk.unlock();
    deliver(block);
  }
  for (auto& t : pool) t.join();
}

inline EventStream simulate(const RunConfig& cfg) {
  EventStream stream;
  stream.info.seed = cfg.seed;
  stream.info.n_pulses = cfg.n_pulses;
  stream.info.rep_rate_hz = cfg.model.rep_rate_hz;
  stream.info.topology = to_string(cfg.topology);
  stream.info.config_digest = run_config_digest(cfg);
  simulate_blocks(cfg, [&](std::span<const EventRecord> block) {
    stream.records.insert(stream.records.end(), block.begin(), block.end());
  });
  return stream;
}

}  // namespace hsps
