#pragma once

// Event-file formats.
//
// Text (line oriented):
//   # hsps-events schema=1
//   # seed=42
//   # n_pulses=10000
//   # rep_rate_hz=2500000000
//   # topology=two_detector
//   # config_digest=0123456789abcdef
//   5,D1
//   5,D2
// Data lines are "pulse_index,channel" with channel in {D1,D2,D3} and strictly
// non-decreasing pulse_index.
//
// Binary: magic "HSPSEVT1", u32 header length + header text (same '#' lines),
// u64 record count, then 9-byte records (little-endian u64 pulse, u8 channel).

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "hsps/errors.hpp"
#include "hsps/event_stream.hpp"

namespace hsps {

enum class EventFileFormat { text, binary };

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string header_text(const StreamInfo& info) {
  std::string h;
  h += "# hsps-events schema=1\n";
  h += "# seed=" + std::to_string(info.seed) + "\n";
  h += "# n_pulses=" + std::to_string(info.n_pulses) + "\n";
  h += "# rep_rate_hz=" + format_double(info.rep_rate_hz) + "\n";
  h += "# topology=" + info.topology + "\n";
  h += "# config_digest=" + info.config_digest + "\n";
  return h;
}

inline void parse_header_line(const std::string& line, StreamInfo& info, size_t line_no) {
  std::string body = line.substr(1);
  if (!body.empty() && body.front() == ' ') body.erase(0, 1);
  auto eq = body.find('=');
  if (eq == std::string::npos) return;  // free-form comment, "# hsps-events schema=1"
  std::string key = body.substr(0, eq);
  std::string value = body.substr(eq + 1);
  auto space = key.find(' ');
  if (space != std::string::npos) {  // "hsps-events schema" marker line
    return;
  }
  try {
    if (key == "seed") info.seed = std::stoull(value);
    else if (key == "n_pulses") info.n_pulses = std::stoull(value);
    else if (key == "rep_rate_hz") info.rep_rate_hz = std::stod(value);
    else if (key == "topology") info.topology = value;
    else if (key == "config_digest") info.config_digest = value;
    // unknown header keys are ignored on ingest: forward compatible metadata
  } catch (const std::exception&) {
    throw format_error("event file line " + std::to_string(line_no) + ": bad header value for '" +
                       key + "'");
  }
}

inline Channel parse_channel(const std::string& tok, size_t line_no) {
  if (tok == "D1") return Channel::D1;
  if (tok == "D2") return Channel::D2;
  if (tok == "D3") return Channel::D3;
  throw format_error("event file line " + std::to_string(line_no) + ": invalid channel '" + tok +
                     "'");
}

inline void put_u64_le(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_u32_le(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (unsigned char)(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint64_t get_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw format_error("event file: truncated binary record");
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline uint32_t get_u32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw format_error("event file: truncated binary header");
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

constexpr char kMagic[9] = "HSPSEVT1";

}  // namespace detail

inline void emit_events(const EventStream& stream, std::ostream& sink,
                        EventFileFormat format = EventFileFormat::text) {
  std::string header = detail::header_text(stream.info);
  if (format == EventFileFormat::text) {
    sink << header;
    for (const auto& r : stream.records)
      sink << r.pulse << ',' << to_string(r.channel) << '\n';
  } else {
    sink.write(detail::kMagic, 8);
    detail::put_u32_le(sink, uint32_t(header.size()));
    sink.write(header.data(), std::streamsize(header.size()));
    detail::put_u64_le(sink, stream.records.size());
    for (const auto& r : stream.records) {
      detail::put_u64_le(sink, r.pulse);
      char c = char(uint8_t(r.channel));
      sink.write(&c, 1);
    }
  }
  if (!sink) throw io_error("emit_events: write failure");
}

inline EventStream ingest(std::istream& source, EventFileFormat format) {
  EventStream stream;
  if (format == EventFileFormat::binary) {
    char magic[8];
    source.read(magic, 8);
    if (!source || std::memcmp(magic, detail::kMagic, 8) != 0)
      throw format_error("event file: missing HSPSEVT1 magic");
    uint32_t header_len = detail::get_u32_le(source);
    std::string header(header_len, '\0');
    source.read(header.data(), header_len);
    if (!source) throw format_error("event file: truncated binary header");
    size_t line_no = 1, pos = 0;
    while (pos < header.size()) {
      auto nl = header.find('\n', pos);
      std::string line = header.substr(pos, nl == std::string::npos ? nl : nl - pos);
      if (!line.empty() && line[0] == '#') detail::parse_header_line(line, stream.info, line_no);
      if (nl == std::string::npos) break;
      pos = nl + 1;
      ++line_no;
    }
    uint64_t count = detail::get_u64_le(source);
    stream.records.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
      uint64_t pulse = detail::get_u64_le(source);
      char c;
      source.read(&c, 1);
      if (!source) throw format_error("event file: truncated binary record");
      if (c < 1 || c > 3)
        throw format_error("event file: invalid channel code " + std::to_string(int(c)) +
                           " in record " + std::to_string(i));
      stream.records.push_back({pulse, Channel(uint8_t(c))});
    }
  } else {
    std::string line;
    size_t line_no = 0;
    while (std::getline(source, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') {
        detail::parse_header_line(line, stream.info, line_no);
        continue;
      }
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw format_error("event file line " + std::to_string(line_no) + ": expected 'pulse,channel'");
      uint64_t pulse = 0;
      auto [ptr, ec] = std::from_chars(line.data(), line.data() + comma, pulse);
      if (ec != std::errc() || ptr != line.data() + comma)
        throw format_error("event file line " + std::to_string(line_no) + ": bad pulse index '" +
                           line.substr(0, comma) + "'");
      stream.records.push_back({pulse, detail::parse_channel(line.substr(comma + 1), line_no)});
    }
  }
  stream.validate();
  return stream;
}

// Sniffs the container: binary files start with the HSPSEVT1 magic.
inline EventStream ingest_auto(std::istream& source) {
  int c = source.peek();
  return ingest(source, c == 'H' ? EventFileFormat::binary : EventFileFormat::text);
}

}  // namespace hsps
