#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bumpwatch/detector.hpp"
#include "bumpwatch/synth.hpp"

namespace bumpwatch {

inline constexpr std::string_view kRecordingHeader = "t_ms,ax,ay,az,rx,ry,rz";
inline constexpr std::string_view kLabelHeader = "t_ms,segment";

// Shortest decimal that parses back to the same double.
inline void append_number(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// ---- One sample per line: recordings and UDP datagrams share the row format -------

inline std::string format_sample(const SensorSample& s) {
  std::string out;
  out.reserve(96);
  append_number(out, s.t_ms);
  for (Channel c : kAllChannels) {
    out.push_back(',');
    append_number(out, s[c]);
  }
  return out;
}

inline std::optional<SensorSample> parse_sample(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  const auto f = split_fields(line);
  if (f.size() != 7) return std::nullopt;
  SensorSample s;
  auto t = parse_number(f[0]);
  if (!t) return std::nullopt;
  s.t_ms = *t;
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    auto v = parse_number(f[i + 1]);
    if (!v) return std::nullopt;
    s[kAllChannels[i]] = *v;
  }
  return s;
}

inline std::string format_datagram(const SensorSample& s) { return format_sample(s) + '\n'; }
inline std::optional<SensorSample> parse_datagram(std::string_view d) { return parse_sample(d); }

// ---- Recording files ---------------------------------------------------------------

inline void write_recording(std::ostream& os, const SampleStream& stream) {
  os << kRecordingHeader << '\n';
  for (const auto& s : stream.samples()) os << format_sample(s) << '\n';
}

inline SampleStream read_recording(std::istream& is, double rate_hz = 100.0) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw ParseError("empty recording", lineno);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordingHeader)
    throw ParseError("expected header '" + std::string(kRecordingHeader) + "'", lineno);
  std::vector<SensorSample> samples;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto s = parse_sample(line);
    if (!s) throw ParseError("malformed row (need 7 finite comma-separated numbers)", lineno);
    samples.push_back(*s);
  }
  return make_stream(std::move(samples), rate_hz);
}

inline void write_labels(std::ostream& os, const std::vector<GroundTruth>& labels) {
  os << kLabelHeader << '\n';
  for (const auto& l : labels) {
    std::string row;
    append_number(row, l.t_ms);
    os << row << ',' << segment_name(l.segment) << '\n';
  }
}

inline std::vector<GroundTruth> read_labels(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw ParseError("empty label file", lineno);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLabelHeader)
    throw ParseError("expected header '" + std::string(kLabelHeader) + "'", lineno);
  std::vector<GroundTruth> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    auto t = f.size() == 2 ? parse_number(f[0]) : std::nullopt;
    auto seg = f.size() == 2 ? try_parse_segment(f[1]) : std::nullopt;
    if (!t || !seg) throw ParseError("malformed label row", lineno);
    out.push_back({*t, *seg});
  }
  return out;
}

// `<recording>.labels.csv` next to the recording.
inline std::filesystem::path label_sidecar_path(const std::filesystem::path& recording) {
  auto p = recording;
  p.replace_extension(".labels.csv");
  return p;
}

struct LoadedRecording {
  SampleStream stream;
  std::optional<std::vector<GroundTruth>> labels;
};

inline LoadedRecording read_recording(const std::filesystem::path& path, double rate_hz = 100.0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open recording " + path.string());
  LoadedRecording out{read_recording(in, rate_hz), std::nullopt};
  const auto side = label_sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream li(side);
    out.labels = read_labels(li);
  }
  return out;
}

inline void write_recording(const std::filesystem::path& path, const SampleStream& stream,
                            const std::vector<GroundTruth>* labels = nullptr) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_recording(out, stream);
  if (labels) {
    std::ofstream lo(label_sidecar_path(path));
    write_labels(lo, *labels);
  }
}

// Labels each event with the planted impact whose onset most closely precedes its
// entry point within `window_ms`. Each impact labels at most one event.
inline std::size_t attach_labels(std::vector<DetectionEvent>& events,
                                 const std::vector<GroundTruth>& truth, double window_ms = 500.0) {
  std::vector<bool> used(truth.size(), false);
  std::size_t matched = 0;
  for (auto& e : events) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (used[i]) continue;
      const double lag = e.entry_t_ms - truth[i].t_ms;
      if (lag < 0.0 || lag > window_ms) continue;
      if (!best || truth[i].t_ms > truth[*best].t_ms) best = i;
    }
    if (best) {
      used[*best] = true;
      e.frame.label = truth[*best].segment;
      ++matched;
    }
  }
  return matched;
}

}  // namespace bumpwatch
