#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bumpwatch/error.hpp"

namespace bumpwatch {

// Device axes: x lateral (positive to the right), y forward, z up.
enum class Channel : std::size_t { Ax = 0, Ay, Az, Rx, Ry, Rz };

inline constexpr std::size_t kChannelCount = 6;
inline constexpr std::array<Channel, kChannelCount> kAllChannels = {
    Channel::Ax, Channel::Ay, Channel::Az, Channel::Rx, Channel::Ry, Channel::Rz};

constexpr std::size_t index_of(Channel c) noexcept { return static_cast<std::size_t>(c); }

inline std::string_view channel_name(Channel c) {
  static constexpr std::array<std::string_view, kChannelCount> names = {"ax", "ay", "az",
                                                                        "rx", "ry", "rz"};
  return names[index_of(c)];
}

inline Channel parse_channel(std::string_view s) {
  for (Channel c : kAllChannels)
    if (channel_name(c) == s) return c;
  throw InputError("unknown channel '" + std::string(s) + "'");
}

// One timestamped reading. Acceleration in m/s^2, angular velocity in rad/s.
struct SensorSample {
  double t_ms = 0.0;
  double ax = 0.0, ay = 0.0, az = 0.0;
  double rx = 0.0, ry = 0.0, rz = 0.0;

  double& operator[](Channel c) noexcept {
    switch (c) {
      case Channel::Ax: return ax;
      case Channel::Ay: return ay;
      case Channel::Az: return az;
      case Channel::Rx: return rx;
      case Channel::Ry: return ry;
      default: return rz;
    }
  }
  double operator[](Channel c) const noexcept { return const_cast<SensorSample&>(*this)[c]; }

  bool finite() const noexcept {
    for (Channel c : kAllChannels)
      if (!std::isfinite((*this)[c])) return false;
    return std::isfinite(t_ms);
  }

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

// Largest accepted spacing between consecutive samples, as a multiple of the nominal one.
inline constexpr double kSpacingTolerance = 0.5;

inline double nominal_spacing_ms(double rate_hz) { return 1000.0 / rate_hz; }

// Validated, immutable sample sequence. Build with make_stream().
class SampleStream {
 public:
  SampleStream() = default;

  std::span<const SensorSample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const SensorSample& operator[](std::size_t i) const { return samples_[i]; }
  double rate_hz() const noexcept { return rate_hz_; }

  std::vector<double> channel(Channel c) const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s[c]);
    return out;
  }

  friend bool operator==(const SampleStream&, const SampleStream&) = default;

 private:
  friend SampleStream make_stream(std::vector<SensorSample>, double);
  friend SampleStream make_unchecked_stream(std::vector<SensorSample>, double);

  std::vector<SensorSample> samples_;
  double rate_hz_ = 100.0;
};

inline SampleStream make_unchecked_stream(std::vector<SensorSample> samples, double rate_hz) {
  SampleStream s;
  s.samples_ = std::move(samples);
  s.rate_hz_ = rate_hz;
  return s;
}

inline SampleStream make_stream(std::vector<SensorSample> samples, double rate_hz) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw InputError("rate_hz must be positive");
  if (samples.empty()) throw InputError("stream must contain at least one sample");
  const double nominal = nominal_spacing_ms(rate_hz);
  const double lo = nominal * (1.0 - kSpacingTolerance);
  const double hi = nominal * (1.0 + kSpacingTolerance);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!s.finite()) throw InputError("sample " + std::to_string(i) + " has a non-finite value");
    if (s.t_ms < 0.0) throw InputError("sample " + std::to_string(i) + " has negative timestamp");
    if (i == 0) continue;
    const double dt = s.t_ms - samples[i - 1].t_ms;
    if (dt <= 0.0)
      throw OrderingError("timestamps not strictly increasing at sample " + std::to_string(i));
    if (dt < lo || dt > hi)
      throw RateError("spacing " + std::to_string(dt) + " ms at sample " + std::to_string(i) +
                      " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "] ms");
  }
  return make_unchecked_stream(std::move(samples), rate_hz);
}

// ---- Segment taxonomy -----------------------------------------------------

enum class SegmentId : std::size_t { F = 0, B, L, R, FL, FR, BL, BR, FLB, FRB, BLF, BRF };
enum class Category { Straight, Diagonal, ReversedDiagonal };

inline constexpr std::size_t kSegmentCount = 12;

constexpr std::size_t index_of(SegmentId s) noexcept { return static_cast<std::size_t>(s); }

struct SegmentClass {
  SegmentId id;
  Category category;
  int approach_angle_deg;

  friend bool operator==(const SegmentClass&, const SegmentClass&) = default;
};

constexpr Category category_of(SegmentId id) noexcept {
  const auto i = index_of(id);
  if (i < 4) return Category::Straight;
  if (i < 8) return Category::Diagonal;
  return Category::ReversedDiagonal;
}

constexpr int approach_angle_of(Category c) noexcept {
  switch (c) {
    case Category::Straight: return 90;
    case Category::Diagonal: return 45;
    default: return 135;
  }
}

// All twelve classes in catalog order; this order is also the classifier tie-break.
inline const std::array<SegmentClass, kSegmentCount>& segment_catalog() {
  static const std::array<SegmentClass, kSegmentCount> catalog = [] {
    std::array<SegmentClass, kSegmentCount> out{};
    for (std::size_t i = 0; i < kSegmentCount; ++i) {
      const auto id = static_cast<SegmentId>(i);
      out[i] = {id, category_of(id), approach_angle_of(category_of(id))};
    }
    return out;
  }();
  return catalog;
}

inline SegmentClass segment_class(SegmentId id) { return segment_catalog()[index_of(id)]; }

inline std::string_view segment_name(SegmentId id) {
  static constexpr std::array<std::string_view, kSegmentCount> names = {
      "F", "B", "L", "R", "FL", "FR", "BL", "BR", "FLB", "FRB", "BLF", "BRF"};
  return names[index_of(id)];
}

inline std::optional<SegmentId> try_parse_segment(std::string_view s) {
  for (std::size_t i = 0; i < kSegmentCount; ++i)
    if (segment_name(static_cast<SegmentId>(i)) == s) return static_cast<SegmentId>(i);
  return std::nullopt;
}

inline SegmentId parse_segment(std::string_view s) {
  if (auto id = try_parse_segment(s)) return *id;
  throw InputError("unknown segment '" + std::string(s) + "'");
}

inline std::string_view category_name(Category c) {
  switch (c) {
    case Category::Straight: return "Straight";
    case Category::Diagonal: return "Diagonal";
    default: return "ReversedDiagonal";
  }
}

// The diagonal class pushed on the same corner as a reversed-diagonal one, and vice versa.
constexpr SegmentId corner_partner(SegmentId id) noexcept {
  const auto i = index_of(id);
  if (i >= 4 && i < 8) return static_cast<SegmentId>(i + 4);
  if (i >= 8) return static_cast<SegmentId>(i - 4);
  return id;
}

// ---- Event frames ---------------------------------------------------------

// Frame layout in samples. 500 ms window with 50 ms of pre-padding at 100 Hz.
struct FrameGeometry {
  std::size_t frame_len = 50;
  std::size_t padding = 5;

  static FrameGeometry from_ms(double rate_hz, double frame_ms, double padding_ms) {
    const auto len = static_cast<std::size_t>(std::llround(frame_ms * rate_hz / 1000.0));
    const auto pad = static_cast<std::size_t>(std::llround(padding_ms * rate_hz / 1000.0));
    if (len == 0) throw ConfigError("frame length must cover at least one sample");
    if (pad >= len) throw ConfigError("padding must be shorter than the frame");
    return {len, pad};
  }

  friend bool operator==(const FrameGeometry&, const FrameGeometry&) = default;
};

struct EventFrame {
  std::array<std::vector<double>, kChannelCount> channels;
  std::size_t peak_index = 5;
  double t_start = 0.0;
  std::optional<SegmentId> label;
  // Set when part of the window fell outside the stream and was zero-filled.
  bool padded = false;

  std::size_t length() const noexcept { return channels[0].size(); }
  std::span<const double> channel(Channel c) const noexcept { return channels[index_of(c)]; }

  bool well_formed() const noexcept {
    for (const auto& ch : channels)
      if (ch.size() != channels[0].size()) return false;
    return peak_index < length();
  }

  friend bool operator==(const EventFrame&, const EventFrame&) = default;
};

}  // namespace bumpwatch
