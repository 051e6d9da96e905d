#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bumpwatch/sensor.hpp"

namespace bumpwatch {

// Running extrema of one acceleration axis. pos_val/neg_val sit at 0 while idle.
struct PeakState {
  double pos_val = 0.0;
  double neg_val = 0.0;
  double pos_thresh = 1.0;
  double neg_thresh = -1.0;

  void reset() noexcept { pos_val = neg_val = 0.0; }
  friend bool operator==(const PeakState&, const PeakState&) = default;
};

// One step of the peak state machine. A peak is the first decline after the value
// crossed a threshold, or the fall back inside the threshold band; it marks the entry
// point of a collision. Both extrema return to 0 on a peak.
inline std::pair<PeakState, bool> detect_peak_step(PeakState state, double value) {
  if (!std::isfinite(value)) throw InputError("non-finite acceleration value");
  bool is_peak = false;

  if (value >= state.pos_thresh) {
    if (value >= state.pos_val)
      state.pos_val = value;
    else
      is_peak = true;
  } else if (state.pos_val > 0.0) {
    is_peak = true;
  }

  if (value <= state.neg_thresh) {
    if (value <= state.neg_val)
      state.neg_val = value;
    else
      is_peak = true;
  } else if (state.neg_val < 0.0) {
    is_peak = true;
  }

  if (is_peak) state.reset();
  return {state, is_peak};
}

enum class XTracking {
  // x is only stepped on samples where y peaked.
  Nested,
  // x is stepped on every sample; an event still needs both to peak on the same sample.
  Parallel,
};

struct DetectorConfig {
  double pos_thresh = 1.0;
  double neg_thresh = -1.0;
  FrameGeometry geometry{};
  double rate_hz = 100.0;
  XTracking x_tracking = XTracking::Nested;

  PeakState fresh_state() const {
    if (!(pos_thresh > 0.0) || !(neg_thresh < 0.0))
      throw ConfigError("thresholds must satisfy pos > 0 > neg");
    return {0.0, 0.0, pos_thresh, neg_thresh};
  }
};

struct DetectionEvent {
  std::size_t entry_index = 0;
  double entry_t_ms = 0.0;
  EventFrame frame;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

// Incremental detector: feed samples one at a time, collect completed frames. The frame
// around an entry point is emitted once its last sample has arrived, so emission lags
// the entry by frame_len - padding - 1 samples.
class EventDetector {
 public:
  explicit EventDetector(DetectorConfig cfg = {})
      : cfg_(cfg), y_(cfg_.fresh_state()), x_(cfg_.fresh_state()) {}

  std::optional<DetectionEvent> push(const SensorSample& s) {
    const std::size_t idx = seen_++;
    std::optional<DetectionEvent> done;

    if (pending_) {
      append(*pending_, s);
      if (pending_->frame.length() == cfg_.geometry.frame_len) done = take_pending();
    }

    if (idx >= resume_at_ && scan(s)) {
      y_.reset();
      x_.reset();
      resume_at_ = idx + cfg_.geometry.frame_len;
      start_frame(idx, s);
      if (pending_->frame.length() == cfg_.geometry.frame_len) done = take_pending();
    }

    history_.push_back(s);
    while (history_.size() > cfg_.geometry.padding) history_.pop_front();
    return done;
  }

  // Flushes an in-progress frame, zero-filling the samples that never arrived.
  std::optional<DetectionEvent> finish() {
    if (!pending_) return std::nullopt;
    auto& f = pending_->frame;
    while (f.length() < cfg_.geometry.frame_len) {
      for (auto& ch : f.channels) ch.push_back(0.0);
      f.padded = true;
    }
    return take_pending();
  }

  // Drops any half-observed excursion, e.g. after a transport gap.
  void reset_peaks() noexcept {
    y_.reset();
    x_.reset();
  }

  std::size_t samples_seen() const noexcept { return seen_; }
  const DetectorConfig& config() const noexcept { return cfg_; }

 private:
  bool scan(const SensorSample& s) {
    bool y_peak = false, x_peak = false;
    std::tie(y_, y_peak) = detect_peak_step(y_, s.ay);
    if (cfg_.x_tracking == XTracking::Parallel) {
      std::tie(x_, x_peak) = detect_peak_step(x_, s.ax);
    } else if (y_peak) {
      std::tie(x_, x_peak) = detect_peak_step(x_, s.ax);
    }
    return y_peak && x_peak;
  }

  static void append(DetectionEvent& e, const SensorSample& s) {
    for (Channel c : kAllChannels) e.frame.channels[index_of(c)].push_back(s[c]);
  }

  void start_frame(std::size_t idx, const SensorSample& s) {
    const auto& g = cfg_.geometry;
    DetectionEvent e;
    e.entry_index = idx;
    e.entry_t_ms = s.t_ms;
    e.frame.peak_index = g.padding;
    for (auto& ch : e.frame.channels) ch.reserve(g.frame_len);

    const std::size_t missing = g.padding - history_.size();
    for (std::size_t i = 0; i < missing; ++i)
      for (auto& ch : e.frame.channels) ch.push_back(0.0);
    e.frame.padded = missing > 0;
    for (const auto& h : history_) append(e, h);
    append(e, s);

    const double first_t = history_.empty() ? s.t_ms : history_.front().t_ms;
    e.frame.t_start = first_t - static_cast<double>(missing) * nominal_spacing_ms(cfg_.rate_hz);
    pending_ = std::move(e);
  }

  DetectionEvent take_pending() {
    DetectionEvent e = std::move(*pending_);
    pending_.reset();
    return e;
  }

  DetectorConfig cfg_;
  PeakState y_, x_;
  std::deque<SensorSample> history_;
  std::optional<DetectionEvent> pending_;
  std::size_t seen_ = 0;
  std::size_t resume_at_ = 0;
};

inline std::vector<DetectionEvent> detect_events(const SampleStream& stream,
                                                 const DetectorConfig& cfg = {},
                                                 std::vector<std::string>* warnings = nullptr) {
  std::vector<DetectionEvent> out;
  if (stream.size() < cfg.geometry.frame_len) {
    if (warnings) warnings->push_back("stream shorter than one frame; no events extracted");
    return out;
  }
  EventDetector det(cfg);
  for (const auto& s : stream.samples())
    if (auto e = det.push(s)) out.push_back(std::move(*e));
  if (auto e = det.finish()) {
    if (warnings) warnings->push_back("last frame ran past the end of the stream; zero-padded");
    out.push_back(std::move(*e));
  }
  return out;
}

}  // namespace bumpwatch
