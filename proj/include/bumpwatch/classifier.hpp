#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "bumpwatch/dtw.hpp"
#include "bumpwatch/templates.hpp"

namespace bumpwatch {

enum class RatioMode {
  // Each segment's distance divided by the largest distance any segment scored on
  // that channel.
  AcrossSegments,
  // Multi-template only: nearest over farthest template within the segment's own set.
  // Merged models fall back to AcrossSegments.
  WithinSet,
};

struct ClassifierOptions {
  RatioMode ratio_mode = RatioMode::AcrossSegments;
  // [category][channel] multiplier on a segment's ratio before the norm.
  std::array<std::array<double, kChannelCount>, 3> weights = [] {
    std::array<std::array<double, kChannelCount>, 3> w{};
    for (auto& row : w) row.fill(1.0);
    return w;
  }();
  DtwConfig dtw{};
};

struct ClassificationResult {
  SegmentId winner = SegmentId::F;
  Approach approach = Approach::MedianTemplate;
  std::vector<Channel> channels;
  std::array<double, kSegmentCount> norms{};
  // ratios[segment][k] belongs to channels[k].
  std::array<std::vector<double>, kSegmentCount> ratios{};
  double elapsed_ms = 0.0;
  std::vector<std::string> warnings;
};

// Nearest-template DTW distance of one frame channel to one segment.
inline double segment_channel_distance(const EventFrame& frame, const SegmentModel& model,
                                       SegmentId segment, Channel c, const DtwConfig& dtw = {}) {
  if (!model.has_channel(c))
    throw ConfigError("channel " + std::string(channel_name(c)) + " is not part of a " +
                      std::string(approach_name(model.approach())) + " model");
  const auto ts = model.templates(segment, c);
  if (ts.empty()) throw ConfigError("model has no templates for this segment and channel");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : ts) best = std::min(best, dtw_distance(frame.channel(c), t.values, dtw));
  return best;
}

inline ClassificationResult classify(const EventFrame& frame, const SegmentModel& model,
                                     const ClassifierOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (frame.length() != model.frame_len() || !frame.well_formed())
    throw InputError("frame length " + std::to_string(frame.length()) +
                     " does not match model frame length " + std::to_string(model.frame_len()));

  ClassificationResult r;
  r.approach = model.approach();
  r.channels = model.channels();
  const bool within = opt.ratio_mode == RatioMode::WithinSet &&
                      model.approach() == Approach::MultiTemplate;

  for (auto& v : r.ratios) v.resize(r.channels.size());
  for (std::size_t k = 0; k < r.channels.size(); ++k) {
    const Channel c = r.channels[k];
    std::array<double, kSegmentCount> d{};
    for (std::size_t s = 0; s < kSegmentCount; ++s) {
      const auto seg = static_cast<SegmentId>(s);
      if (within) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& t : model.templates(seg, c)) {
          const double v = dtw_distance(frame.channel(c), t.values, opt.dtw);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        r.ratios[s][k] = hi > 0.0 ? lo / hi : 0.0;
      } else {
        d[s] = segment_channel_distance(frame, model, seg, c, opt.dtw);
      }
    }
    if (within) continue;
    const double worst = *std::max_element(d.begin(), d.end());
    if (worst == 0.0)
      r.warnings.push_back("all distances zero on " + std::string(channel_name(c)) +
                           "; channel ignored");
    for (std::size_t s = 0; s < kSegmentCount; ++s) r.ratios[s][k] = worst > 0.0 ? d[s] / worst : 0.0;
  }

  for (std::size_t s = 0; s < kSegmentCount; ++s) {
    const auto& w = opt.weights[static_cast<std::size_t>(category_of(static_cast<SegmentId>(s)))];
    double sq = 0.0;
    for (std::size_t k = 0; k < r.channels.size(); ++k) {
      const double v = w[index_of(r.channels[k])] * r.ratios[s][k];
      sq += v * v;
    }
    r.norms[s] = std::sqrt(sq);
  }
  // First minimum in catalog order.
  r.winner = static_cast<SegmentId>(std::min_element(r.norms.begin(), r.norms.end()) -
                                    r.norms.begin());
  r.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace bumpwatch
