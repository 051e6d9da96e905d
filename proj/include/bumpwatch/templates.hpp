#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bumpwatch/dtw.hpp"
#include "bumpwatch/sensor.hpp"

namespace bumpwatch {

enum class Approach { MultiTemplate, MeanTemplate, MedianTemplate };

inline std::string_view approach_name(Approach a) {
  switch (a) {
    case Approach::MultiTemplate: return "multi";
    case Approach::MeanTemplate: return "mean";
    default: return "median";
  }
}

inline Approach parse_approach(std::string_view s) {
  if (s == "multi") return Approach::MultiTemplate;
  if (s == "mean") return Approach::MeanTemplate;
  if (s == "median") return Approach::MedianTemplate;
  throw InputError("unknown approach '" + std::string(s) + "'");
}

// Multi-template models match on acceleration only; merged models add yaw rate.
inline std::vector<Channel> channels_for(Approach a) {
  if (a == Approach::MultiTemplate) return {Channel::Ay, Channel::Ax};
  return {Channel::Ay, Channel::Ax, Channel::Rz};
}

struct Template {
  SegmentId segment = SegmentId::F;
  Channel channel = Channel::Ay;
  std::vector<double> values;
  // "event@<t_start ms>" for a recorded frame, or "merged-mean" / "merged-median".
  std::string provenance;

  friend bool operator==(const Template&, const Template&) = default;
};

class SegmentModel {
 public:
  SegmentModel() = default;
  SegmentModel(Approach approach, bool filtered, std::size_t frame_len)
      : approach_(approach), filtered_(filtered), frame_len_(frame_len) {}

  Approach approach() const noexcept { return approach_; }
  bool filtered() const noexcept { return filtered_; }
  std::size_t frame_len() const noexcept { return frame_len_; }
  std::vector<Channel> channels() const { return channels_for(approach_); }

  bool has_channel(Channel c) const {
    const auto chs = channels();
    return std::find(chs.begin(), chs.end(), c) != chs.end();
  }

  std::span<const Template> templates(SegmentId s, Channel c) const {
    return slots_[index_of(s)][index_of(c)];
  }
  std::vector<Template>& slot(SegmentId s, Channel c) { return slots_[index_of(s)][index_of(c)]; }

  friend bool operator==(const SegmentModel&, const SegmentModel&) = default;

 private:
  Approach approach_ = Approach::MedianTemplate;
  bool filtered_ = false;
  std::size_t frame_len_ = 50;
  std::array<std::array<std::vector<Template>, kChannelCount>, kSegmentCount> slots_{};
};

// ---- Candidate similarity -------------------------------------------------

// Symmetric pairwise DTW distances over one channel of a frame set.
class DistanceMatrix {
 public:
  DistanceMatrix(std::span<const EventFrame> frames, Channel c, const DtwConfig& dtw = {})
      : n_(frames.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double v = dtw_distance(frames[i].channel(c), frames[j].channel(c), dtw);
        d_[i * n_ + j] = d_[j * n_ + i] = v;
      }
  }

  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  std::size_t size() const noexcept { return n_; }

  // Mean distance from `i` to every other member of `subset`.
  double mean_to_others(std::size_t i, std::span<const std::size_t> subset) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j : subset) {
      if (j == i) continue;
      sum += (*this)(i, j);
      ++count;
    }
    return count ? sum / static_cast<double>(count) : 0.0;
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

struct PruneOptions {
  std::uint64_t seed = 42;
  int max_iterations = 100;
};

namespace detail {

inline double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return std::numeric_limits<double>::infinity();
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Two-means on scalars with k-means++ seeding. Returns per-point labels, or an empty
// vector when the data cannot be split (all seeds coincide or a cluster empties).
inline std::vector<int> two_means(std::span<const double> x, const PruneOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::array<double, 2> centers{x[pick(rng)], 0.0};

  std::vector<double> weights(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) weights[i] = (x[i] - centers[0]) * (x[i] - centers[0]);
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) return {};
  std::discrete_distribution<std::size_t> by_weight(weights.begin(), weights.end());
  centers[1] = x[by_weight(rng)];

  std::vector<int> label(x.size(), -1);
  for (int it = 0; it < opt.max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int l = std::abs(x[i] - centers[1]) < std::abs(x[i] - centers[0]) ? 1 : 0;
      if (l != label[i]) {
        label[i] = l;
        changed = true;
      }
    }
    if (!changed) break;
    std::array<double, 2> sum{0.0, 0.0};
    std::array<std::size_t, 2> cnt{0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[label[i]] += x[i];
      ++cnt[label[i]];
    }
    if (cnt[0] == 0 || cnt[1] == 0) return {};
    for (int k = 0; k < 2; ++k) centers[k] = sum[k] / static_cast<double>(cnt[k]);
  }
  return label;
}

}  // namespace detail

// Splits the candidates into two clusters by their mean DTW distance to the others and
// keeps the cluster whose features have the smaller sample standard deviation. A
// single-member cluster has no defined spread and is never kept over a larger one.
// Returns retained indices into `frames`, ascending.
inline std::vector<std::size_t> prune_candidates(std::span<const EventFrame> frames, Channel c,
                                                 const DistanceMatrix& dist,
                                                 const PruneOptions& opt = {},
                                                 std::vector<std::string>* warnings = nullptr) {
  std::vector<std::size_t> all(frames.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (frames.size() < 4) {
    if (warnings)
      warnings->push_back("fewer than 4 candidates on " + std::string(channel_name(c)) +
                          "; pruning skipped");
    return all;
  }

  std::vector<double> feature(frames.size());
  for (std::size_t i : all) feature[i] = dist.mean_to_others(i, all);
  const auto [lo, hi] = std::minmax_element(feature.begin(), feature.end());
  if (*lo == *hi) return all;

  const auto label = detail::two_means(feature, opt);
  if (label.empty()) return all;

  std::array<std::vector<std::size_t>, 2> members;
  std::array<std::vector<double>, 2> values;
  for (std::size_t i : all) {
    members[label[i]].push_back(i);
    values[label[i]].push_back(feature[i]);
  }
  std::array<double, 2> spread{detail::sample_stddev(values[0]), detail::sample_stddev(values[1])};
  auto centre = [&](int k) {
    return std::accumulate(values[k].begin(), values[k].end(), 0.0) /
           static_cast<double>(values[k].size());
  };
  int keep = 0;
  if (spread[1] < spread[0])
    keep = 1;
  else if (spread[1] == spread[0])
    keep = centre(1) < centre(0) ? 1 : (centre(1) == centre(0) && members[1][0] < members[0][0]);
  return members[keep];
}

inline std::vector<std::size_t> prune_candidates(std::span<const EventFrame> frames, Channel c,
                                                 const PruneOptions& opt = {},
                                                 std::vector<std::string>* warnings = nullptr) {
  return prune_candidates(frames, c, DistanceMatrix(frames, c), opt, warnings);
}

// The k members of `candidates` with the lowest mean DTW distance to the rest of the
// set; ties go to the earlier frame. Result is in rank order.
inline std::vector<std::size_t> select_top_k(std::span<const EventFrame> frames,
                                             std::span<const std::size_t> candidates,
                                             const DistanceMatrix& dist, std::size_t k = 10,
                                             std::vector<std::string>* warnings = nullptr) {
  if (candidates.size() < k && warnings)
    warnings->push_back("only " + std::to_string(candidates.size()) + " candidates for top-" +
                        std::to_string(k) + "; taking all");
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(candidates.size());
  for (std::size_t i : candidates) ranked.emplace_back(dist.mean_to_others(i, candidates), i);
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return frames[a.second].t_start < frames[b.second].t_start;
  });
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) out.push_back(ranked[r].second);
  return out;
}

inline std::vector<std::size_t> select_top_k(std::span<const EventFrame> frames,
                                             std::span<const std::size_t> candidates, Channel c,
                                             std::size_t k = 10,
                                             std::vector<std::string>* warnings = nullptr) {
  return select_top_k(frames, candidates, DistanceMatrix(frames, c), k, warnings);
}

// ---- Merging ----------------------------------------------------------------

namespace detail {

inline void check_mergeable(std::span<const Template> ts) {
  if (ts.empty()) throw InputError("merge: no templates");
  for (const auto& t : ts) {
    if (t.values.size() != ts[0].values.size()) throw InputError("merge: length mismatch");
    if (t.segment != ts[0].segment || t.channel != ts[0].channel)
      throw InputError("merge: templates from different segments or channels");
  }
}

}  // namespace detail

inline Template merge_mean(std::span<const Template> ts) {
  detail::check_mergeable(ts);
  Template out{ts[0].segment, ts[0].channel, std::vector<double>(ts[0].values.size()),
               "merged-mean"};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    // Running mean keeps identical inputs exact.
    double m = 0.0, lo = ts[0].values[i], hi = lo;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double v = ts[k].values[i];
      m += (v - m) / static_cast<double>(k + 1);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out.values[i] = std::clamp(m, lo, hi);
  }
  return out;
}

inline Template merge_median(std::span<const Template> ts) {
  detail::check_mergeable(ts);
  Template out{ts[0].segment, ts[0].channel, std::vector<double>(ts[0].values.size()),
               "merged-median"};
  std::vector<double> column(ts.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    for (std::size_t k = 0; k < ts.size(); ++k) column[k] = ts[k].values[i];
    std::sort(column.begin(), column.end());
    const std::size_t mid = column.size() / 2;
    out.values[i] = column.size() % 2 ? column[mid] : (column[mid - 1] + column[mid]) / 2.0;
  }
  return out;
}

// ---- Model building ----------------------------------------------------------

struct BuildOptions {
  std::size_t top_k = 10;
  PruneOptions prune{};
  DtwConfig dtw{};
  // Fewer labeled frames than this per segment produces a warning.
  std::size_t recommended_per_segment = 50;
};

// When pruning leaves fewer than k frames, refill from the discarded ones closest on
// average to the retained set, so every segment still gets k templates.
inline void top_up(std::vector<std::size_t>& kept, std::span<const EventFrame> frames,
                   const DistanceMatrix& dist, std::size_t k) {
  if (kept.size() >= k || kept.size() == frames.size()) return;
  std::vector<std::pair<double, std::size_t>> rest;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (!std::binary_search(kept.begin(), kept.end(), i)) {
      double sum = 0.0;
      for (std::size_t j : kept) sum += dist(i, j);
      rest.emplace_back(sum / static_cast<double>(kept.size()), i);
    }
  std::stable_sort(rest.begin(), rest.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return frames[a.second].t_start < frames[b.second].t_start;
  });
  for (std::size_t r = 0; r < rest.size() && kept.size() < k; ++r) kept.push_back(rest[r].second);
  std::sort(kept.begin(), kept.end());
}

inline std::string event_provenance(const EventFrame& f) {
  return "event@" + std::to_string(f.t_start);
}

// Per segment and channel: prune, keep the k most similar, and for the merged
// approaches collapse them into one template.
inline SegmentModel build_model(std::span<const EventFrame> training, Approach approach,
                                bool filtered, const BuildOptions& opt = {},
                                std::vector<std::string>* warnings = nullptr) {
  if (training.empty()) throw TrainingError("no training frames");
  const std::size_t len = training[0].length();
  std::array<std::vector<EventFrame>, kSegmentCount> groups;
  for (const auto& f : training) {
    if (!f.label) throw InputError("training frame without a label");
    if (f.length() != len || !f.well_formed()) throw InputError("training frames differ in length");
    groups[index_of(*f.label)].push_back(f);
  }

  std::string missing;
  for (std::size_t s = 0; s < kSegmentCount; ++s)
    if (groups[s].empty())
      missing += (missing.empty() ? "" : ", ") + std::string(segment_name(static_cast<SegmentId>(s)));
  if (!missing.empty()) throw TrainingError("no training frames for segments: " + missing);

  SegmentModel model(approach, filtered, len);
  for (std::size_t s = 0; s < kSegmentCount; ++s) {
    const auto seg = static_cast<SegmentId>(s);
    auto& group = groups[s];
    // Canonical order makes the model independent of input order.
    std::sort(group.begin(), group.end(), [](const EventFrame& a, const EventFrame& b) {
      if (a.t_start != b.t_start) return a.t_start < b.t_start;
      return a.channels < b.channels;
    });
    if (group.size() < opt.recommended_per_segment && warnings)
      warnings->push_back(std::string(segment_name(seg)) + ": only " +
                          std::to_string(group.size()) + " training frames");

    for (Channel c : channels_for(approach)) {
      const DistanceMatrix dist(group, c, opt.dtw);
      auto kept = prune_candidates(group, c, dist, opt.prune, warnings);
      top_up(kept, group, dist, opt.top_k);
      const auto top = select_top_k(group, kept, dist, opt.top_k, warnings);
      std::vector<Template> chosen;
      for (std::size_t i : top) {
        const auto v = group[i].channel(c);
        chosen.push_back({seg, c, {v.begin(), v.end()}, event_provenance(group[i])});
      }
      auto& slot = model.slot(seg, c);
      switch (approach) {
        case Approach::MultiTemplate: slot = std::move(chosen); break;
        case Approach::MeanTemplate: slot = {merge_mean(chosen)}; break;
        case Approach::MedianTemplate: slot = {merge_median(chosen)}; break;
      }
    }
  }
  return model;
}

}  // namespace bumpwatch
