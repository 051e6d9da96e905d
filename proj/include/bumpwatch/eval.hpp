#pragma once

#include <algorithm>
#include <array>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bumpwatch/classifier.hpp"
#include "bumpwatch/formats.hpp"
#include "bumpwatch/live.hpp"
#include "bumpwatch/recording_io.hpp"

namespace bumpwatch {

// Segments in clockwise order around the vehicle starting at the front. Reversed
// diagonal classes sit between their corner and the adjoining side.
inline constexpr std::array<SegmentId, kSegmentCount> kRingOrder = {
    SegmentId::F,  SegmentId::FR, SegmentId::FRB, SegmentId::R,   SegmentId::BRF, SegmentId::BR,
    SegmentId::B,  SegmentId::BL, SegmentId::BLF, SegmentId::L,   SegmentId::FLB, SegmentId::FL};

inline std::size_t ring_position(SegmentId s) {
  return static_cast<std::size_t>(std::find(kRingOrder.begin(), kRingOrder.end(), s) -
                                  kRingOrder.begin());
}

inline bool ring_adjacent(SegmentId a, SegmentId b) {
  const auto d = (ring_position(a) + kSegmentCount - ring_position(b)) % kSegmentCount;
  return d == 1 || d == kSegmentCount - 1;
}

// Rows are ground truth, columns predictions; both indexed in catalog order.
class ConfusionMatrix {
 public:
  void add(SegmentId truth, SegmentId predicted) { ++counts_[index_of(truth)][index_of(predicted)]; }

  std::size_t at(SegmentId truth, SegmentId predicted) const {
    return counts_[index_of(truth)][index_of(predicted)];
  }
  std::size_t row_total(SegmentId truth) const {
    const auto& r = counts_[index_of(truth)];
    return std::accumulate(r.begin(), r.end(), std::size_t{0});
  }
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& sc : segment_catalog()) n += row_total(sc.id);
    return n;
  }
  std::size_t correct() const {
    std::size_t n = 0;
    for (const auto& sc : segment_catalog()) n += at(sc.id, sc.id);
    return n;
  }
  double accuracy() const { return total() ? static_cast<double>(correct()) / total() : 0.0; }

  // NaN for a segment without test events.
  double segment_accuracy(SegmentId s) const {
    const auto n = row_total(s);
    return n ? static_cast<double>(at(s, s)) / n : std::numeric_limits<double>::quiet_NaN();
  }

  // Average of per-segment accuracies over segments that have test events.
  double mean_segment_accuracy() const {
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& sc : segment_catalog())
      if (row_total(sc.id)) {
        sum += segment_accuracy(sc.id);
        ++k;
      }
    return k ? sum / k : 0.0;
  }

  // Share of misclassifications that land on a ring neighbour of the true segment.
  double neighbor_error_fraction() const {
    std::size_t wrong = 0, near = 0;
    for (const auto& t : segment_catalog())
      for (const auto& p : segment_catalog()) {
        if (t.id == p.id) continue;
        wrong += at(t.id, p.id);
        if (ring_adjacent(t.id, p.id)) near += at(t.id, p.id);
      }
    return wrong ? static_cast<double>(near) / wrong : 0.0;
  }

  // Fraction of a corner pair's events predicted as the other member of the pair.
  double pair_confusion(SegmentId a, SegmentId b) const {
    const auto n = row_total(a) + row_total(b);
    return n ? static_cast<double>(at(a, b) + at(b, a)) / n : 0.0;
  }
  double pair_accuracy(SegmentId a, SegmentId b) const {
    const auto n = row_total(a) + row_total(b);
    return n ? static_cast<double>(at(a, a) + at(b, b)) / n : 0.0;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::array<std::array<std::size_t, kSegmentCount>, kSegmentCount> counts_{};
};

struct TimingSummary {
  double mean_ms = 0.0, p50_ms = 0.0, p95_ms = 0.0, max_ms = 0.0;
};

inline TimingSummary summarize(std::vector<double> ms) {
  TimingSummary t;
  if (ms.empty()) return t;
  std::sort(ms.begin(), ms.end());
  t.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
  auto q = [&](double p) { return ms[static_cast<std::size_t>(p * (ms.size() - 1) + 0.5)]; };
  t.p50_ms = q(0.5);
  t.p95_ms = q(0.95);
  t.max_ms = ms.back();
  return t;
}

struct EvalReport {
  Approach approach = Approach::MedianTemplate;
  bool filtered = false;
  ConfusionMatrix matrix;
  std::vector<SegmentId> predictions;
  std::vector<double> classify_ms;
  // Delay between an entry point and the moment its frame is complete.
  double framing_latency_ms = 0.0;

  TimingSummary timing() const { return summarize(classify_ms); }
};

inline EvalReport evaluate(const SegmentModel& model, std::span<const EventFrame> test,
                           const ClassifierOptions& opt = {}, const DetectorConfig& det = {}) {
  EvalReport r;
  r.approach = model.approach();
  r.filtered = model.filtered();
  // The frame completes frame_len - padding - 1 samples after its entry point.
  const auto& g = det.geometry;
  r.framing_latency_ms =
      static_cast<double>(g.frame_len - g.padding - 1) * nominal_spacing_ms(det.rate_hz);
  for (const auto& f : test) {
    if (!f.label) throw InputError("evaluation frame without a label");
    const auto res = classify(f, model, opt);
    r.matrix.add(*f.label, res.winner);
    r.predictions.push_back(res.winner);
    r.classify_ms.push_back(res.elapsed_ms);
  }
  return r;
}

inline json to_json(const EvalReport& r) {
  json j;
  j["approach"] = approach_name(r.approach);
  j["filter"] = r.filtered ? "on" : "off";
  j["events"] = r.matrix.total();
  j["accuracy"] = r.matrix.accuracy();
  j["mean_segment_accuracy"] = r.matrix.mean_segment_accuracy();
  j["neighbor_error_fraction"] = r.matrix.neighbor_error_fraction();
  json per = json::object();
  for (auto s : kRingOrder) {
    const double a = r.matrix.segment_accuracy(s);
    per[std::string(segment_name(s))] = std::isnan(a) ? json(nullptr) : json(a);
  }
  j["segment_accuracy"] = per;
  json order = json::array(), rows = json::array();
  for (auto t : kRingOrder) {
    order.push_back(segment_name(t));
    json row = json::array();
    for (auto p : kRingOrder) row.push_back(r.matrix.at(t, p));
    rows.push_back(row);
  }
  j["ring_order"] = order;
  j["confusion"] = rows;
  const auto t = r.timing();
  j["classify_ms"] = {{"mean", t.mean_ms}, {"p50", t.p50_ms}, {"p95", t.p95_ms}, {"max", t.max_ms}};
  j["framing_latency_ms"] = r.framing_latency_ms;
  return j;
}

inline std::string render_table(const EvalReport& r) {
  std::ostringstream os;
  os << "approach " << approach_name(r.approach) << ", filter " << (r.filtered ? "on" : "off")
     << ", " << r.matrix.total() << " events\n";
  os << "truth\\pred";
  for (auto p : kRingOrder) os << std::setw(5) << segment_name(p);
  os << "   acc\n";
  for (auto t : kRingOrder) {
    os << std::setw(10) << std::left << segment_name(t) << std::right;
    for (auto p : kRingOrder) os << std::setw(5) << r.matrix.at(t, p);
    const double a = r.matrix.segment_accuracy(t);
    os << std::setw(7) << std::fixed << std::setprecision(3) << (std::isnan(a) ? 0.0 : a) << '\n';
  }
  const auto tm = r.timing();
  os << std::fixed << std::setprecision(4) << "overall accuracy " << r.matrix.accuracy()
     << ", mean per-segment " << r.matrix.mean_segment_accuracy() << ", neighbour share of errors "
     << r.matrix.neighbor_error_fraction() << '\n'
     << "classify ms/event: mean " << tm.mean_ms << ", p95 " << tm.p95_ms
     << "; framing latency " << std::setprecision(1) << r.framing_latency_ms << " ms\n";
  return os.str();
}

// ---- Arms -----------------------------------------------------------------------------

struct LabeledRecording {
  SampleStream stream;
  std::vector<GroundTruth> labels;
};

struct ArmsOptions {
  DetectorConfig detector{};
  FilterSpec filter{};
  BuildOptions build{};
  ClassifierOptions classifier{};
  double label_window_ms = 500.0;
};

// Detected, labeled frames; events that match no planted impact are dropped.
inline std::vector<EventFrame> labeled_frames(const LabeledRecording& rec, bool filtered,
                                              const ArmsOptions& opt) {
  PipelineConfig cfg;
  cfg.detector = opt.detector;
  if (filtered) cfg.filter = opt.filter;
  auto events = extract_events(rec.stream, cfg);
  attach_labels(events, rec.labels, opt.label_window_ms);
  std::vector<EventFrame> out;
  for (auto& e : events)
    if (e.frame.label) out.push_back(std::move(e.frame));
  return out;
}

// Every approach against both filter variants on identical recordings, ordered
// multi, mean, median with unfiltered first.
inline std::vector<EvalReport> compare_arms(const LabeledRecording& train,
                                            const LabeledRecording& test,
                                            const ArmsOptions& opt = {}) {
  std::vector<EvalReport> out;
  for (bool filtered : {false, true}) {
    const auto train_frames = labeled_frames(train, filtered, opt);
    const auto test_frames = labeled_frames(test, filtered, opt);
    for (auto a : {Approach::MultiTemplate, Approach::MeanTemplate, Approach::MedianTemplate}) {
      const auto model = build_model(train_frames, a, filtered, opt.build);
      out.push_back(evaluate(model, test_frames, opt.classifier, opt.detector));
    }
  }
  return out;
}

}  // namespace bumpwatch
