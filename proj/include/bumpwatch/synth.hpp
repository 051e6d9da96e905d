#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bumpwatch/sensor.hpp"

namespace bumpwatch {

// Unit push direction in the vehicle frame and the sign of the yaw it induces.
struct ImpactSignature {
  double dir_x = 0.0;
  double dir_y = 0.0;
  int torque_sign = 0;

  friend bool operator==(const ImpactSignature&, const ImpactSignature&) = default;
};

// Half-extents of the test vehicle (m); only their ratio matters for the torque sign.
inline constexpr double kHalfLength = 0.22;
inline constexpr double kHalfWidth = 0.12;

inline ImpactSignature impact_signature(SegmentId id) {
  using S = SegmentId;
  const double h = std::numbers::sqrt2 / 2.0;
  // Corner at (cx*w, cy*l) pushed at 45 degrees. On a non-square body the push line
  // misses the centre, so it carries a z-torque r x F.
  auto corner = [&](double cx, double cy) {
    const double fx = -cx * h, fy = -cy * h;
    const double tau = (cx * kHalfWidth) * fy - (cy * kHalfLength) * fx;
    return std::pair{ImpactSignature{fx, fy, 0}, tau};
  };

  // Pushes act into the body: a front push drives the vehicle backwards (-y).
  switch (id) {
    case S::F: return {0.0, -1.0, 0};
    case S::B: return {0.0, 1.0, 0};
    case S::L: return {1.0, 0.0, 0};
    case S::R: return {-1.0, 0.0, 0};
    default: break;
  }
  const auto base = index_of(id) >= 8 ? corner_partner(id) : id;
  double cx = 0.0, cy = 0.0;
  switch (base) {
    case S::FL: cx = -1.0; cy = 1.0; break;
    case S::FR: cx = 1.0; cy = 1.0; break;
    case S::BL: cx = -1.0; cy = -1.0; break;
    default: cx = 1.0; cy = -1.0; break;
  }
  auto [sig, tau] = corner(cx, cy);
  sig.torque_sign = tau > 0.0 ? 1 : -1;
  // A reversed push meets the same corner from the contrary side: same translation
  // mix, opposite spin.
  if (category_of(id) == Category::ReversedDiagonal) sig.torque_sign = -sig.torque_sign;
  return sig;
}

struct ImpactSpec {
  SegmentId segment = SegmentId::F;
  double peak_accel = 6.0;     // m/s^2
  double damping_ratio = 0.2;  // dimensionless
  double ring_hz = 5.0;        // damped oscillation frequency
  // Signed fraction of peak_accel leaking onto the axis orthogonal to a straight push.
  double cross_coupling = 0.4;
  double yaw_gain = 1.0;       // rad/s at the first lobe for corner pushes
  double vertical_coupling = 0.1;
};

struct PlantedImpact {
  double t_ms = 0.0;
  ImpactSpec spec;
};

struct RecordingOptions {
  double rate_hz = 100.0;
  double noise_sigma = 0.15;      // acceleration, m/s^2
  double rot_noise_sigma = 0.05;  // rad/s
  double noise_clip = 0.9;
  std::uint64_t seed = 42;
  double min_spacing_ms = 500.0;
  double pos_thresh = 1.0;
};

struct GroundTruth {
  double t_ms = 0.0;
  SegmentId segment = SegmentId::F;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Recording {
  SampleStream stream;
  std::vector<GroundTruth> labels;
};

// Underdamped second-order impulse response, scaled so its first lobe peaks at 1.
class DampedResponse {
 public:
  DampedResponse(double ring_hz, double zeta) : zeta_(zeta) {
    wd_ = 2.0 * std::numbers::pi * ring_hz;
    wn_ = wd_ / std::sqrt(1.0 - zeta * zeta);
    const double t_peak = std::atan2(std::sqrt(1.0 - zeta * zeta), zeta) / wd_;
    scale_ = 1.0 / (std::exp(-zeta * wn_ * t_peak) * std::sin(wd_ * t_peak));
  }

  double operator()(double tau_s) const {
    if (tau_s < 0.0) return 0.0;
    return scale_ * std::exp(-zeta_ * wn_ * tau_s) * std::sin(wd_ * tau_s);
  }

 private:
  double zeta_, wd_ = 0.0, wn_ = 0.0, scale_ = 1.0;
};

inline void validate(const ImpactSpec& s, const RecordingOptions& opt) {
  if (!(s.peak_accel > opt.pos_thresh))
    throw InputError("impact peak must exceed the detection threshold");
  if (!(s.ring_hz > 0.0 && s.ring_hz < opt.rate_hz / 2.0))
    throw InputError("ring frequency must lie in (0, Nyquist)");
  if (!(s.damping_ratio > 0.0 && s.damping_ratio < 1.0))
    throw InputError("damping ratio must be in (0, 1)");
}

inline Recording generate_recording(std::vector<PlantedImpact> impacts, double duration_s,
                                    const RecordingOptions& opt = {}) {
  std::sort(impacts.begin(), impacts.end(),
            [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; });
  for (std::size_t i = 0; i < impacts.size(); ++i) {
    validate(impacts[i].spec, opt);
    if (i > 0 && impacts[i].t_ms - impacts[i - 1].t_ms < opt.min_spacing_ms)
      throw InputError("planted impacts overlap; space them at least one frame apart");
  }

  const double dt = nominal_spacing_ms(opt.rate_hz);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * opt.rate_hz));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> accel_noise(0.0, opt.noise_sigma);
  std::normal_distribution<double> rot_noise(0.0, opt.rot_noise_sigma);
  auto clip = [&](double v) { return std::clamp(v, -opt.noise_clip, opt.noise_clip); };

  std::vector<SensorSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = samples[i];
    s.t_ms = static_cast<double>(i) * dt;
    s.ax = clip(accel_noise(rng));
    s.ay = clip(accel_noise(rng));
    s.az = clip(accel_noise(rng));
    s.rx = clip(rot_noise(rng));
    s.ry = clip(rot_noise(rng));
    s.rz = clip(rot_noise(rng));
  }

  Recording rec;
  const double tail_s = 3.0;
  for (const auto& imp : impacts) {
    const auto& sp = imp.spec;
    const auto sig = impact_signature(sp.segment);
    const DampedResponse h(sp.ring_hz, sp.damping_ratio);
    double gx = sig.dir_x, gy = sig.dir_y;
    if (category_of(sp.segment) == Category::Straight) {
      if (sig.dir_x == 0.0)
        gx += sp.cross_coupling;
      else
        gy += sp.cross_coupling;
    }
    const double yaw = sig.torque_sign * sp.yaw_gain;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(imp.t_ms / dt)));
    const auto last = std::min(n, first + static_cast<std::size_t>(tail_s * opt.rate_hz));
    for (std::size_t i = first; i < last; ++i) {
      const double v = h((samples[i].t_ms - imp.t_ms) / 1000.0);
      samples[i].ax += sp.peak_accel * gx * v;
      samples[i].ay += sp.peak_accel * gy * v;
      samples[i].az += sp.peak_accel * sp.vertical_coupling * v;
      samples[i].rz += yaw * v;
      samples[i].rx += 0.1 * sp.yaw_gain * sig.dir_y * v;
      samples[i].ry += 0.1 * sp.yaw_gain * sig.dir_x * v;
    }
    rec.labels.push_back({imp.t_ms, sp.segment});
  }
  rec.stream = make_stream(std::move(samples), opt.rate_hz);
  return rec;
}

// Ranges the corpus generator draws each impact from.
struct CorpusOptions {
  std::size_t per_segment = 50;
  std::uint64_t seed = 42;
  double spacing_s = 2.0;
  double spacing_jitter_s = 0.5;
  double lead_s = 1.0;
  double peak_min = 4.0, peak_max = 8.0;
  double ring_min = 3.0, ring_max = 8.0;
  // Envelope decay rate zeta*omega_n in 1/s; large enough to settle within one frame.
  double decay_min = 6.0, decay_max = 9.0;
  double cross_min = 0.35, cross_max = 0.5;
  double yaw_min = 0.8, yaw_max = 1.6;
  std::vector<SegmentId> segments;  // empty: all twelve
  RecordingOptions recording{};
};

inline std::vector<PlantedImpact> plan_impacts(const CorpusOptions& opt) {
  std::vector<SegmentId> segs = opt.segments;
  if (segs.empty())
    for (const auto& c : segment_catalog()) segs.push_back(c.id);

  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<SegmentId> order;
  for (auto s : segs)
    for (std::size_t k = 0; k < opt.per_segment; ++k) order.push_back(s);
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

  std::vector<PlantedImpact> out;
  double t = opt.lead_s;
  for (auto seg : order) {
    ImpactSpec sp;
    sp.segment = seg;
    sp.peak_accel = draw(opt.peak_min, opt.peak_max);
    sp.ring_hz = draw(opt.ring_min, opt.ring_max);
    const double decay = draw(opt.decay_min, opt.decay_max);
    const double wd = 2.0 * std::numbers::pi * sp.ring_hz;
    // decay = zeta * wn and wd = wn * sqrt(1 - zeta^2)  =>  zeta = decay / hypot(decay, wd)
    sp.damping_ratio = decay / std::hypot(decay, wd);
    const double cross = draw(opt.cross_min, opt.cross_max);
    sp.cross_coupling = category_of(seg) == Category::Straight
                            ? (u(rng) < 0.5 ? -cross : cross)
                            : draw(-0.05, 0.05);
    sp.yaw_gain = draw(opt.yaw_min, opt.yaw_max);
    sp.vertical_coupling = draw(0.05, 0.15);
    out.push_back({t * 1000.0, sp});
    t += opt.spacing_s + draw(0.0, opt.spacing_jitter_s);
  }
  return out;
}

inline double planned_duration_s(const std::vector<PlantedImpact>& impacts, const CorpusOptions& opt) {
  return (impacts.empty() ? opt.lead_s : impacts.back().t_ms / 1000.0) + opt.spacing_s + 1.0;
}

// Labeled recording with `per_segment` impacts of every requested segment, in random order.
inline Recording generate_corpus(const CorpusOptions& opt) {
  auto impacts = plan_impacts(opt);
  const double duration = planned_duration_s(impacts, opt);
  auto rec_opt = opt.recording;
  rec_opt.seed = opt.seed;
  return generate_recording(std::move(impacts), duration, rec_opt);
}

}  // namespace bumpwatch
