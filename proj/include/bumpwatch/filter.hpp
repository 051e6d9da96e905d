#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bumpwatch/sensor.hpp"

namespace bumpwatch {

struct FilterSpec {
  double cutoff_hz = 20.0;
  double sample_rate_hz = 100.0;
  int order = 2;
};

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;
  double gain = 1.0;
  double sample_rate_hz = 100.0;

  std::complex<double> response(double freq_hz) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = gain;
    for (const auto& s : sections) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
  }

  double magnitude(double freq_hz) const { return std::abs(response(freq_hz)); }

  // Poles of every section, for stability checks.
  std::vector<std::complex<double>> poles() const {
    std::vector<std::complex<double>> out;
    for (const auto& s : sections) {
      if (s.a2 == 0.0) {
        if (s.a1 != 0.0) out.emplace_back(-s.a1, 0.0);
        continue;
      }
      const std::complex<double> disc = std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2));
      out.push_back((-s.a1 + disc) / 2.0);
      out.push_back((-s.a1 - disc) / 2.0);
    }
    return out;
  }
};

// Digital Butterworth low-pass: analog prototype poles, pre-warped cutoff, bilinear
// transform. Each section carries its zeros at z = -1; `gain` restores unity at DC.
inline FilterCoefficients design_lowpass(const FilterSpec& spec) {
  if (!(spec.sample_rate_hz > 0.0)) throw DesignError("sample rate must be positive");
  if (!(spec.cutoff_hz > 0.0)) throw DesignError("cutoff must be positive");
  if (spec.order < 1) throw DesignError("order must be at least 1");
  if (spec.cutoff_hz >= spec.sample_rate_hz / 2.0)
    throw DesignError("cutoff must lie below the Nyquist frequency");

  const double fs2 = 2.0 * spec.sample_rate_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_rate_hz);
  const int n = spec.order;

  FilterCoefficients out;
  out.sample_rate_hz = spec.sample_rate_hz;
  double gain = 1.0;

  // Upper-half-plane poles only; conjugates are implied by each biquad.
  for (int k = 1; k <= n / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n - 1) / (2.0 * n);
    const std::complex<double> s = warped * std::polar(1.0, theta);
    const std::complex<double> z = (fs2 + s) / (fs2 - s);
    Biquad q{1.0, 2.0, 1.0, -2.0 * z.real(), std::norm(z)};
    gain *= (1.0 + q.a1 + q.a2) / 4.0;
    out.sections.push_back(q);
  }
  if (n % 2 == 1) {
    const double p = (fs2 - warped) / (fs2 + warped);
    Biquad q{1.0, 1.0, 0.0, -p, 0.0};
    gain *= (1.0 - p) / 2.0;
    out.sections.push_back(q);
  }
  out.gain = gain;
  return out;
}

// Stateful single-channel cascade, transposed direct form II, zero initial state.
class ChannelFilter {
 public:
  ChannelFilter() = default;
  explicit ChannelFilter(const FilterCoefficients& c) : coeffs_(&c), state_(c.sections.size()) {}

  double step(double x) noexcept {
    double v = coeffs_->gain * x;
    for (std::size_t i = 0; i < state_.size(); ++i) {
      const Biquad& q = coeffs_->sections[i];
      auto& [s1, s2] = state_[i];
      const double y = q.b0 * v + s1;
      s1 = q.b1 * v - q.a1 * y + s2;
      s2 = q.b2 * v - q.a2 * y;
      v = y;
    }
    return v;
  }

  void reset() noexcept {
    for (auto& s : state_) s = {0.0, 0.0};
  }

 private:
  const FilterCoefficients* coeffs_ = nullptr;
  std::vector<std::array<double, 2>> state_;
};

// Per-sample filter over a subset of channels; timestamps pass through.
class SampleFilter {
 public:
  SampleFilter(const FilterCoefficients& coeffs, std::vector<Channel> channels)
      : coeffs_(coeffs), channels_(std::move(channels)) {
    for (auto& f : filters_) f = ChannelFilter(coeffs_);
  }
  explicit SampleFilter(const FilterCoefficients& coeffs)
      : SampleFilter(coeffs, {kAllChannels.begin(), kAllChannels.end()}) {}

  SampleFilter(const SampleFilter& o) : SampleFilter(o.coeffs_, o.channels_) {}
  SampleFilter& operator=(const SampleFilter&) = delete;

  SensorSample step(SensorSample s) noexcept {
    for (Channel c : channels_) s[c] = filters_[index_of(c)].step(s[c]);
    return s;
  }

 private:
  FilterCoefficients coeffs_;
  std::vector<Channel> channels_;
  std::array<ChannelFilter, kChannelCount> filters_;
};

inline SampleStream apply_filter(const FilterCoefficients& coeffs, const SampleStream& stream,
                                 std::vector<Channel> channels = {kAllChannels.begin(),
                                                                  kAllChannels.end()}) {
  SampleFilter f(coeffs, std::move(channels));
  std::vector<SensorSample> out;
  out.reserve(stream.size());
  for (const auto& s : stream.samples()) out.push_back(f.step(s));
  return make_unchecked_stream(std::move(out), stream.rate_hz());
}

}  // namespace bumpwatch
