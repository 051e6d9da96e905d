#include <gtest/gtest.h>

#include <random>

#include "bumpwatch/classifier.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bumpwatch;
using bumpwatch::support::frame_of;

namespace {

// Every segment/channel gets the templates produced by `make(segment, channel)`.
template <typename Fn>
SegmentModel model_from(Approach a, std::size_t len, Fn make) {
  SegmentModel m(a, false, len);
  for (const auto& sc : segment_catalog())
    for (Channel c : channels_for(a))
      for (auto& v : make(sc.id, c)) m.slot(sc.id, c).push_back({sc.id, c, v, "test"});
  return m;
}

std::vector<double> random_seq(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(Classify, FrameEqualToTemplatesWinsWithZeroNorm) {
  std::mt19937_64 rng(1);
  std::array<std::array<std::vector<double>, kChannelCount>, kSegmentCount> sig;
  for (auto& seg : sig)
    for (auto& ch : seg) ch = random_seq(rng, 50);
  const auto model = model_from(Approach::MedianTemplate, 50, [&](SegmentId s, Channel c) {
    return std::vector<std::vector<double>>{sig[index_of(s)][index_of(c)]};
  });
  EventFrame f = frame_of(std::vector<double>(50, 0.0));
  for (Channel c : kAllChannels) f.channels[index_of(c)] = sig[index_of(SegmentId::FL)][index_of(c)];

  EXPECT_EQ(segment_channel_distance(f, model, SegmentId::FL, Channel::Ay), 0.0);
  const auto r = classify(f, model);
  EXPECT_EQ(r.winner, SegmentId::FL);
  EXPECT_EQ(r.norms[index_of(SegmentId::FL)], 0.0);
  EXPECT_EQ(r.ratios[0].size(), 3u);
  for (std::size_t s = 0; s < kSegmentCount; ++s)
    for (double v : r.ratios[s]) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
}

TEST(Classify, RatioArithmetic) {
  // Frame is 0 on every channel; F's templates sit at 1, everyone else's at 2, so
  // d(F) = (1,1,1) and d(other) = (2,2,2).
  const auto model = model_from(Approach::MeanTemplate, 1, [](SegmentId s, Channel) {
    return std::vector<std::vector<double>>{{s == SegmentId::F ? 1.0 : 2.0}};
  });
  const auto r = classify(frame_of({0.0}), model);
  EXPECT_EQ(r.winner, SegmentId::F);
  EXPECT_EQ(r.ratios[index_of(SegmentId::F)], (std::vector<double>{0.5, 0.5, 0.5}));
  EXPECT_EQ(r.ratios[index_of(SegmentId::B)], (std::vector<double>{1.0, 1.0, 1.0}));
  EXPECT_DOUBLE_EQ(r.norms[index_of(SegmentId::F)], std::sqrt(0.75));
  EXPECT_DOUBLE_EQ(r.norms[index_of(SegmentId::B)], std::sqrt(3.0));
}

TEST(SegmentChannelDistance, MultiTakesNearestTemplate) {
  std::mt19937_64 rng(2);
  const auto model = model_from(Approach::MultiTemplate, 30, [&](SegmentId, Channel) {
    std::vector<std::vector<double>> ts;
    for (int k = 0; k < 10; ++k) ts.push_back(random_seq(rng, 30));
    return ts;
  });
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = frame_of(random_seq(rng, 30));
    for (const auto& sc : segment_catalog())
      for (Channel c : {Channel::Ay, Channel::Ax}) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : model.templates(sc.id, c))
          best = std::min(best, oracle::dtw_recursive(f.channel(c), t.values));
        EXPECT_DOUBLE_EQ(segment_channel_distance(f, model, sc.id, c), best);
      }
  }
  // A frame equal to one member of a set is at distance 0 from that segment.
  const auto member = model.templates(SegmentId::BR, Channel::Ax)[7].values;
  EXPECT_EQ(segment_channel_distance(frame_of(member), model, SegmentId::BR, Channel::Ax), 0.0);
  EXPECT_THROW(segment_channel_distance(frame_of(member), model, SegmentId::BR, Channel::Rz),
               ConfigError);
  EXPECT_EQ(classify(frame_of(member), model).ratios[0].size(), 2u);
}

TEST(Classify, ChannelScaleLeavesDecisionUnchanged) {
  std::mt19937_64 rng(3);
  std::array<std::array<std::vector<double>, kChannelCount>, kSegmentCount> sig;
  for (auto& seg : sig)
    for (auto& ch : seg) ch = random_seq(rng, 40);
  auto build = [&](double rz_scale) {
    return model_from(Approach::MedianTemplate, 40, [&](SegmentId s, Channel c) {
      auto v = sig[index_of(s)][index_of(c)];
      if (c == Channel::Rz)
        for (auto& x : v) x *= rz_scale;
      return std::vector<std::vector<double>>{v};
    });
  };
  const auto base = build(1.0), scaled = build(4.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = frame_of(random_seq(rng, 40));
    f.channels[index_of(Channel::Rz)] = random_seq(rng, 40);
    auto g = f;
    for (auto& x : g.channels[index_of(Channel::Rz)]) x *= 4.0;
    const auto a = classify(f, base), b = classify(g, scaled);
    EXPECT_EQ(a.winner, b.winner);
    EXPECT_EQ(a.norms, b.norms);
  }
}

TEST(Classify, TieGoesToCatalogOrderAndDegenerateChannelWarns) {
  const auto model = model_from(Approach::MedianTemplate, 3, [](SegmentId, Channel) {
    return std::vector<std::vector<double>>{{1.0, 1.0, 1.0}};
  });
  const auto r = classify(frame_of({1.0, 1.0, 1.0}), model);
  EXPECT_EQ(r.winner, SegmentId::F);
  EXPECT_EQ(r.warnings.size(), 3u);
  for (double n : r.norms) EXPECT_EQ(n, 0.0);
}

TEST(Classify, RejectsWrongLength) {
  const auto model = model_from(Approach::MeanTemplate, 5, [](SegmentId, Channel) {
    return std::vector<std::vector<double>>{{0, 0, 0, 0, 0}};
  });
  EXPECT_THROW(classify(frame_of({1.0, 2.0}), model), InputError);
}

TEST(Classify, WithinSetRatios) {
  // F's set spans distances {1, 4}; every other segment's set spans {3, 3}.
  const auto model = model_from(Approach::MultiTemplate, 1, [](SegmentId s, Channel) {
    if (s == SegmentId::F) return std::vector<std::vector<double>>{{1.0}, {4.0}};
    return std::vector<std::vector<double>>{{3.0}, {-3.0}};
  });
  ClassifierOptions opt;
  opt.ratio_mode = RatioMode::WithinSet;
  const auto r = classify(frame_of({0.0}), model, opt);
  EXPECT_EQ(r.ratios[index_of(SegmentId::F)], (std::vector<double>{0.25, 0.25}));
  EXPECT_EQ(r.ratios[index_of(SegmentId::L)], (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(r.winner, SegmentId::F);
}

TEST(Classify, CategoryWeightsScaleRatios) {
  const auto model = model_from(Approach::MeanTemplate, 1, [](SegmentId s, Channel) {
    return std::vector<std::vector<double>>{{s == SegmentId::F ? 1.0 : s == SegmentId::FL ? 1.5 : 2.0}};
  });
  ClassifierOptions opt;
  // Zero weights on the straight category collapse those norms.
  opt.weights[0] = {0, 0, 0, 0, 0, 0};
  const auto r = classify(frame_of({0.0}), model, opt);
  EXPECT_EQ(r.norms[index_of(SegmentId::F)], 0.0);
  EXPECT_EQ(r.winner, SegmentId::F);
}
