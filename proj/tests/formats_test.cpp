#include <gtest/gtest.h>

#include <bit>
#include <random>
#include <sstream>

#include "bumpwatch/formats.hpp"
#include "bumpwatch/live.hpp"
#include "bumpwatch/synth.hpp"
#include "test_support.hpp"

using namespace bumpwatch;

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

TEST(RecordingCsv, RoundTripIsBitExact) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<int> ex(-300, 300);
  std::vector<SensorSample> v;
  for (int i = 0; i < 2000; ++i) {
    SensorSample s{i * 10.0 + u(rng) * 1e-4, u(rng), std::ldexp(u(rng), ex(rng)), u(rng), u(rng) * 1e-9,
                   u(rng), -0.0};
    v.push_back(s);
  }
  const auto stream = make_stream(v, 100.0);
  std::stringstream ss;
  write_recording(ss, stream);
  const auto back = read_recording(ss);
  ASSERT_EQ(back.size(), stream.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (Channel c : kAllChannels) ASSERT_TRUE(same_bits(back[i][c], stream[i][c])) << i;
  std::stringstream again;
  write_recording(again, back);
  std::stringstream first;
  write_recording(first, stream);
  EXPECT_EQ(again.str(), first.str());
}

TEST(RecordingCsv, ShortRowReportsLine) {
  std::stringstream ss("t_ms,ax,ay,az,rx,ry,rz\n0,1,2,3,4,5,6\n10,1,2,3,4,5\n");
  try {
    (void)read_recording(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(RecordingCsv, ValidationErrorsSurface) {
  std::stringstream gap("t_ms,ax,ay,az,rx,ry,rz\n0,0,0,0,0,0,0\n10,0,0,0,0,0,0\n40,0,0,0,0,0,0\n");
  EXPECT_THROW((void)read_recording(gap), RateError);
  std::stringstream back("t_ms,ax,ay,az,rx,ry,rz\n0,0,0,0,0,0,0\n10,0,0,0,0,0,0\n5,0,0,0,0,0,0\n");
  EXPECT_THROW((void)read_recording(back), OrderingError);
  std::stringstream nan("t_ms,ax,ay,az,rx,ry,rz\n0,nan,0,0,0,0,0\n");
  EXPECT_THROW((void)read_recording(nan), Error);
}

TEST(RecordingCsv, TenMinutesIsSixtyThousandSamples) {
  const auto rec = generate_recording({}, 600.0);
  std::stringstream ss;
  write_recording(ss, rec.stream);
  EXPECT_EQ(read_recording(ss).size(), 60000u);
}

TEST(LabelsCsv, RoundTrip) {
  std::vector<GroundTruth> l{{1000.0, SegmentId::FLB}, {3500.25, SegmentId::B}};
  std::stringstream ss;
  write_labels(ss, l);
  EXPECT_EQ(read_labels(ss), l);
  std::stringstream bad("t_ms,segment\n10,XX\n");
  EXPECT_THROW((void)read_labels(bad), ParseError);
}

TEST(Datagram, Format) {
  SensorSample s{120.0, 0.5, -1.25, 0, 0, 0, 3e-5};
  const auto d = format_datagram(s);
  EXPECT_EQ(d.back(), '\n');
  EXPECT_EQ(parse_datagram(d), s);
  EXPECT_FALSE(parse_datagram("1,2,3\n").has_value());
  EXPECT_FALSE(parse_datagram("1,2,3,4,5,6,x\n").has_value());
}

TEST(EventsJsonl, RoundTripIsBitExact) {
  auto rec = support::corpus(2, 11);
  PipelineConfig cfg;
  cfg.filter = FilterSpec{};
  auto events = extract_events(rec.stream, cfg);
  attach_labels(events, rec.labels);
  ASSERT_FALSE(events.empty());
  EventsFile f{{true, 100.0, {}}, events};
  std::stringstream ss;
  write_events(ss, f);
  const auto text = ss.str();
  const auto back = read_events(ss);
  EXPECT_TRUE(back.header.filtered);
  ASSERT_EQ(back.events.size(), events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(back.events[i].frame.label, events[i].frame.label);
    for (Channel c : kAllChannels) {
      const auto& a = events[i].frame.channel(c);
      const auto& b = back.events[i].frame.channel(c);
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t k = 0; k < a.size(); ++k) ASSERT_TRUE(same_bits(a[k], b[k]));
    }
  }
  std::stringstream again;
  write_events(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(EventsJsonl, ErrorsCarryLine) {
  std::stringstream ss(
      "{\"format\":\"bumpwatch-events\",\"version\":1,\"filter\":\"off\",\"rate_hz\":100,"
      "\"frame_len\":50,\"padding\":5}\n{not json\n");
  try {
    (void)read_events(ss);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::stringstream wrong("{\"format\":\"other\"}\n");
  EXPECT_THROW((void)read_events(wrong), ParseError);
}

TEST(ModelJson, RoundTripIsBitExact) {
  const auto frames = support::corpus_frames(12, 3, false);
  for (auto a : {Approach::MultiTemplate, Approach::MeanTemplate, Approach::MedianTemplate}) {
    BuildOptions opt;
    const auto m = build_model(frames, a, false, opt);
    const auto j = to_json(m);
    const auto back = model_from_json(json::parse(j.dump()));
    EXPECT_EQ(back, m) << approach_name(a);
    EXPECT_EQ(to_json(back).dump(), j.dump());
  }
}

TEST(ModelJson, RejectsForeignDocuments) {
  EXPECT_THROW((void)model_from_json(json{{"format", "nope"}}), InputError);
}
