#include <gtest/gtest.h>

#include <set>

#include "bumpwatch/sensor.hpp"

using namespace bumpwatch;

namespace {

std::vector<SensorSample> at_times(std::initializer_list<double> ts) {
  std::vector<SensorSample> out;
  for (double t : ts) out.push_back({t});
  return out;
}

}  // namespace

TEST(MakeStream, AcceptsNominalSpacing) {
  const auto s = make_stream(at_times({0, 10, 20}), 100.0);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.rate_hz(), 100.0);
}

TEST(MakeStream, RejectsNonMonotonicTimestamps) {
  EXPECT_THROW(make_stream(at_times({0, 10, 5}), 100.0), OrderingError);
  EXPECT_THROW(make_stream(at_times({0, 10, 10}), 100.0), OrderingError);
}

TEST(MakeStream, RejectsSpacingBeyondTolerance) {
  // 30 ms gap against a 15 ms ceiling (10 ms nominal, +50%).
  EXPECT_THROW(make_stream(at_times({0, 10, 40}), 100.0), RateError);
  EXPECT_NO_THROW(make_stream(at_times({0, 10, 25}), 100.0));
  EXPECT_THROW(make_stream(at_times({0, 10, 26}), 100.0), RateError);
  EXPECT_THROW(make_stream(at_times({0, 4}), 100.0), RateError);
}

TEST(MakeStream, RejectsBadInput) {
  EXPECT_THROW(make_stream({}, 100.0), InputError);
  EXPECT_THROW(make_stream(at_times({0}), 0.0), InputError);
  auto s = at_times({0, 10});
  s[1].ay = std::nan("");
  EXPECT_THROW(make_stream(s, 100.0), InputError);
  EXPECT_THROW(make_stream(at_times({-10, 0}), 100.0), InputError);
}

TEST(SegmentCatalog, HasTwelveDistinctClasses) {
  const auto& cat = segment_catalog();
  ASSERT_EQ(cat.size(), 12u);
  std::set<SegmentId> ids;
  for (const auto& c : cat) ids.insert(c.id);
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_EQ(&segment_catalog(), &cat);
}

TEST(SegmentCatalog, CategoriesAndAngles) {
  EXPECT_EQ(segment_class(SegmentId::FLB).category, Category::ReversedDiagonal);
  EXPECT_EQ(segment_class(SegmentId::FLB).approach_angle_deg, 135);
  EXPECT_EQ(segment_class(SegmentId::F).category, Category::Straight);
  EXPECT_EQ(segment_class(SegmentId::F).approach_angle_deg, 90);
  EXPECT_EQ(segment_class(SegmentId::BR).category, Category::Diagonal);
  EXPECT_EQ(segment_class(SegmentId::BR).approach_angle_deg, 45);

  for (auto id : {SegmentId::F, SegmentId::B, SegmentId::L, SegmentId::R})
    EXPECT_EQ(category_of(id), Category::Straight);
  for (auto id : {SegmentId::FL, SegmentId::FR, SegmentId::BL, SegmentId::BR})
    EXPECT_EQ(category_of(id), Category::Diagonal);
  for (auto id : {SegmentId::FLB, SegmentId::FRB, SegmentId::BLF, SegmentId::BRF})
    EXPECT_EQ(category_of(id), Category::ReversedDiagonal);
}

TEST(SegmentCatalog, NamesRoundTrip) {
  for (const auto& c : segment_catalog()) EXPECT_EQ(parse_segment(segment_name(c.id)), c.id);
  EXPECT_THROW(parse_segment("XY"), InputError);
  EXPECT_EQ(corner_partner(SegmentId::FL), SegmentId::FLB);
  EXPECT_EQ(corner_partner(SegmentId::BRF), SegmentId::BR);
}

TEST(FrameGeometry, FromMilliseconds) {
  EXPECT_EQ(FrameGeometry::from_ms(100, 500, 50), (FrameGeometry{50, 5}));
  EXPECT_EQ(FrameGeometry::from_ms(200, 500, 50), (FrameGeometry{100, 10}));
  EXPECT_THROW(FrameGeometry::from_ms(100, 50, 50), ConfigError);
}
