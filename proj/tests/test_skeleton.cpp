#include <gtest/gtest.h>

#include <limits>

#include "spmf/skeleton.hpp"

namespace spmf {
namespace {

SkeletonSequence make_sequence(int frames, int joints) {
  SkeletonSequence seq;
  seq.joint_count = joints;
  for (int t = 0; t < frames; ++t) {
    SkeletonFrame f;
    f.timestamp_index = t + 1;
    for (int j = 0; j < joints; ++j) f.joints.push_back({0.1 * j, 0.2 * t + 1.0, 2.5});
    seq.frames.push_back(f);
  }
  return seq;
}

TEST(ValidateSequence, WellFormedSequenceHasEmptyReport) {
  const auto report = validate_sequence(make_sequence(2, 20));
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.violations.empty());
  EXPECT_TRUE(report.warnings.empty());
}

TEST(ValidateSequence, JointCountMismatchNamesFrame) {
  auto seq = make_sequence(2, 20);
  seq.frames[1].joints.pop_back();
  const auto report = validate_sequence(seq);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].frame, 2);
  EXPECT_NE(report.violations[0].rule.find("joint count mismatch at frame 2"), std::string::npos);
}

TEST(ValidateSequence, NonFiniteCoordinate) {
  auto seq = make_sequence(3, 20);
  seq.frames[0].joints[4].y = std::numeric_limits<double>::quiet_NaN();
  seq.frames[2].joints[0].z = std::numeric_limits<double>::infinity();
  const auto report = validate_sequence(seq);
  ASSERT_EQ(report.violations.size(), 2u);
  EXPECT_NE(report.violations[0].rule.find("non-finite coordinate"), std::string::npos);
  EXPECT_EQ(report.violations[0].frame, 1);
  EXPECT_EQ(report.violations[1].frame, 3);
}

TEST(ValidateSequence, NonContiguousIndicesAndEmptySequence) {
  auto seq = make_sequence(3, 4);
  seq.frames[2].timestamp_index = 7;
  EXPECT_FALSE(validate_sequence(seq).ok());

  SkeletonSequence empty;
  empty.joint_count = 20;
  EXPECT_FALSE(validate_sequence(empty).ok());
}

TEST(ValidateSequence, DropoutFrameIsWarningNotViolation) {
  auto seq = make_sequence(3, 20);
  for (auto& p : seq.frames[1].joints) p = {};
  const auto report = validate_sequence(seq);
  EXPECT_TRUE(report.ok());
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_EQ(report.warnings[0].frame, 2);
}

TEST(ValidateSequence, IsPure) {
  auto seq = make_sequence(4, 5);
  seq.frames[3].joints.pop_back();
  EXPECT_EQ(validate_sequence(seq), validate_sequence(seq));
}

}  // namespace
}  // namespace spmf
