#include <gtest/gtest.h>

#include "mfng/measure.hpp"

namespace {

using mfng::Errc;
using mfng::Error;
using mfng::GeneratingMeasure;
using mfng::ProbMatrix;

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

GeneratingMeasure ref_measure(int k = 10) { return mfng::validate_measure(k, {0.25, 0.75}, {0.59, 0.43, 0.43, 0.78}); }

TEST(Measure, AcceptsIdentityMatrix) {
  const auto w = mfng::validate_measure(1, {0.5, 0.5}, {1, 0, 0, 1});
  EXPECT_EQ(w.m(), 2);
  EXPECT_EQ(w.k(), 1);
  EXPECT_EQ(w.p(0, 1), 0.0);
}

TEST(Measure, RejectsLengthsThatDoNotSumToOne) {
  EXPECT_EQ(code_of([] { mfng::validate_measure(1, {0.6, 0.6}, {1, 0, 0, 1}); }), Errc::BadLengths);
  EXPECT_EQ(code_of([] { mfng::validate_measure(1, {1.2, -0.2}, {1, 0, 0, 1}); }), Errc::BadLengths);
  EXPECT_EQ(code_of([] { mfng::validate_measure(1, {0.0, 0.0}, {1, 0, 0, 1}); }), Errc::BadLengths);
}

TEST(Measure, RenormalizesTinyDrift) {
  const auto w = mfng::validate_measure(1, {0.5 + 4e-10, 0.5}, {1, 0, 0, 1});
  EXPECT_NEAR(w.length(0) + w.length(1), 1.0, 1e-15);
}

TEST(Measure, DepthOverflowAtSixtyThreeBinaryLevels) {
  EXPECT_EQ(code_of([] { mfng::validate_measure(63, {0.5, 0.5}, {1, 0, 0, 1}); }), Errc::DepthOverflow);
  EXPECT_NO_THROW(mfng::validate_measure(62, {0.5, 0.5}, {1, 0, 0, 1}));
  EXPECT_EQ(mfng::max_depth(3), 39);
  EXPECT_EQ(code_of([] { mfng::validate_measure(0, {1.0}, {0.5}); }), Errc::Domain);
}

TEST(Measure, RejectsAsymmetricOrOutOfRange) {
  EXPECT_EQ(code_of([] { mfng::validate_measure(1, {0.5, 0.5}, {1, 0.2, 0.3, 1}); }), Errc::NonSymmetric);
  EXPECT_EQ(code_of([] { mfng::validate_measure(1, {0.5, 0.5}, {1.5, 0, 0, 1}); }), Errc::OutOfRangeProbability);
  EXPECT_EQ(code_of([] { mfng::validate_measure(1, {0.5, 0.5}, {-0.1, 0, 0, 1}); }), Errc::OutOfRangeProbability);
  EXPECT_EQ(code_of([] { mfng::validate_measure(1, {0.5, 0.5}, {1, 0, 0}); }), Errc::Domain);
}

TEST(Measure, SurvivalFactor) {
  EXPECT_DOUBLE_EQ(mfng::edge_survival_factor(mfng::validate_measure(1, {1.0}, {0.73})), 0.73);
  EXPECT_DOUBLE_EQ(mfng::edge_survival_factor(mfng::validate_measure(1, {0.5, 0.5}, {1, 0, 0, 1})), 0.5);
  // 0.036875 + 2 * 0.080625 + 0.43875
  EXPECT_NEAR(mfng::edge_survival_factor(ref_measure()), 0.636875, 1e-15);
}

TEST(Measure, WithDepthKeepsParameters) {
  const auto w = ref_measure();
  const auto w3 = w.with_depth(3);
  EXPECT_EQ(w3.k(), 3);
  EXPECT_EQ(w3.probs(), w.probs());
  EXPECT_EQ(w3.with_depth(10), w);
}

}  // namespace
