#include <gtest/gtest.h>

#include <algorithm>

#include "cxstat/error.hpp"
#include "cxstat/gradcheck.hpp"
#include "support/synthetic.hpp"

using namespace cxstat;

class EveryLoss : public ::testing::TestWithParam<LossId> {};

TEST_P(EveryLoss, RandomInstancesPass) {
  const double tol = GetParam() == LossId::contextual_image ? 1e-3 : 1e-4;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto report = gradcheck(random_problem(GetParam(), seed), {.tolerance = tol});
    EXPECT_TRUE(report.passed()) << to_string(GetParam()) << " seed " << seed << "\n"
                                 << format_gradcheck(report);
    EXPECT_GT(report.checked, 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(Losses, EveryLoss,
                         ::testing::Values(LossId::contextual, LossId::contextual_image,
                                           LossId::chamfer, LossId::lowfreq_l2, LossId::l1),
                         [](const auto& info) {
                           std::string s(to_string(info.param));
                           for (char& c : s) if (c == '-') c = '_';
                           return s;
                         });

TEST(Gradcheck, LossNamesRoundTrip) {
  for (auto id : {LossId::contextual, LossId::contextual_image, LossId::chamfer,
                  LossId::lowfreq_l2, LossId::l1}) {
    EXPECT_EQ(parse_loss_id(to_string(id)), id);
  }
  EXPECT_THROW(parse_loss_id("gan"), Error);
}

TEST(Gradcheck, ChamferTieIsFlaggedNotFailed) {
  // x0 sits exactly between its two nearest targets.
  const FeatureSet x({0.0, 0.0, 3.0, 3.0}, 2);
  const FeatureSet y({1.0, 0.0, -1.0, 0.0, 3.0, 2.0}, 2);
  const auto report = gradcheck(chamfer_problem(x, y, DistanceKind::l2));
  EXPECT_TRUE(report.passed()) << format_gradcheck(report);
  ASSERT_EQ(report.ties, (std::vector<std::size_t>{0}));
  EXPECT_NE(format_gradcheck(report).find("tie index=0"), std::string::npos);
}

TEST(Gradcheck, WrongGradientIsReported) {
  auto problem = random_problem(LossId::l1, 0);
  problem.gradient = [g = problem.gradient](std::span<const double> p) {
    auto v = g(p);
    v[3] *= -1.0;
    return v;
  };
  const auto report = gradcheck(problem);
  ASSERT_EQ(report.failures.size(), 1u);
  EXPECT_EQ(report.failures[0].index, 3u);
  const auto text = format_gradcheck(report);
  EXPECT_TRUE(text.starts_with("fail index=3 "));
  EXPECT_NE(text.find("\nmax_rel_err=2\n"), std::string::npos) << text;
}

TEST(Gradcheck, StepSweepIsUShapedForCurvedLosses) {
  // Truncation error dominates at large steps and roundoff at small ones, so
  // the smallest error sits strictly inside the sweep.
  const std::vector<double> steps{1e-3, 1e-5, 1e-7, 1e-9};
  for (auto id : {LossId::contextual, LossId::contextual_image, LossId::chamfer}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto problem = random_problem(id, seed);
      std::vector<double> err;
      for (double h : steps) err.push_back(gradcheck(problem, {.step = h}).max_abs_err);
      const auto best = std::min_element(err.begin(), err.end()) - err.begin();
      EXPECT_GT(best, 0) << to_string(id) << " seed " << seed;
      EXPECT_LT(best, 3) << to_string(id) << " seed " << seed;
    }
  }
}

TEST(Gradcheck, QuadraticAndLinearLossesOnlySeeRoundoff) {
  for (auto id : {LossId::lowfreq_l2, LossId::l1}) {
    const auto problem = random_problem(id, 1);
    double prev = 0.0;
    for (double h : {1e-3, 1e-5, 1e-7}) {
      const double e = gradcheck(problem, {.step = h}).max_abs_err;
      EXPECT_GT(e, prev) << to_string(id) << " step " << h;
      prev = e;
    }
  }
}

TEST(Gradcheck, RejectsNonPositiveStep) {
  EXPECT_THROW(gradcheck(random_problem(LossId::l1, 0), {.step = 0.0}), DomainError);
}
