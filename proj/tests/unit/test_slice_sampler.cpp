#include <gtest/gtest.h>

#include <cmath>

#include "hpyc/hyperparameters.hpp"
#include "hpyc/slice_sampler.hpp"

using namespace hpyc;

TEST(SliceSampler, StandardNormalMoments) {
  Rng rng(11);
  double x = 0.3, sum = 0.0, sq = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    x = slice_sample([](double v) { return -0.5 * v * v; }, x, 1.0, -INFINITY, INFINITY, rng).value;
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.04);
}

TEST(SliceSampler, AcceptedPointIsAboveLevel) {
  Rng rng(12);
  auto f = [](double v) { return std::log(v) * 2.0 + std::log1p(-v); };
  double x = 0.5;
  for (int i = 0; i < 1000; ++i) {
    SliceResult r = slice_sample(f, x, 0.1, 0.0, 1.0, rng);
    ASSERT_GT(r.value, 0.0);
    ASSERT_LT(r.value, 1.0);
    ASSERT_GE(r.log_density, r.log_level);
    x = r.value;
  }
}

TEST(SliceSampler, RejectsStartOutsideSupport) {
  Rng rng(13);
  auto f = [](double) { return 0.0; };
  EXPECT_THROW(slice_sample(f, 1.5, 0.1, 0.0, 1.0, rng), std::invalid_argument);
}

TEST(Hyperparameters, PriorRecoveryWithoutData) {
  Rng rng(14);
  SeatingStats empty;
  PypParams p;
  double sa = 0.0, sb = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    resample_pyp_params(empty, p, rng, HyperPriors{});
    ASSERT_TRUE(p.discount >= 0.0 && p.discount < 1.0);
    ASSERT_GT(p.strength, 0.0);
    sa += p.discount;
    sb += p.strength;
  }
  EXPECT_NEAR(sa / n, 0.5, 0.025);
  EXPECT_NEAR(sb / n, 1.0, 0.05);
}
