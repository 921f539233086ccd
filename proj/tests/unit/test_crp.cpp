#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hpyc/crp.hpp"

using namespace hpyc;

namespace {

// Explicit-table CRP: every table is a separate entry. Returns the log
// probability of a seating sequence, customer by customer.
double sequential_log_prob(const std::vector<std::size_t>& choices, double a, double b,
                           std::vector<std::uint32_t>* tables_out = nullptr) {
  std::vector<std::uint32_t> tables;
  double lp = 0.0;
  double n = 0.0;
  for (std::size_t k : choices) {
    if (k >= tables.size()) {
      lp += n == 0.0 ? 0.0 : std::log((a * tables.size() + b) / (n + b));
      tables.push_back(1);
    } else {
      lp += std::log((tables[k] - a) / (n + b));
      ++tables[k];
    }
    n += 1.0;
  }
  if (tables_out) *tables_out = tables;
  return lp;
}

std::vector<std::size_t> random_choices(Rng& rng, std::size_t n) {
  std::vector<std::size_t> out;
  std::size_t tables = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = rng.below(tables + 1);
    if (k == tables) ++tables;
    out.push_back(k);
  }
  return out;
}

}  // namespace

TEST(Restaurant, FirstCustomerOpensTable) {
  Restaurant<> r;
  Rng rng(1);
  EXPECT_TRUE(r.seat(7, 0.3, {}, rng));
  EXPECT_EQ(r.customers(), 1u);
  EXPECT_EQ(r.tables(7), 1u);
}

TEST(Restaurant, JoinVersusNewTableFrequencies) {
  Rng rng(2);
  const PypParams py{0.5, 1.0}, dp{0.0, 1.0};
  int opened_py = 0, opened_dp = 0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) {
    Restaurant<> r;
    r.add_tables(3, 1);
    opened_py += r.seat(3, 1.0, py, rng);
    Restaurant<> s;
    s.add_tables(3, 1);
    opened_dp += s.seat(3, 1.0, dp, rng);
  }
  EXPECT_NEAR(opened_py / double(trials), 0.75, 0.005);
  EXPECT_NEAR(opened_dp / double(trials), 0.5, 0.005);
}

TEST(Restaurant, UnseatLastCustomerDeletesDish) {
  Restaurant<> r;
  Rng rng(3);
  r.seat(4, 0.5, {}, rng);
  EXPECT_TRUE(r.unseat(4, rng));
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r.dish_count(), 0u);
  EXPECT_EQ(r.find(4), nullptr);
}

TEST(Restaurant, UnseatAbsentDishIsLogicError) {
  Restaurant<> r;
  Rng rng(3);
  EXPECT_THROW(r.unseat(1, rng), std::logic_error);
}

TEST(Restaurant, SeatRejectsBadBase) {
  Restaurant<> r;
  Rng rng(3);
  EXPECT_THROW(r.seat(1, 1.5, {}, rng), std::invalid_argument);
  EXPECT_THROW(r.seat(1, -0.1, {}, rng), std::invalid_argument);
}

TEST(Restaurant, UnseatPicksTableByOccupancy) {
  Rng rng(4);
  int picked_big = 0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) {
    Restaurant<> r;
    r.add_tables(9, 3, 1);
    r.add_tables(9, 1, 1);
    bool removed = r.unseat(9, rng);
    if (!removed) ++picked_big;
  }
  EXPECT_NEAR(picked_big / double(trials), 0.75, 0.005);
}

TEST(Restaurant, PredictiveHandExample) {
  Restaurant<> r;
  r.add_tables(1, 2, 1);
  r.add_tables(1, 1, 1);
  r.add_tables(2, 2, 1);
  ASSERT_EQ(r.customers(), 5u);
  ASSERT_EQ(r.tables(), 3u);
  EXPECT_DOUBLE_EQ(r.predictive(1, 0.1, {0.5, 1.0}), 0.375);
  EXPECT_DOUBLE_EQ(Restaurant<>{}.predictive(1, 0.07, {0.5, 1.0}), 0.07);
}

TEST(Restaurant, PredictiveSumsToOne) {
  Rng rng(5);
  const PypParams p{0.3, 2.0};
  const int k = 6;
  Restaurant<> r;
  for (int i = 0; i < 40; ++i) r.seat(static_cast<WordId>(rng.below(k)), 1.0 / k, p, rng);
  double sum = 0.0;
  for (int w = 0; w < k; ++w) sum += r.predictive(w, 1.0 / k, p);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Restaurant, DiscountZeroIsDirichletProcess) {
  Restaurant<> r;
  r.add_tables(1, 3, 2);
  r.add_tables(2, 1, 1);
  const double b = 1.7, p0 = 0.2;
  EXPECT_NEAR(r.predictive(1, p0, {0.0, b}), (6 + b * p0) / (7 + b), 1e-15);
}

TEST(LogJointSeating, HandValues) {
  const std::vector<std::uint32_t> t21{2, 1}, t1{1};
  EXPECT_NEAR(std::exp(log_joint_seating(t21, 0.5, 1.0)), 0.125, 1e-14);
  EXPECT_NEAR(log_joint_seating(t1, 0.3, 4.0), 0.0, 1e-14);
}

TEST(LogJointSeating, MatchesSequentialProduct) {
  Rng rng(6);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = 0.95 * rng.uniform01();
    const double b = 5.0 * (1.0 - rng.uniform01());
    std::vector<std::uint32_t> tables;
    const double seq = sequential_log_prob(random_choices(rng, 1 + rng.below(50)), a, b, &tables);
    EXPECT_NEAR(log_joint_seating(tables, a, b), seq, 1e-10);
  }
}

TEST(LogJointSeating, Exchangeable) {
  // Same table multiset reached through different customer orders.
  const double a = 0.4, b = 0.8;
  const std::vector<std::size_t> first{0, 0, 1, 0, 2, 1};  // tables {3, 2, 1}
  const std::vector<std::size_t> second{0, 1, 2, 1, 1, 0};  // tables {2, 3, 1}
  std::vector<std::uint32_t> t1, t2;
  const double l1 = sequential_log_prob(first, a, b, &t1), l2 = sequential_log_prob(second, a, b, &t2);
  std::sort(t1.begin(), t1.end());
  std::sort(t2.begin(), t2.end());
  ASSERT_EQ(t1, t2);
  EXPECT_NEAR(l1, l2, 1e-12);
}

TEST(Restaurant, SeatingProbabilityMatchesClosedForm) {
  Restaurant<> r;
  r.add_tables(1, 3, 2);
  r.add_tables(1, 1, 1);
  r.add_tables(5, 2, 1);
  const std::vector<std::uint32_t> sizes{3, 3, 1, 2};
  EXPECT_NEAR(r.log_seating_probability({0.25, 1.5}), log_joint_seating(sizes, 0.25, 1.5), 1e-12);
}

TEST(SeatingStats, SumsRestaurants) {
  Rng rng(7);
  std::vector<Restaurant<>> rs(5);
  const PypParams p{0.6, 0.9};
  for (auto& r : rs)
    for (int i = 0, n = 1 + static_cast<int>(rng.below(30)); i < n; ++i) r.seat(rng.below(4), 0.25, p, rng);
  SeatingStats stats;
  double direct = 0.0;
  for (const auto& r : rs) {
    stats.add(r);
    direct += r.log_seating_probability({0.2, 3.0});
  }
  EXPECT_EQ(stats.restaurants(), 5u);
  EXPECT_NEAR(stats.log_likelihood({0.2, 3.0}), direct, 1e-9);
}

TEST(Restaurant, FuzzHistogramInvariants) {
  Rng rng(8);
  Restaurant<> r;
  const PypParams p{0.4, 1.0};
  for (int step = 0; step < 100000; ++step) {
    const WordId w = static_cast<WordId>(rng.below(30));
    if (r.customers(w) > 0 && rng.uniform01() < 0.45)
      r.unseat(w, rng);
    else
      r.seat(w, 1.0 / 30, p, rng);
    if (step % 997 == 0) {
      std::uint64_t n = 0, m = 0;
      for (const auto& e : r.dishes()) {
        std::uint32_t nw = 0, mw = 0;
        for (const auto& bk : e.tables.buckets()) {
          nw += bk.occupancy * bk.tables;
          mw += bk.tables;
        }
        ASSERT_EQ(nw, e.tables.customers());
        ASSERT_EQ(mw, e.tables.tables());
        ASSERT_LE(mw, nw);
        n += nw;
        m += mw;
      }
      ASSERT_EQ(n, r.customers());
      ASSERT_EQ(m, r.tables());
    }
  }
}

TEST(Restaurant, GibbsReseatingKeepsStationaryTableCount) {
  // One dish, p_base = 1, DP(1): E[tables] with 10 customers is H_10.
  Rng rng(9);
  Restaurant<> r;
  r.add_tables(0, 10, 1);
  const PypParams dp{0.0, 1.0};
  double sum = 0.0;
  const int steps = 200000;
  for (int i = 0; i < steps; ++i) {
    r.unseat(0, rng);
    r.seat(0, 1.0, dp, rng);
    sum += static_cast<double>(r.tables());
  }
  double harmonic = 0.0;
  for (int i = 1; i <= 10; ++i) harmonic += 1.0 / i;
  EXPECT_NEAR(sum / steps, harmonic, 0.05);
}

TEST(Restaurant, CopyAndEqualityIgnoreDishOrder) {
  Restaurant<> a, b;
  for (WordId w = 0; w < 40; ++w) a.add_tables(w, 1 + w % 3, 1);
  for (WordId w = 40; w-- > 0;) b.add_tables(w, 1 + w % 3, 1);
  EXPECT_TRUE(a == b);
  Restaurant<> c = a;
  EXPECT_TRUE(c == a);
  EXPECT_EQ(c.customers(17), a.customers(17));
}
