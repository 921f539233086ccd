#pragma once

// Pitman-Yor Chinese restaurant with histogram table bookkeeping.
//
// A restaurant never stores individual tables. For every dish it keeps a
// histogram occupancy -> number of tables, which is all the seating rule and
// the joint seating probability depend on (tables are exchangeable).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "hpyc/common.hpp"
#include "hpyc/random.hpp"

namespace hpyc {

/// Discount `discount` in [0, 1) and strength `strength` > -discount.
struct PypParams {
  double discount = 0.5;
  double strength = 1.0;

  bool valid() const noexcept { return discount >= 0.0 && discount < 1.0 && strength > -discount; }
  friend bool operator==(const PypParams&, const PypParams&) = default;
};

/// Occupancy histogram of the tables serving one dish.
class TableHistogram {
 public:
  struct Bucket {
    std::uint32_t occupancy;
    std::uint32_t tables;
    friend bool operator==(const Bucket&, const Bucket&) = default;
  };

  std::uint32_t customers() const noexcept { return customers_; }
  std::uint32_t tables() const noexcept { return tables_; }
  bool empty() const noexcept { return tables_ == 0; }
  std::span<const Bucket> buckets() const noexcept { return {buckets_.data(), buckets_.size()}; }

  /// Adds `count` tables that each seat `occupancy` customers.
  void add_tables(std::uint32_t occupancy, std::uint32_t count = 1) {
    if (occupancy == 0 || count == 0) throw std::invalid_argument("empty table");
    bump(occupancy, static_cast<std::int64_t>(count));
    customers_ += occupancy * count;
    tables_ += count;
  }

  /// One table grows from `occupancy` to `occupancy + 1` customers.
  void grow(std::uint32_t occupancy) {
    bump(occupancy, -1);
    bump(occupancy + 1, 1);
    ++customers_;
  }

  /// One table shrinks from `occupancy` to `occupancy - 1`; returns true when
  /// the table became empty and was removed.
  bool shrink(std::uint32_t occupancy) {
    bump(occupancy, -1);
    --customers_;
    if (occupancy == 1) {
      --tables_;
      return true;
    }
    bump(occupancy - 1, 1);
    return false;
  }

  friend bool operator==(const TableHistogram& x, const TableHistogram& y) {
    return x.customers_ == y.customers_ && x.tables_ == y.tables_ &&
           std::equal(x.buckets_.begin(), x.buckets_.end(), y.buckets_.begin(), y.buckets_.end());
  }

 private:
  void bump(std::uint32_t occupancy, std::int64_t delta) {
    auto it = std::lower_bound(buckets_.begin(), buckets_.end(), occupancy,
                               [](const Bucket& b, std::uint32_t t) { return b.occupancy < t; });
    if (it != buckets_.end() && it->occupancy == occupancy) {
      std::int64_t updated = static_cast<std::int64_t>(it->tables) + delta;
      if (updated < 0) throw std::logic_error("table histogram underflow");
      if (updated == 0)
        buckets_.erase(it);
      else
        it->tables = static_cast<std::uint32_t>(updated);
    } else {
      if (delta < 0) throw std::logic_error("no table with the requested occupancy");
      buckets_.insert(it, Bucket{occupancy, static_cast<std::uint32_t>(delta)});
    }
  }

  boost::container::small_vector<Bucket, 1> buckets_;
  std::uint32_t customers_ = 0;
  std::uint32_t tables_ = 0;
};

/// Log of the probability of a seating arrangement with the given table
/// occupancies, in closed form with log-gamma.
inline double log_joint_seating(std::span<const std::uint32_t> table_sizes, double discount, double strength) {
  if (table_sizes.empty()) return 0.0;
  double n = 0.0;
  double tables_term = 0.0;
  const double lg_one = std::lgamma(1.0 - discount);
  for (std::uint32_t t : table_sizes) {
    n += t;
    tables_term += std::lgamma(t - discount) - lg_one;
  }
  double opening = 0.0;
  for (std::size_t k = 1; k < table_sizes.size(); ++k) opening += std::log(discount * static_cast<double>(k) + strength);
  return std::lgamma(1.0 + strength) - std::lgamma(n + strength) + opening + tables_term;
}

template <class Dish = WordId, class Hash = IdHash>
class Restaurant {
 public:
  struct Entry {
    Dish dish;
    TableHistogram tables;
  };

  Restaurant() = default;
  Restaurant(const Restaurant& other)
      : entries_(other.entries_), customers_(other.customers_), tables_(other.tables_) {
    rebuild_index();
  }
  Restaurant& operator=(const Restaurant& other) {
    if (this != &other) {
      entries_ = other.entries_;
      customers_ = other.customers_;
      tables_ = other.tables_;
      rebuild_index();
    }
    return *this;
  }
  Restaurant(Restaurant&&) noexcept = default;
  Restaurant& operator=(Restaurant&&) noexcept = default;

  std::uint64_t customers() const noexcept { return customers_; }
  std::uint64_t tables() const noexcept { return tables_; }
  bool empty() const noexcept { return customers_ == 0; }
  std::size_t dish_count() const noexcept { return entries_.size(); }
  std::span<const Entry> dishes() const noexcept { return entries_; }

  const TableHistogram* find(const Dish& dish) const {
    std::size_t i = locate(dish);
    return i == npos ? nullptr : &entries_[i].tables;
  }
  std::uint32_t customers(const Dish& dish) const {
    const TableHistogram* h = find(dish);
    return h ? h->customers() : 0;
  }
  std::uint32_t tables(const Dish& dish) const {
    const TableHistogram* h = find(dish);
    return h ? h->tables() : 0;
  }

  /// (N_w - a m_w + (a m + b) p_base) / (n + b); p_base when empty.
  double predictive(const Dish& dish, double p_base, const PypParams& params) const {
    if (customers_ == 0) return p_base;
    const double a = params.discount;
    const double b = params.strength;
    double cached = 0.0;
    if (const TableHistogram* h = find(dish)) cached = h->customers() - a * h->tables();
    return (cached + (a * static_cast<double>(tables_) + b) * p_base) / (static_cast<double>(customers_) + b);
  }

  /// Seats one customer eating `dish`. Returns true when a new table opened,
  /// i.e. the base distribution must receive a customer too.
  bool seat(const Dish& dish, double p_base, const PypParams& params, Rng& rng) {
    if (!(p_base >= 0.0 && p_base <= 1.0)) throw std::invalid_argument("base probability outside [0, 1]");
    std::size_t i = locate(dish);
    if (i == npos) {
      open_table(dish);
      return true;
    }
    TableHistogram& hist = entries_[i].tables;
    const double a = params.discount;
    const double join_mass = hist.customers() - a * hist.tables();
    const double new_mass = (a * static_cast<double>(tables_) + params.strength) * p_base;
    double r = rng.uniform01() * (join_mass + new_mass);
    if (r < new_mass) {
      hist.add_tables(1);
      ++customers_;
      ++tables_;
      return true;
    }
    r -= new_mass;
    hist.grow(pick_bucket(hist, r, a));
    ++customers_;
    return false;
  }

  /// Initialisation move: the customer picks uniformly among the m_w
  /// existing tables of the dish and one new table.
  bool seat_uniform(const Dish& dish, Rng& rng) {
    std::size_t i = locate(dish);
    if (i == npos) {
      open_table(dish);
      return true;
    }
    TableHistogram& hist = entries_[i].tables;
    std::uint64_t choice = rng.below(std::uint64_t{hist.tables()} + 1);
    if (choice == hist.tables()) {
      hist.add_tables(1);
      ++customers_;
      ++tables_;
      return true;
    }
    for (const auto& bucket : hist.buckets()) {
      if (choice < bucket.tables) {
        hist.grow(bucket.occupancy);
        break;
      }
      choice -= bucket.tables;
    }
    ++customers_;
    return false;
  }

  /// Removes one customer of `dish`, choosing the table proportionally to its
  /// occupancy. Returns true when that table became empty.
  bool unseat(const Dish& dish, Rng& rng) {
    std::size_t i = locate(dish);
    if (i == npos) throw std::logic_error("unseat: dish has no customers");
    TableHistogram& hist = entries_[i].tables;
    double r = rng.uniform01() * hist.customers();
    std::uint32_t occupancy = hist.buckets().back().occupancy;
    for (const auto& bucket : hist.buckets()) {
      double mass = static_cast<double>(bucket.occupancy) * bucket.tables;
      if (r < mass) {
        occupancy = bucket.occupancy;
        break;
      }
      r -= mass;
    }
    bool removed = hist.shrink(occupancy);
    --customers_;
    if (removed) --tables_;
    if (hist.empty()) erase_at(i);
    return removed;
  }

  /// Inserts tables verbatim (deserialisation and tests).
  void add_tables(const Dish& dish, std::uint32_t occupancy, std::uint32_t count = 1) {
    std::size_t i = locate(dish);
    if (i == npos) {
      i = entries_.size();
      entries_.push_back(Entry{dish, {}});
      index_insert(dish, i);
    }
    entries_[i].tables.add_tables(occupancy, count);
    customers_ += std::uint64_t{occupancy} * count;
    tables_ += count;
  }

  /// Log probability of the current table partition under (a, b).
  double log_seating_probability(const PypParams& params) const {
    if (customers_ == 0) return 0.0;
    const double a = params.discount;
    const double b = params.strength;
    const double lg_one = std::lgamma(1.0 - a);
    double tables_term = 0.0;
    for (const Entry& e : entries_)
      for (const auto& bucket : e.tables.buckets())
        tables_term += bucket.tables * (std::lgamma(bucket.occupancy - a) - lg_one);
    double opening = 0.0;
    for (std::uint64_t k = 1; k < tables_; ++k) opening += std::log(a * static_cast<double>(k) + b);
    return std::lgamma(1.0 + b) - std::lgamma(static_cast<double>(customers_) + b) + opening + tables_term;
  }

  friend bool operator==(const Restaurant& x, const Restaurant& y) {
    if (x.customers_ != y.customers_ || x.tables_ != y.tables_ || x.entries_.size() != y.entries_.size())
      return false;
    for (const Entry& e : x.entries_) {
      const TableHistogram* other = y.find(e.dish);
      if (!other || !(*other == e.tables)) return false;
    }
    return true;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  static constexpr std::size_t kIndexThreshold = 16;

  // Joins a table of the dish: bucket chosen with weight (t - a) * tables(t).
  static std::uint32_t pick_bucket(const TableHistogram& hist, double r, double a) {
    for (const auto& bucket : hist.buckets()) {
      double mass = (bucket.occupancy - a) * bucket.tables;
      if (r < mass) return bucket.occupancy;
      r -= mass;
    }
    return hist.buckets().back().occupancy;
  }

  void open_table(const Dish& dish) {
    std::size_t i = locate(dish);
    if (i == npos) {
      i = entries_.size();
      entries_.push_back(Entry{dish, {}});
      index_insert(dish, i);
    }
    entries_[i].tables.add_tables(1);
    ++customers_;
    ++tables_;
  }

  std::size_t locate(const Dish& dish) const {
    if (index_) {
      auto it = index_->find(dish);
      return it == index_->end() ? npos : it->second;
    }
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].dish == dish) return i;
    return npos;
  }

  void index_insert(const Dish& dish, std::size_t i) {
    if (index_) {
      index_->emplace(dish, static_cast<std::uint32_t>(i));
    } else if (entries_.size() > kIndexThreshold) {
      rebuild_index();
    }
  }

  void rebuild_index() {
    index_.reset();
    if (entries_.size() <= kIndexThreshold) return;
    index_ = std::make_unique<std::unordered_map<Dish, std::uint32_t, Hash>>();
    index_->reserve(entries_.size() * 2);
    for (std::size_t i = 0; i < entries_.size(); ++i) index_->emplace(entries_[i].dish, static_cast<std::uint32_t>(i));
  }

  void erase_at(std::size_t i) {
    if (index_) index_->erase(entries_[i].dish);
    if (i + 1 != entries_.size()) {
      entries_[i] = std::move(entries_.back());
      if (index_) (*index_)[entries_[i].dish] = static_cast<std::uint32_t>(i);
    }
    entries_.pop_back();
    if (entries_.empty()) {
      entries_.shrink_to_fit();
      index_.reset();
    }
  }

  std::vector<Entry> entries_;
  std::unique_ptr<std::unordered_map<Dish, std::uint32_t, Hash>> index_;
  std::uint64_t customers_ = 0;
  std::uint64_t tables_ = 0;
};

/// Sufficient statistics of many restaurants that share one (a, b), for
/// evaluating their joint seating likelihood quickly while resampling (a, b).
class SeatingStats {
 public:
  template <class R>
  void add(const R& restaurant) {
    if (restaurant.empty()) return;
    bump(customer_totals_, restaurant.customers(), 1);
    bump(table_totals_, restaurant.tables(), 1);
    for (const auto& e : restaurant.dishes())
      for (const auto& bucket : e.tables.buckets()) bump(occupancies_, bucket.occupancy, bucket.tables);
    ++restaurants_;
    compact_.reset();
  }

  std::uint64_t restaurants() const noexcept { return restaurants_; }
  bool empty() const noexcept { return restaurants_ == 0; }

  /// Sum over the added restaurants of their log seating probability.
  double log_likelihood(const PypParams& params) const {
    if (!compact_) compact_ = compact();
    const Compact& c = *compact_;
    const double a = params.discount;
    const double b = params.strength;
    double total = 0.0;
    const double lg_b = std::lgamma(1.0 + b);
    for (const auto& [n, count] : c.customers) total += count * (lg_b - std::lgamma(static_cast<double>(n) + b));
    const double lg_one = std::lgamma(1.0 - a);
    for (const auto& [t, count] : c.occupancies) total += count * (std::lgamma(t - a) - lg_one);
    // sum_r sum_{k=1}^{m_r - 1} log(a k + b) = sum_k #{r : m_r > k} log(a k + b)
    std::uint64_t remaining = restaurants_;
    auto it = c.tables.begin();
    const std::uint64_t max_tables = c.tables.empty() ? 0 : c.tables.back().first;
    for (std::uint64_t k = 1; k < max_tables; ++k) {
      while (it != c.tables.end() && it->first <= k) {
        remaining -= it->second;
        ++it;
      }
      total += remaining * std::log(a * static_cast<double>(k) + b);
    }
    return total;
  }

 private:
  using Pairs = std::vector<std::pair<std::uint64_t, std::uint64_t>>;
  struct Compact {
    Pairs customers, tables, occupancies;
  };

  static void bump(std::vector<std::uint64_t>& v, std::uint64_t at, std::uint64_t by) {
    if (at >= v.size()) v.resize(std::max<std::size_t>(at + 1, 2 * v.size()), 0);
    v[at] += by;
  }

  static Pairs nonzero(const std::vector<std::uint64_t>& v) {
    Pairs out;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i]) out.emplace_back(i, v[i]);
    return out;
  }

  Compact compact() const { return {nonzero(customer_totals_), nonzero(table_totals_), nonzero(occupancies_)}; }

  std::vector<std::uint64_t> customer_totals_, table_totals_, occupancies_;
  std::uint64_t restaurants_ = 0;
  mutable std::optional<Compact> compact_;
};

}  // namespace hpyc
