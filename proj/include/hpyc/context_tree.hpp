#pragma once

// Hierarchy of Pitman-Yor restaurants indexed by truncated contexts. The
// restaurant for context u backs off to the one for u without its leftmost
// word; the empty context backs off to a uniform distribution.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hpyc/common.hpp"
#include "hpyc/crp.hpp"
#include "hpyc/hyperparameters.hpp"
#include "hpyc/random.hpp"
#include "hpyc/serialize.hpp"

namespace hpyc {

/// How a customer picks a table: from the seating posterior, or uniformly
/// among the dish's tables and a new one (used for random initialisation).
enum class SeatingMode { posterior, uniform };

class ContextTree {
 public:
  using Node = Restaurant<WordId>;
  using Level = std::unordered_map<IdSeq, Node, IdSeqHash>;

  ContextTree() : ContextTree(1, 1) {}
  ContextTree(int order, std::size_t support_size, PypParams initial = {})
      : order_(order), support_(support_size), params_(static_cast<std::size_t>(order), initial),
        levels_(static_cast<std::size_t>(order)) {
    if (order < 1 || order > kMaxOrder) throw usage_error("order must be in [1, " + std::to_string(kMaxOrder) + "]");
    if (support_size == 0) throw std::invalid_argument("empty support");
    if (!initial.valid()) throw std::invalid_argument("invalid PYP parameters");
  }

  int order() const noexcept { return order_; }
  std::size_t support_size() const noexcept { return support_; }
  double base_probability() const noexcept { return 1.0 / static_cast<double>(support_); }

  const PypParams& params(int depth) const { return params_.at(static_cast<std::size_t>(depth)); }
  void set_params(int depth, const PypParams& p) {
    if (!p.valid()) throw std::invalid_argument("invalid PYP parameters");
    params_.at(static_cast<std::size_t>(depth)) = p;
  }

  const Level& level(int depth) const { return levels_.at(static_cast<std::size_t>(depth)); }
  const Node* node(const IdSeq& context) const {
    const Level& lv = levels_.at(context.size());
    auto it = lv.find(context);
    return it == lv.end() ? nullptr : &it->second;
  }
  bool empty() const {
    return std::all_of(levels_.begin(), levels_.end(), [](const Level& l) { return l.empty(); });
  }
  std::size_t node_count() const {
    std::size_t n = 0;
    for (const Level& l : levels_) n += l.size();
    return n;
  }

  /// P(w | context), using the last order-1 ids of `context`.
  double prob(std::span<const WordId> context, WordId w) const {
    const IdSeq full = full_context(context);
    double p = base_probability();
    for (int d = 0; d < order_; ++d) {
      const Level& lv = levels_[static_cast<std::size_t>(d)];
      auto it = lv.find(full.suffix(static_cast<std::size_t>(d)));
      if (it != lv.end()) p = it->second.predictive(w, p, params_[static_cast<std::size_t>(d)]);
    }
    return p;
  }

  /// Seats a customer for w in the full-context restaurant; every new table
  /// sends a customer to the parent restaurant, down to the root.
  void insert(std::span<const WordId> context, WordId w, Rng& rng, SeatingMode mode = SeatingMode::posterior) {
    const IdSeq full = full_context(context);
    std::array<double, kMaxOrder> base{};
    std::array<Node*, kMaxOrder> nodes{};
    double p = base_probability();
    for (int d = 0; d < order_; ++d) {
      auto ud = static_cast<std::size_t>(d);
      base[ud] = p;
      auto it = levels_[ud].find(full.suffix(ud));
      nodes[ud] = it == levels_[ud].end() ? nullptr : &it->second;
      if (nodes[ud] && mode == SeatingMode::posterior) p = nodes[ud]->predictive(w, p, params_[ud]);
    }
    for (int d = order_ - 1; d >= 0; --d) {
      auto ud = static_cast<std::size_t>(d);
      Node* node = nodes[ud] ? nodes[ud] : &levels_[ud][full.suffix(ud)];
      bool opened = mode == SeatingMode::posterior ? node->seat(w, base[ud], params_[ud], rng) : node->seat_uniform(w, rng);
      if (!opened) break;
    }
  }

  /// Removes a customer for w from the full-context restaurant; an emptied
  /// table removes a customer from the parent. Empty restaurants are pruned.
  void remove(std::span<const WordId> context, WordId w, Rng& rng) {
    const IdSeq full = full_context(context);
    for (int d = order_ - 1; d >= 0; --d) {
      auto ud = static_cast<std::size_t>(d);
      auto it = levels_[ud].find(full.suffix(ud));
      if (it == levels_[ud].end()) throw std::logic_error("remove: no restaurant for context");
      bool removed = it->second.unseat(w, rng);
      if (it->second.empty()) levels_[ud].erase(it);
      if (!removed) break;
    }
  }

  SeatingStats seating_stats(int depth) const {
    SeatingStats stats;
    for (const auto& [ctx, node] : level(depth)) stats.add(node);
    return stats;
  }

  /// log P(seating arrangement) over all restaurants plus the uniform base
  /// draws of the root tables.
  double log_likelihood() const {
    double ll = 0.0;
    for (int d = 0; d < order_; ++d) ll += seating_stats(d).log_likelihood(params(d));
    std::uint64_t root_tables = 0;
    for (const auto& [ctx, node] : level(0)) root_tables += node.tables();
    return ll + static_cast<double>(root_tables) * std::log(base_probability());
  }

  void resample_hyperparameters(Rng& rng, const HyperPriors& priors = {}) {
    for (int d = 0; d < order_; ++d) resample_pyp_params(seating_stats(d), params_[static_cast<std::size_t>(d)], rng, priors);
  }

  /// Checks that every restaurant's customers for a dish equal the tables
  /// serving that dish across its child restaurants. Returns the first
  /// violation, or nothing when consistent.
  std::optional<std::string> audit() const {
    for (int d = 0; d < order_; ++d) {
      for (const auto& [ctx, node] : level(d)) {
        if (node.empty()) return "empty restaurant kept at depth " + std::to_string(d);
        if (auto err = audit_restaurant(node)) return *err + " at depth " + std::to_string(d);
      }
    }
    for (int d = 0; d + 1 < order_; ++d) {
      std::map<std::pair<IdSeq, WordId>, std::uint64_t> expected;
      for (const auto& [ctx, node] : level(d + 1))
        for (const auto& e : node.dishes())
          expected[{ctx.suffix(static_cast<std::size_t>(d)), e.dish}] += e.tables.tables();
      std::uint64_t checked = 0;
      for (const auto& [ctx, node] : level(d)) {
        for (const auto& e : node.dishes()) {
          auto it = expected.find({ctx, e.dish});
          std::uint64_t want = it == expected.end() ? 0 : it->second;
          if (want != e.tables.customers()) {
            std::ostringstream os;
            os << "depth " << d << " dish " << e.dish << ": " << e.tables.customers() << " customers but " << want
               << " child tables";
            return os.str();
          }
          ++checked;
        }
      }
      if (checked != expected.size()) return "child tables without parent customers at depth " + std::to_string(d);
    }
    return std::nullopt;
  }

  friend bool operator==(const ContextTree& x, const ContextTree& y) {
    return x.order_ == y.order_ && x.support_ == y.support_ && x.params_ == y.params_ && x.levels_ == y.levels_;
  }

  void write(BinaryWriter& w) const {
    w.u32(static_cast<std::uint32_t>(order_));
    w.u64(support_);
    for (const PypParams& p : params_) w.params(p);
    for (const Level& lv : levels_) {
      std::vector<const IdSeq*> keys;
      keys.reserve(lv.size());
      for (const auto& kv : lv) keys.push_back(&kv.first);
      std::sort(keys.begin(), keys.end(), [](const IdSeq* a, const IdSeq* b) { return *a < *b; });
      w.u64(keys.size());
      for (const IdSeq* k : keys) {
        w.ids(*k);
        write_restaurant(w, lv.at(*k));
      }
    }
  }

  static ContextTree read(BinaryReader& rd) {
    int order = static_cast<int>(rd.u32());
    std::uint64_t support = rd.u64();
    if (order < 1 || order > kMaxOrder || support == 0) throw format_error("corrupt context tree header");
    ContextTree t(order, support);
    for (int d = 0; d < order; ++d) t.params_[static_cast<std::size_t>(d)] = rd.params();
    for (int d = 0; d < order; ++d) {
      std::uint64_t n = rd.u64();
      Level& lv = t.levels_[static_cast<std::size_t>(d)];
      lv.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        IdSeq key = rd.ids();
        if (key.size() != static_cast<std::size_t>(d)) throw format_error("context length does not match depth");
        lv.emplace(key, read_restaurant<Node>(rd));
      }
    }
    return t;
  }

 private:
  IdSeq full_context(std::span<const WordId> context) const {
    const auto need = static_cast<std::size_t>(order_ - 1);
    if (context.size() < need) throw std::invalid_argument("context shorter than order - 1");
    return IdSeq(context.subspan(context.size() - need));
  }

  static std::optional<std::string> audit_restaurant(const Node& node) {
    std::uint64_t customers = 0, tables = 0;
    for (const auto& e : node.dishes()) {
      std::uint64_t n = 0, m = 0;
      for (const auto& b : e.tables.buckets()) {
        if (b.occupancy == 0 || b.tables == 0) return std::string("zero histogram entry");
        n += std::uint64_t{b.occupancy} * b.tables;
        m += b.tables;
      }
      if (n != e.tables.customers() || m != e.tables.tables()) return std::string("histogram totals out of sync");
      if (m > n) return std::string("more tables than customers");
      customers += n;
      tables += m;
    }
    if (customers != node.customers() || tables != node.tables()) return std::string("restaurant totals out of sync");
    return std::nullopt;
  }

  int order_;
  std::size_t support_;
  std::vector<PypParams> params_;
  std::vector<Level> levels_;
};

}  // namespace hpyc
