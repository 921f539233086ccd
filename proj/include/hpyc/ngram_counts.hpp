#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hpyc/common.hpp"
#include "hpyc/corpus.hpp"
#include "hpyc/serialize.hpp"

namespace hpyc {

/// Raw counts of the full-order training events (context + target). Every
/// lower-order surface k-gram of the training data is a suffix of one of
/// these, because contexts are BOS-padded to full length.
class NgramCounts {
 public:
  using Map = std::unordered_map<IdSeq, std::uint32_t, IdSeqHash>;

  NgramCounts() = default;
  explicit NgramCounts(int order) : order_(order) {}

  static NgramCounts from_events(std::span<const Event> events, int order) {
    NgramCounts c(order);
    for (const Event& e : events) c.add(e);
    return c;
  }

  void add(const Event& e, std::uint32_t count = 1) { counts_[e.context.extended(e.target)] += count; }

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return counts_.size(); }
  const Map& map() const noexcept { return counts_; }
  std::uint32_t count(const IdSeq& ngram) const {
    auto it = counts_.find(ngram);
    return it == counts_.end() ? 0 : it->second;
  }

  /// Entries sorted by n-gram, for deterministic output.
  std::vector<std::pair<IdSeq, std::uint32_t>> sorted() const {
    std::vector<std::pair<IdSeq, std::uint32_t>> out(counts_.begin(), counts_.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

  void write(BinaryWriter& w) const {
    w.u32(static_cast<std::uint32_t>(order_));
    w.u64(counts_.size());
    for (const auto& [g, c] : sorted()) {
      w.ids(g);
      w.u32(c);
    }
  }

  static NgramCounts read(BinaryReader& rd) {
    NgramCounts c(static_cast<int>(rd.u32()));
    std::uint64_t n = rd.u64();
    c.counts_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      IdSeq g = rd.ids();
      if (g.size() != static_cast<std::size_t>(c.order_)) throw format_error("n-gram length does not match order");
      c.counts_[g] = rd.u32();
    }
    return c;
  }

  friend bool operator==(const NgramCounts&, const NgramCounts&) = default;

 private:
  int order_ = 1;
  Map counts_;
};

}  // namespace hpyc
