#pragma once

// Interpolated modified Kneser-Ney with three discounts per order. The top
// order uses raw counts; lower orders use continuation counts (the number of
// distinct words seen to the left of the k-gram).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hpyc/common.hpp"
#include "hpyc/corpus.hpp"
#include "hpyc/ngram_counts.hpp"
#include "hpyc/serialize.hpp"

namespace hpyc {

/// D_1, D_2, D_3+ for one order.
using Discounts = std::array<double, 3>;

/// Counts-of-counts n_1..n_4 -> discounts. A discount whose formula would
/// divide by zero falls back to 0.5, 1.0 or 1.5; each is clipped to [0, m].
inline Discounts estimate_discounts(const std::array<std::uint64_t, 4>& n) {
  const Discounts fallback{0.5, 1.0, 1.5};
  Discounts d = fallback;
  const double n1 = static_cast<double>(n[0]), n2 = static_cast<double>(n[1]), n3 = static_cast<double>(n[2]),
               n4 = static_cast<double>(n[3]);
  if (n1 + 2.0 * n2 > 0.0) {
    const double y = n1 / (n1 + 2.0 * n2);
    if (n1 > 0.0) d[0] = 1.0 - 2.0 * y * n2 / n1;
    if (n2 > 0.0) d[1] = 2.0 - 3.0 * y * n3 / n2;
    if (n3 > 0.0) d[2] = 3.0 - 4.0 * y * n4 / n3;
  }
  for (std::size_t m = 0; m < 3; ++m) d[m] = std::clamp(d[m], 0.0, static_cast<double>(m + 1));
  return d;
}

struct MknOptions {
  /// When false the top order is the plain relative frequency (diagnostic).
  bool top_order_discounting = true;
};

class MknModel {
 public:
  struct ContextStats {
    std::uint64_t total = 0;  // sum of counts following the context
    std::array<std::uint64_t, 3> types{};  // distinct words with count 1, 2, 3+
  };

  MknModel() = default;

  /// Estimates from the full-order training n-grams (BOS-padded contexts).
  MknModel(Vocabulary vocab, NgramCounts counts, MknOptions options = {})
      : vocab_(std::move(vocab)), options_(options), training_(std::move(counts)) {
    order_ = training_.order();
    if (order_ < 1 || order_ > kMaxOrder) throw usage_error("order must be in [1, " + std::to_string(kMaxOrder) + "]");
    const auto n = static_cast<std::size_t>(order_);
    grams_.assign(n, {});
    contexts_.assign(n, {});
    discounts_.assign(n, {});
    grams_[n - 1] = training_.map();
    // Continuation counts: a k-gram's count is the number of distinct
    // (k+1)-grams that end with it.
    for (std::size_t k = n - 1; k >= 1; --k) {
      for (const auto& [g, c] : grams_[k]) ++grams_[k - 1][g.suffix(k)];
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::array<std::uint64_t, 4> coc{};
      for (const auto& [g, c] : grams_[k]) {
        if (c >= 1 && c <= 4) ++coc[c - 1];
        ContextStats& st = contexts_[k][IdSeq(g.view().first(k))];
        st.total += c;
        ++st.types[std::min<std::uint32_t>(c, 3) - 1];
      }
      discounts_[k] = estimate_discounts(coc);
      if (k == n - 1 && !options_.top_order_discounting) discounts_[k] = {0.0, 0.0, 0.0};
    }
  }

  int order() const noexcept { return order_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const NgramCounts& training_counts() const noexcept { return training_; }
  const MknOptions& options() const noexcept { return options_; }
  /// Discounts of the k-gram level, k = 1..order.
  const Discounts& discounts(int k) const { return discounts_.at(static_cast<std::size_t>(k - 1)); }
  /// Count used at the k-gram level: raw at the top, continuation below.
  std::uint32_t count(const IdSeq& kgram) const {
    const auto& m = grams_.at(kgram.size() - 1);
    auto it = m.find(kgram);
    return it == m.end() ? 0 : it->second;
  }
  const ContextStats* context_stats(const IdSeq& context) const {
    const auto& m = contexts_.at(context.size());
    auto it = m.find(context);
    return it == m.end() ? nullptr : &it->second;
  }

  double uniform() const { return 1.0 / static_cast<double>(vocab_.support_size()); }

  /// Back-off weight of a seen context: the discounted mass.
  double gamma(const IdSeq& context) const {
    const ContextStats* st = context_stats(context);
    if (!st) return 1.0;
    const Discounts& d = discounts_[context.size()];
    return (d[0] * st->types[0] + d[1] * st->types[1] + d[2] * st->types[2]) / static_cast<double>(st->total);
  }

  double prob(std::span<const WordId> context, WordId w) const {
    const auto need = static_cast<std::size_t>(order_ - 1);
    if (context.size() < need) throw std::invalid_argument("context shorter than order - 1");
    return prob(context.subspan(context.size() - need), w, static_cast<std::size_t>(order_));
  }

  /// ARPA text: log10 probabilities and log10 back-off weights. Every k-gram
  /// that is a context of the (k+1)-gram level is listed with its weight.
  void write_arpa(std::ostream& out) const {
    const auto n = static_cast<std::size_t>(order_);
    std::vector<std::vector<IdSeq>> entries(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<IdSeq>& list = entries[k];
      for (const auto& [g, c] : grams_[k]) list.push_back(g);
      if (k + 1 < n)
        for (const auto& [ctx, st] : contexts_[k + 1])
          if (!grams_[k].count(ctx)) list.push_back(ctx);
      if (k == 0) {
        // Every word gets a unigram entry; BOS only carries a weight.
        for (WordId w = 0; w < vocab_.size(); ++w) list.push_back(IdSeq{w});
      }
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    out << "\n\\data\\\n";
    for (std::size_t k = 0; k < n; ++k) out << "ngram " << k + 1 << '=' << entries[k].size() << '\n';
    out << std::setprecision(8);
    for (std::size_t k = 0; k < n; ++k) {
      out << "\n\\" << k + 1 << "-grams:\n";
      for (const IdSeq& g : entries[k]) {
        const WordId last = g.back();
        if (last == Vocabulary::bos_id)
          out << "-99";
        else
          out << std::log10(prob(IdSeq(g.view().first(k)).view(), last, k + 1));
        out << '\t';
        for (std::size_t i = 0; i < g.size(); ++i) out << (i ? " " : "") << vocab_.decode(g[i]);
        if (k + 1 < n && contexts_[k + 1].count(g)) out << '\t' << std::log10(gamma(g));
        out << '\n';
      }
    }
    out << "\n\\end\\\n";
  }

  void write(BinaryWriter& w) const {
    w.u8(options_.top_order_discounting);
    write_vocabulary(w, vocab_);
    training_.write(w);
  }
  static MknModel read(BinaryReader& rd) {
    MknOptions opt;
    opt.top_order_discounting = rd.u8() != 0;
    Vocabulary v = read_vocabulary(rd);
    NgramCounts c = NgramCounts::read(rd);
    if (c.order() < 1 || c.order() > kMaxOrder) throw format_error("corrupt n-gram order");
    return MknModel(std::move(v), std::move(c), opt);
  }

  friend bool operator==(const MknModel& x, const MknModel& y) {
    return x.vocab_ == y.vocab_ && x.training_ == y.training_ &&
           x.options_.top_order_discounting == y.options_.top_order_discounting;
  }

 private:
  // P(w | context) using only the levels up to k-grams, |context| = k - 1.
  double prob(std::span<const WordId> context, WordId w, std::size_t k) const {
    const IdSeq full(context);
    double p = uniform();
    for (std::size_t j = 0; j < k; ++j) {
      const IdSeq ctx = full.suffix(j);
      const ContextStats* st = context_stats(ctx);
      if (!st) continue;
      const std::uint32_t c = count(ctx.extended(w));
      const Discounts& d = discounts_[j];
      double alpha = c == 0 ? 0.0 : std::max(0.0, c - d[std::min<std::uint32_t>(c, 3) - 1]);
      p = alpha / static_cast<double>(st->total) + gamma(ctx) * p;
    }
    return p;
  }

  Vocabulary vocab_;
  MknOptions options_;
  NgramCounts training_;
  int order_ = 1;
  std::vector<std::unordered_map<IdSeq, std::uint32_t, IdSeqHash>> grams_;
  std::vector<std::unordered_map<IdSeq, ContextStats, IdSeqHash>> contexts_;
  std::vector<Discounts> discounts_;
};

inline MknModel estimate_mkn(const Corpus& corpus, Vocabulary vocab, int order, MknOptions options = {}) {
  std::vector<Event> events = ngram_stream(corpus, order);
  return MknModel(std::move(vocab), NgramCounts::from_events(events, order), options);
}

}  // namespace hpyc
