#pragma once

// Compound-aware HPYLM. Word restaurants H_u (|u| = n-1) draw new dishes from
// a product base: a head component from the component n-gram tree G_u, then
// the remaining components and an end marker from the bigram tree F, each
// conditioned on the previously generated component.

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hpyc/context_tree.hpp"
#include "hpyc/corpus.hpp"
#include "hpyc/hpylm.hpp"
#include "hpyc/ngram_counts.hpp"
#include "hpyc/segmentation.hpp"
#include "hpyc/serialize.hpp"

namespace hpyc {

/// Switches for regression checks against the plain HPYLM. Both default to
/// the full model.
struct CompoundDiagnostics {
  /// Skip the H layer: P(w | u) is the product base itself.
  bool bypass_word_layer = false;
  /// Include F($ | last component) in the base.
  bool end_factor = true;
  friend bool operator==(const CompoundDiagnostics&, const CompoundDiagnostics&) = default;
};

class CompoundModel {
 public:
  using Node = Restaurant<WordId>;
  using Level = std::unordered_map<IdSeq, Node, IdSeqHash>;

  CompoundModel() = default;

  CompoundModel(Vocabulary words, const SegmentationDictionary& dict, int order, CompoundDiagnostics diag = {},
                PypParams initial = {})
      : words_(std::move(words)),
        components_(build_component_vocabulary(words_, dict)),
        scheme_(dict.scheme()),
        direction_(dict.direction()),
        diag_(diag),
        order_(order),
        word_params_(initial),
        g_(order, components_.support_size(), initial),
        f_(2, components_.support_size() + 1, initial),
        counts_(order) {
    chains_.reserve(words_.size());
    for (WordId w = 0; w < words_.size(); ++w) chains_.push_back(decompose(w, words_, dict, components_).ordered());
  }

  int order() const noexcept { return order_; }
  const Vocabulary& vocabulary() const noexcept { return words_; }
  const Vocabulary& component_vocabulary() const noexcept { return components_; }
  LinkScheme scheme() const noexcept { return scheme_; }
  Direction direction() const noexcept { return direction_; }
  const CompoundDiagnostics& diagnostics() const noexcept { return diag_; }
  const ContextTree& head_tree() const noexcept { return g_; }
  const ContextTree& modifier_tree() const noexcept { return f_; }
  const Level& word_restaurants() const noexcept { return h_; }
  const PypParams& word_params() const noexcept { return word_params_; }
  void set_word_params(const PypParams& p) {
    if (!p.valid()) throw std::invalid_argument("invalid PYP parameters");
    word_params_ = p;
  }
  ContextTree& head_tree() noexcept { return g_; }
  ContextTree& modifier_tree() noexcept { return f_; }
  const NgramCounts& training_counts() const noexcept { return counts_; }
  void set_training_counts(NgramCounts c) { counts_ = std::move(c); }

  /// The end-of-word marker in F's support.
  WordId end_symbol() const noexcept { return static_cast<WordId>(components_.size()); }

  /// Components of a word in generation order (head first).
  std::span<const WordId> chain(WordId w) const { return chains_.at(w); }
  bool is_compound(WordId w) const { return chains_.at(w).size() > 1; }

  /// Product of the F factors of a word: modifiers given their predecessor
  /// and, unless disabled, the end marker given the last component.
  double chain_prob(WordId w) const {
    std::span<const WordId> c = chain(w);
    double p = 1.0;
    for (std::size_t i = 1; i < c.size(); ++i) p *= f_.prob(c.subspan(i - 1, 1), c[i]);
    if (diag_.end_factor) {
      const WordId end = end_symbol();
      p *= f_.prob(c.subspan(c.size() - 1, 1), end);
    }
    return p;
  }

  double base_prob(std::span<const WordId> context, WordId w) const {
    return g_.prob(context, chain(w).front()) * chain_prob(w);
  }

  double prob(std::span<const WordId> context, WordId w) const {
    const double base = base_prob(context, w);
    if (diag_.bypass_word_layer) return base;
    const Node* node = word_node(context);
    return node ? node->predictive(w, base, word_params_) : base;
  }

  void insert(const Event& e, Rng& rng, SeatingMode mode = SeatingMode::posterior) {
    if (!diag_.bypass_word_layer) {
      const IdSeq u = word_context(e.context.view());
      Node& node = h_[u];
      bool opened = mode == SeatingMode::posterior
                        ? node.seat(e.target, base_prob(u.view(), e.target), word_params_, rng)
                        : node.seat_uniform(e.target, rng);
      if (!opened) return;
    }
    std::span<const WordId> c = chain(e.target);
    g_.insert(e.context.view(), c.front(), rng, mode);
    for (std::size_t i = 1; i < c.size(); ++i) f_.insert(c.subspan(i - 1, 1), c[i], rng, mode);
    if (diag_.end_factor) f_.insert(c.subspan(c.size() - 1, 1), end_symbol(), rng, mode);
  }

  void remove(const Event& e, Rng& rng) {
    if (!diag_.bypass_word_layer) {
      auto it = h_.find(word_context(e.context.view()));
      if (it == h_.end()) throw std::logic_error("remove: no word restaurant for context");
      bool closed = it->second.unseat(e.target, rng);
      if (it->second.empty()) h_.erase(it);
      if (!closed) return;
    }
    std::span<const WordId> c = chain(e.target);
    g_.remove(e.context.view(), c.front(), rng);
    for (std::size_t i = 1; i < c.size(); ++i) f_.remove(c.subspan(i - 1, 1), c[i], rng);
    if (diag_.end_factor) f_.remove(c.subspan(c.size() - 1, 1), end_symbol(), rng);
  }

  SeatingStats word_seating_stats() const {
    SeatingStats s;
    for (const auto& [u, node] : h_) s.add(node);
    return s;
  }

  double log_likelihood() const {
    return word_seating_stats().log_likelihood(word_params_) + g_.log_likelihood() + f_.log_likelihood();
  }

  void resample_hyperparameters(Rng& rng, const HyperPriors& priors = {}) {
    if (!diag_.bypass_word_layer) resample_pyp_params(word_seating_stats(), word_params_, rng, priors);
    g_.resample_hyperparameters(rng, priors);
    f_.resample_hyperparameters(rng, priors);
  }

  bool empty() const { return h_.empty() && g_.empty() && f_.empty(); }

  /// Internal consistency of G and F, plus: every H table of a word sends one
  /// customer for its head to G at the full context and one customer per
  /// chain link to F's depth-1 restaurants, and nothing else does.
  std::optional<std::string> audit() const {
    if (auto err = g_.audit()) return "G: " + *err;
    if (auto err = f_.audit()) return "F: " + *err;
    std::map<std::pair<IdSeq, WordId>, std::uint64_t> heads;
    std::map<std::pair<WordId, WordId>, std::uint64_t> links;
    auto add_word = [&](const IdSeq& u, WordId w, std::uint64_t tables) {
      std::span<const WordId> c = chain(w);
      heads[{u, c.front()}] += tables;
      for (std::size_t i = 1; i < c.size(); ++i) links[{c[i - 1], c[i]}] += tables;
      if (diag_.end_factor) links[{c.back(), end_symbol()}] += tables;
    };
    // Without H the G and F customers are the events themselves.
    if (diag_.bypass_word_layer) return std::nullopt;
    for (const auto& [u, node] : h_) {
      if (node.empty()) return std::string("empty word restaurant kept");
      if (auto err = audit_word_restaurant(node)) return "H: " + *err;
      for (const auto& e : node.dishes()) add_word(u, e.dish, e.tables.tables());
    }
    std::uint64_t checked = 0;
    for (const auto& [u, node] : g_.level(order_ - 1)) {
      for (const auto& e : node.dishes()) {
        auto it = heads.find({u, e.dish});
        std::uint64_t want = it == heads.end() ? 0 : it->second;
        if (want != e.tables.customers()) {
          std::ostringstream os;
          os << "head " << e.dish << ": " << e.tables.customers() << " G customers but " << want << " H tables";
          return os.str();
        }
        ++checked;
      }
    }
    if (checked != heads.size()) return std::string("H tables without G head customers");
    checked = 0;
    for (const auto& [ctx, node] : f_.level(1)) {
      for (const auto& e : node.dishes()) {
        auto it = links.find({ctx[0], e.dish});
        std::uint64_t want = it == links.end() ? 0 : it->second;
        if (want != e.tables.customers()) {
          std::ostringstream os;
          os << "link " << ctx[0] << "->" << e.dish << ": " << e.tables.customers() << " F customers but " << want
             << " H tables";
          return os.str();
        }
        ++checked;
      }
    }
    if (checked != links.size()) return std::string("H tables without F chain customers");
    return std::nullopt;
  }

  void write(BinaryWriter& w) const {
    w.u32(static_cast<std::uint32_t>(order_));
    w.u8(static_cast<std::uint8_t>(scheme_));
    w.u8(static_cast<std::uint8_t>(direction_));
    w.u8(diag_.bypass_word_layer);
    w.u8(diag_.end_factor);
    write_vocabulary(w, words_);
    write_vocabulary(w, components_);
    for (const auto& c : chains_) {
      w.u32(static_cast<std::uint32_t>(c.size()));
      for (WordId id : c) w.u32(id);
    }
    w.params(word_params_);
    std::vector<const IdSeq*> keys;
    keys.reserve(h_.size());
    for (const auto& kv : h_) keys.push_back(&kv.first);
    std::sort(keys.begin(), keys.end(), [](const IdSeq* a, const IdSeq* b) { return *a < *b; });
    w.u64(keys.size());
    for (const IdSeq* k : keys) {
      w.ids(*k);
      write_restaurant(w, h_.at(*k));
    }
    g_.write(w);
    f_.write(w);
    counts_.write(w);
  }

  static CompoundModel read(BinaryReader& rd) {
    CompoundModel m;
    m.order_ = static_cast<int>(rd.u32());
    if (m.order_ < 1 || m.order_ > kMaxOrder) throw format_error("corrupt compound model header");
    std::uint8_t scheme = rd.u8(), direction = rd.u8();
    if (scheme > 2 || direction > 1) throw format_error("corrupt compound model header");
    m.scheme_ = static_cast<LinkScheme>(scheme);
    m.direction_ = static_cast<Direction>(direction);
    m.diag_.bypass_word_layer = rd.u8() != 0;
    m.diag_.end_factor = rd.u8() != 0;
    m.words_ = read_vocabulary(rd);
    m.components_ = read_vocabulary(rd);
    m.chains_.resize(m.words_.size());
    for (auto& c : m.chains_) {
      std::uint32_t len = rd.u32();
      if (len == 0 || len > 4096) throw format_error("corrupt decomposition in model file");
      c.resize(len);
      for (WordId& id : c) {
        id = rd.u32();
        if (id >= m.components_.size()) throw format_error("component id out of range");
      }
    }
    m.word_params_ = rd.params();
    std::uint64_t n = rd.u64();
    m.h_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      IdSeq key = rd.ids();
      if (key.size() != static_cast<std::size_t>(m.order_ - 1)) throw format_error("word context has wrong length");
      m.h_.emplace(key, read_restaurant<Node>(rd));
    }
    m.g_ = ContextTree::read(rd);
    m.f_ = ContextTree::read(rd);
    m.counts_ = NgramCounts::read(rd);
    if (m.g_.order() != m.order_ || m.f_.order() != 2 || m.g_.support_size() != m.components_.support_size() ||
        m.f_.support_size() != m.components_.support_size() + 1)
      throw format_error("compound model trees do not match the component vocabulary");
    return m;
  }

  friend bool operator==(const CompoundModel& x, const CompoundModel& y) {
    return x.order_ == y.order_ && x.scheme_ == y.scheme_ && x.direction_ == y.direction_ && x.diag_ == y.diag_ &&
           x.words_ == y.words_ && x.components_ == y.components_ && x.chains_ == y.chains_ &&
           x.word_params_ == y.word_params_ && x.h_ == y.h_ && x.g_ == y.g_ && x.f_ == y.f_ &&
           x.counts_ == y.counts_;
  }

 private:
  IdSeq word_context(std::span<const WordId> context) const {
    const auto need = static_cast<std::size_t>(order_ - 1);
    if (context.size() < need) throw std::invalid_argument("context shorter than order - 1");
    return IdSeq(context.subspan(context.size() - need));
  }
  const Node* word_node(std::span<const WordId> context) const {
    auto it = h_.find(word_context(context));
    return it == h_.end() ? nullptr : &it->second;
  }

  static std::optional<std::string> audit_word_restaurant(const Node& node) {
    std::uint64_t customers = 0, tables = 0;
    for (const auto& e : node.dishes()) {
      if (e.tables.tables() > e.tables.customers()) return std::string("more tables than customers");
      customers += e.tables.customers();
      tables += e.tables.tables();
    }
    if (customers != node.customers() || tables != node.tables()) return std::string("restaurant totals out of sync");
    return std::nullopt;
  }

  Vocabulary words_;
  Vocabulary components_;
  LinkScheme scheme_ = LinkScheme::merge_left;
  Direction direction_ = Direction::ling;
  CompoundDiagnostics diag_;
  int order_ = 1;
  std::vector<std::vector<WordId>> chains_;
  PypParams word_params_;
  Level h_;
  ContextTree g_;
  ContextTree f_;
  NgramCounts counts_;
};

/// Sum of P(v | u) over the word vocabulary (all ids but BOS) for a frozen
/// compound model, computed without enumerating the vocabulary per query.
///
/// With S_h the F-chain mass of all words headed by h, the sum of base
/// probabilities at G context u is T(u) = sum_h G_u(h) S_h, which follows the
/// same back-off recursion as G itself.
class Renormalizer {
 public:
  explicit Renormalizer(const CompoundModel& model) : model_(model) {
    const ContextTree& g = model.head_tree();
    std::unordered_map<WordId, double> head_mass;
    double total = 0.0;
    for (WordId w = 0; w < model.vocabulary().size(); ++w) {
      if (w == Vocabulary::bos_id) continue;
      double p = model.chain_prob(w);
      head_mass[model.chain(w).front()] += p;
      total += p;
    }
    root_ = total * g.base_probability();
    mass_.resize(static_cast<std::size_t>(g.order()));
    for (int d = 0; d < g.order(); ++d) {
      const PypParams& pp = g.params(d);
      for (const auto& [ctx, node] : g.level(d)) {
        double parent = d == 0 ? root_ : mass_[static_cast<std::size_t>(d - 1)].at(ctx.suffix(ctx.size() - 1));
        double cached = 0.0;
        for (const auto& e : node.dishes()) {
          auto it = head_mass.find(e.dish);
          if (it != head_mass.end())
            cached += (e.tables.customers() - pp.discount * e.tables.tables()) * it->second;
        }
        const double n = static_cast<double>(node.customers());
        const double m = static_cast<double>(node.tables());
        mass_[static_cast<std::size_t>(d)][ctx] =
            (cached + (pp.discount * m + pp.strength) * parent) / (n + pp.strength);
      }
    }
  }

  /// Sum over the vocabulary of the base probability at `context`.
  double base_mass(std::span<const WordId> context) const {
    const auto need = static_cast<std::size_t>(model_.order() - 1);
    const IdSeq full(context.subspan(context.size() - need));
    for (std::size_t d = need + 1; d-- > 0;) {
      auto it = mass_[d].find(full.suffix(d));
      if (it != mass_[d].end()) return it->second;
    }
    return root_;
  }

  /// Sum over the vocabulary of P(v | context).
  double normalizer(std::span<const WordId> context) const {
    const double base = base_mass(context);
    if (model_.diagnostics().bypass_word_layer) return base;
    const auto need = static_cast<std::size_t>(model_.order() - 1);
    auto it = model_.word_restaurants().find(IdSeq(context.subspan(context.size() - need)));
    if (it == model_.word_restaurants().end()) return base;
    const auto& node = it->second;
    const PypParams& pp = model_.word_params();
    const double n = static_cast<double>(node.customers());
    const double m = static_cast<double>(node.tables());
    return (n - pp.discount * m + (pp.discount * m + pp.strength) * base) / (n + pp.strength);
  }

  double prob(std::span<const WordId> context, WordId w) const {
    return model_.prob(context, w) / normalizer(context);
  }

 private:
  const CompoundModel& model_;
  double root_ = 0.0;
  std::vector<std::unordered_map<IdSeq, double, IdSeqHash>> mass_;
};

inline CompoundModel train_hpylmc(const Corpus& corpus, Vocabulary vocab, const SegmentationDictionary& dict, int order,
                                  const TrainOptions& options, Rng& rng, TrainTrace* trace = nullptr,
                                  CompoundDiagnostics diag = {}) {
  CompoundModel model(std::move(vocab), dict, order, diag);
  std::vector<Event> events = ngram_stream(corpus, order);
  model.set_training_counts(NgramCounts::from_events(events, order));
  TrainTrace t = gibbs_train(model, std::move(events), options, rng);
  if (trace) *trace = std::move(t);
  return model;
}

}  // namespace hpyc
