#pragma once

// Hierarchical Pitman-Yor n-gram language model and the collapsed Gibbs
// training loop shared with the compound model.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpyc/context_tree.hpp"
#include "hpyc/corpus.hpp"
#include "hpyc/hyperparameters.hpp"
#include "hpyc/ngram_counts.hpp"
#include "hpyc/random.hpp"
#include "hpyc/serialize.hpp"

namespace hpyc {

struct TrainOptions {
  int burn_in = 300;
  bool resample_hyperparameters = true;
  /// Seating rule used while inserting the initial customers.
  SeatingMode initialisation = SeatingMode::uniform;
  HyperPriors priors;
  /// Called after initialisation (sweep 0) and after every sweep.
  std::function<void(int sweep, double log_likelihood)> on_sweep;
};

/// log_likelihood[0] is the initial state, [i] the state after sweep i.
struct TrainTrace {
  std::vector<double> log_likelihood;
};

/// Reseats every event once: remove it, then insert it from the seating
/// posterior. Events are visited in a fresh random order.
template <class Model>
void gibbs_sweep(Model& model, std::vector<Event>& events, Rng& rng) {
  rng.shuffle(std::span<Event>(events));
  for (const Event& e : events) {
    model.remove(e, rng);
    model.insert(e, rng, SeatingMode::posterior);
  }
}

/// Inserts all events in random order, then runs `burn_in` Gibbs sweeps,
/// each followed by a hyperparameter update. The final single sample is the
/// model.
template <class Model>
TrainTrace gibbs_train(Model& model, std::vector<Event> events, const TrainOptions& options, Rng& rng) {
  if (options.burn_in < 0) throw usage_error("burn-in must be non-negative");
  TrainTrace trace;
  rng.shuffle(std::span<Event>(events));
  for (const Event& e : events) model.insert(e, rng, options.initialisation);
  trace.log_likelihood.push_back(model.log_likelihood());
  if (options.on_sweep) options.on_sweep(0, trace.log_likelihood.back());
  for (int sweep = 1; sweep <= options.burn_in; ++sweep) {
    gibbs_sweep(model, events, rng);
    if (options.resample_hyperparameters) model.resample_hyperparameters(rng, options.priors);
    trace.log_likelihood.push_back(model.log_likelihood());
    if (options.on_sweep) options.on_sweep(sweep, trace.log_likelihood.back());
  }
  return trace;
}

class HpylmModel {
 public:
  HpylmModel() = default;
  HpylmModel(Vocabulary vocab, int order, PypParams initial = {})
      : vocab_(std::move(vocab)), tree_(order, vocab_.support_size(), initial), counts_(order) {}

  int order() const noexcept { return tree_.order(); }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const ContextTree& tree() const noexcept { return tree_; }
  ContextTree& tree() noexcept { return tree_; }
  const NgramCounts& training_counts() const noexcept { return counts_; }
  void set_training_counts(NgramCounts c) { counts_ = std::move(c); }

  double prob(std::span<const WordId> context, WordId w) const { return tree_.prob(context, w); }

  void insert(const Event& e, Rng& rng, SeatingMode mode = SeatingMode::posterior) {
    tree_.insert(e.context.view(), e.target, rng, mode);
  }
  void remove(const Event& e, Rng& rng) { tree_.remove(e.context.view(), e.target, rng); }
  void resample_hyperparameters(Rng& rng, const HyperPriors& priors = {}) { tree_.resample_hyperparameters(rng, priors); }
  double log_likelihood() const { return tree_.log_likelihood(); }
  std::optional<std::string> audit() const { return tree_.audit(); }

  void write(BinaryWriter& w) const {
    write_vocabulary(w, vocab_);
    tree_.write(w);
    counts_.write(w);
  }
  static HpylmModel read(BinaryReader& rd) {
    HpylmModel m;
    m.vocab_ = read_vocabulary(rd);
    m.tree_ = ContextTree::read(rd);
    m.counts_ = NgramCounts::read(rd);
    if (m.tree_.support_size() != m.vocab_.support_size()) throw format_error("support size does not match vocabulary");
    return m;
  }

  friend bool operator==(const HpylmModel& x, const HpylmModel& y) {
    return x.vocab_ == y.vocab_ && x.tree_ == y.tree_ && x.counts_ == y.counts_;
  }

 private:
  Vocabulary vocab_;
  ContextTree tree_;
  NgramCounts counts_;
};

inline HpylmModel train_hpylm(const Corpus& corpus, Vocabulary vocab, int order, const TrainOptions& options, Rng& rng,
                              TrainTrace* trace = nullptr) {
  HpylmModel model(std::move(vocab), order);
  std::vector<Event> events = ngram_stream(corpus, order);
  model.set_training_counts(NgramCounts::from_events(events, order));
  TrainTrace t = gibbs_train(model, std::move(events), options, rng);
  if (trace) *trace = std::move(t);
  return model;
}

}  // namespace hpyc
