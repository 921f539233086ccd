#pragma once

// Command-line front end. `run` is the whole program minus main(), so tests
// can drive it with string arguments and captured streams.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpyc/corpus.hpp"
#include "hpyc/eval.hpp"
#include "hpyc/hpylm.hpp"
#include "hpyc/hpylmc.hpp"
#include "hpyc/mkn.hpp"
#include "hpyc/model_io.hpp"
#include "hpyc/segmentation.hpp"

namespace hpyc {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_usage = 2, exit_io = 3, exit_format = 4 };

struct RunConfig {
  std::string command;
  std::string model_kind = "hpylm";
  int order = 4;
  int burn_in = 300;
  std::uint64_t seed = 0;
  std::string train_path;
  std::string test_path;
  std::string seg_path;
  std::string direction;  // empty: ling
  std::string scheme;     // empty: follows the direction
  std::uint64_t min_count = 1;
  bool renormalize = false;
  std::string model_path;
  std::string out_path;
  std::string manifest_path;
  std::string trace_path;
  std::string report_a;
  std::string report_b;
  std::string margins_path;
  std::size_t top = 10;
  bool compounds_only = false;
  unsigned threads = 0;  // 0: HPYC_THREADS or hardware concurrency
};

namespace cli_detail {

inline std::vector<RawSentence> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open corpus '" + path + "'");
  try {
    return read_sentences(in);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::format) throw format_error(path + ": " + e.what());
    throw;
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path + "'");
  return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw io_error("write error on '" + path + "'");
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  finish_output(out, path);
}

inline nlohmann::ordered_json params_json(const PypParams& p) {
  return {{"discount", p.discount}, {"strength", p.strength}};
}

inline nlohmann::ordered_json tree_params_json(const ContextTree& t) {
  auto arr = nlohmann::ordered_json::array();
  for (int d = 0; d < t.order(); ++d) arr.push_back(params_json(t.params(d)));
  return arr;
}

inline nlohmann::ordered_json hyperparameters_json(const AnyModel& model) {
  nlohmann::ordered_json j;
  if (const auto* m = std::get_if<MknModel>(&model)) {
    j["discounts"] = nlohmann::ordered_json::array();
    for (int k = 1; k <= m->order(); ++k) {
      const Discounts& d = m->discounts(k);
      j["discounts"].push_back({d[0], d[1], d[2]});
    }
  } else if (const auto* m = std::get_if<HpylmModel>(&model)) {
    j["depths"] = tree_params_json(m->tree());
  } else if (const auto* m = std::get_if<CompoundModel>(&model)) {
    j["word"] = params_json(m->word_params());
    j["head"] = tree_params_json(m->head_tree());
    j["modifier"] = tree_params_json(m->modifier_tree());
  }
  return j;
}

inline Direction direction_of(const RunConfig& c) {
  return c.direction.empty() ? Direction::ling : parse_direction(c.direction);
}
inline LinkScheme scheme_of(const RunConfig& c) {
  return c.scheme.empty() ? default_scheme(direction_of(c)) : parse_link_scheme(c.scheme);
}

inline int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ModelKind kind = parse_model_kind(c.model_kind);
  if (c.order < 1 || c.order > kMaxOrder) throw usage_error("--order must be in [1, " + std::to_string(kMaxOrder) + "]");
  if (c.burn_in < 0) throw usage_error("--burn-in must be non-negative");
  if (kind == ModelKind::hpylmc && c.seg_path.empty()) throw usage_error("--model hpylmc requires --seg");
  if (kind != ModelKind::hpylmc && (!c.direction.empty() || !c.scheme.empty()))
    err << "warning: --direction/--scheme only apply to hpylmc; ignored\n";
  const Direction direction = direction_of(c);
  const LinkScheme scheme = scheme_of(c);

  const auto raw = read_corpus_file(c.train_path);
  Vocabulary vocab = build_vocabulary(raw, c.min_count);
  const Corpus corpus = encode_corpus(raw, vocab);

  Rng rng(c.seed);
  TrainOptions options;
  options.burn_in = c.burn_in;
  TrainTrace trace;
  std::optional<AnyModel> model;
  double log_likelihood = 0.0;
  switch (kind) {
    case ModelKind::mkn: model = estimate_mkn(corpus, std::move(vocab), c.order); break;
    case ModelKind::hpylm: {
      HpylmModel m = train_hpylm(corpus, std::move(vocab), c.order, options, rng, &trace);
      log_likelihood = m.log_likelihood();
      model = std::move(m);
      break;
    }
    case ModelKind::hpylmc: {
      const SegmentationDictionary dict = load_dictionary(c.seg_path, scheme, direction);
      CompoundModel m = train_hpylmc(corpus, std::move(vocab), dict, c.order, options, rng, &trace);
      log_likelihood = m.log_likelihood();
      model = std::move(m);
      break;
    }
  }
  save_model(c.out_path, *model);

  if (!c.trace_path.empty()) {
    std::ofstream t = open_output(c.trace_path);
    t << "sweep\tlog_likelihood\n";
    for (std::size_t i = 0; i < trace.log_likelihood.size(); ++i)
      t << i << '\t' << format_real(trace.log_likelihood[i]) << '\n';
    finish_output(t, c.trace_path);
  }

  nlohmann::ordered_json j;
  j["command"] = "train";
  j["model"] = to_string(kind);
  j["format_version"] = kModelVersion;
  j["seed"] = c.seed;
  j["order"] = c.order;
  j["train"] = c.train_path;
  j["min_count"] = c.min_count;
  if (kind != ModelKind::mkn) j["burn_in"] = c.burn_in;
  if (kind == ModelKind::hpylmc) {
    j["seg"] = c.seg_path;
    j["direction"] = to_string(direction);
    j["scheme"] = to_string(scheme);
    j["components"] = std::get<CompoundModel>(*model).component_vocabulary().size();
  }
  j["sentences"] = corpus.sentence_count();
  j["tokens"] = corpus.token_count();
  j["vocabulary"] = vocabulary_of(*model).size();
  j["hyperparameters"] = hyperparameters_json(*model);
  if (kind != ModelKind::mkn) {
    j["initial_log_likelihood"] = trace.log_likelihood.front();
    j["final_log_likelihood"] = log_likelihood;
  }
  write_json(c.manifest_path.empty() ? c.out_path + ".json" : c.manifest_path, j);
  out << "wrote " << c.out_path << '\n';
  return exit_ok;
}

inline int cmd_perplexity(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const AnyModel model = load_model(c.model_path);
  const ModelKind kind = kind_of(model);
  if (c.renormalize && kind != ModelKind::hpylmc) throw usage_error("--renormalize only applies to hpylmc models");
  const Vocabulary& vocab = vocabulary_of(model);
  const Corpus test = encode_corpus(read_corpus_file(c.test_path), vocab);
  const HitLengthIndex hits(training_counts_of(model));
  const unsigned threads = c.threads ? c.threads : default_threads();

  std::optional<SegmentationDictionary> dict;
  if (!c.seg_path.empty()) {
    if (kind == ModelKind::hpylmc) err << "warning: --seg ignored; the model carries its own segmentation\n";
    else dict = load_dictionary(c.seg_path, scheme_of(c), direction_of(c));
  }
  auto word_compound = [&](WordId w) {
    return dict && w >= 3 && dict->components(vocab.decode(w)).size() > 1;
  };

  EvalReport report;
  if (const auto* m = std::get_if<MknModel>(&model)) {
    report = evaluate(test, vocab, m->order(), [&](auto ctx, WordId w) { return m->prob(ctx, w); }, word_compound,
                      &hits, threads);
    report.model = "mkn";
  } else if (const auto* m = std::get_if<HpylmModel>(&model)) {
    report = evaluate(test, vocab, m->order(), [&](auto ctx, WordId w) { return m->prob(ctx, w); }, word_compound,
                      &hits, threads);
    report.model = "hpylm";
  } else {
    const auto& cm = std::get<CompoundModel>(model);
    auto compound = [&](WordId w) { return cm.is_compound(w); };
    if (c.renormalize) {
      const Renormalizer renorm(cm);
      report = evaluate(test, vocab, cm.order(), [&](auto ctx, WordId w) { return renorm.prob(ctx, w); }, compound,
                        &hits, threads);
      report.model = "hpylmc-" + std::string(to_string(cm.direction())) + "-renormalized";
    } else {
      report = evaluate(test, vocab, cm.order(), [&](auto ctx, WordId w) { return cm.prob(ctx, w); }, compound,
                        &hits, threads);
      report.model = "hpylmc-" + std::string(to_string(cm.direction()));
      report.normalized = false;
    }
  }

  if (!c.out_path.empty()) {
    std::ofstream r = open_output(c.out_path);
    write_report(r, report);
    finish_output(r, c.out_path);
    nlohmann::ordered_json j;
    j["command"] = "perplexity";
    j["model_file"] = c.model_path;
    j["model"] = report.model;
    j["test"] = c.test_path;
    j["normalized"] = report.normalized;
    j["tokens"] = report.token_count();
    j["cross_entropy"] = report.cross_entropy();
    j["perplexity"] = report.perplexity();
    write_json(c.manifest_path.empty() ? c.out_path + ".json" : c.manifest_path, j);
  }
  out << "model=" << report.model << ' ' << summary_line(report) << '\n';
  if (!report.normalized) err << "note: unnormalized compound model; the event space extends beyond the vocabulary\n";
  return exit_ok;
}

inline EvalReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open report '" + path + "'");
  return read_report(in);
}

template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f = open_output(path);
  write(f);
  finish_output(f, path);
}

inline int cmd_breakdown(const RunConfig& c, std::ostream& out) {
  const Breakdown b = breakdown(load_report(c.report_a));
  emit(c.out_path, out, [&](std::ostream& o) { write_breakdown(o, b); });
  return exit_ok;
}

inline int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const EvalReport a = load_report(c.report_a), b = load_report(c.report_b);
  if (a.normalized != b.normalized) err << "warning: comparing a normalized with an unnormalized report\n";
  const auto deltas = compare(a, b);
  emit(c.out_path, out, [&](std::ostream& o) { write_compare(o, deltas); });
  if (!c.margins_path.empty()) {
    const auto margins = margin_ranking(a, b, c.compounds_only);
    emit(c.margins_path, out, [&](std::ostream& o) { write_margins(o, margins, c.top); });
  }
  return exit_ok;
}

inline int cmd_inspect(const RunConfig& c, std::ostream& out) {
  const AnyModel model = load_model(c.model_path);
  nlohmann::ordered_json j;
  j["model"] = to_string(kind_of(model));
  j["order"] = order_of(model);
  j["vocabulary"] = vocabulary_of(model).size();
  j["training_ngrams"] = training_counts_of(model).size();
  j["hyperparameters"] = hyperparameters_json(model);
  if (const auto* m = std::get_if<HpylmModel>(&model)) {
    j["restaurants"] = m->tree().node_count();
    j["log_likelihood"] = m->log_likelihood();
  } else if (const auto* m = std::get_if<CompoundModel>(&model)) {
    j["direction"] = to_string(m->direction());
    j["scheme"] = to_string(m->scheme());
    j["components"] = m->component_vocabulary().size();
    j["word_restaurants"] = m->word_restaurants().size();
    j["head_restaurants"] = m->head_tree().node_count();
    j["modifier_restaurants"] = m->modifier_tree().node_count();
    j["log_likelihood"] = m->log_likelihood();
  }
  out << j.dump(2) << '\n';
  return exit_ok;
}

inline int cmd_vocab(const RunConfig& c, std::ostream& out) {
  const Vocabulary v = build_vocabulary(read_corpus_file(c.train_path), c.min_count);
  emit(c.out_path, out, [&](std::ostream& o) { v.write_tsv(o); });
  return exit_ok;
}

inline int cmd_export_arpa(const RunConfig& c, std::ostream& out) {
  const AnyModel model = load_model(c.model_path);
  const auto* m = std::get_if<MknModel>(&model);
  if (!m) throw usage_error("export-arpa needs an mkn model");
  emit(c.out_path, out, [&](std::ostream& o) { m->write_arpa(o); });
  return exit_ok;
}

}  // namespace cli_detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  RunConfig c;
  CLI::App app{"Bayesian n-gram language models: HPYLM, compound HPYLM and modified Kneser-Ney", "hpyc"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--model", c.model_kind, "mkn | hpylm | hpylmc")->capture_default_str();
  train->add_option("--order", c.order, "n-gram order")->capture_default_str();
  train->add_option("--burn-in", c.burn_in, "Gibbs sweeps")->capture_default_str();
  train->add_option("--seed", c.seed, "random seed")->capture_default_str();
  train->add_option("--train", c.train_path, "training corpus")->required();
  train->add_option("--seg", c.seg_path, "segmentation dictionary (hpylmc)");
  train->add_option("--direction", c.direction, "ling | inv (hpylmc, default ling)");
  train->add_option("--scheme", c.scheme, "merge-left | merge-right | delete (default follows direction)");
  train->add_option("--min-count", c.min_count, "types rarer than this map to <unk>")->capture_default_str();
  train->add_option("--out", c.out_path, "model file")->required();
  train->add_option("--manifest", c.manifest_path, "run manifest (default <out>.json)");
  train->add_option("--trace", c.trace_path, "log-likelihood per sweep (TSV)");

  auto* ppl = app.add_subcommand("perplexity", "score a test corpus");
  ppl->add_option("--model-file", c.model_path, "model file")->required();
  ppl->add_option("--test", c.test_path, "test corpus")->required();
  ppl->add_option("--report", c.out_path, "per-token report (TSV)");
  ppl->add_option("--manifest", c.manifest_path, "report manifest (default <report>.json)");
  ppl->add_option("--seg", c.seg_path, "segmentation used to flag compounds for mkn/hpylm");
  ppl->add_option("--direction", c.direction, "direction for --seg");
  ppl->add_option("--scheme", c.scheme, "linking scheme for --seg");
  ppl->add_flag("--renormalize", c.renormalize, "normalize hpylmc over the vocabulary");
  ppl->add_option("--threads", c.threads, "worker threads (default HPYC_THREADS or all cores)");

  auto* bd = app.add_subcommand("breakdown", "hit-length x compound breakdown of a report");
  bd->add_option("--report", c.report_a, "report file")->required();
  bd->add_option("--out", c.out_path, "output TSV (default stdout)");

  auto* cmp = app.add_subcommand("compare", "relative cross-entropy and probability margins of two reports");
  cmp->add_option("--a", c.report_a, "first report")->required();
  cmp->add_option("--b", c.report_b, "second report")->required();
  cmp->add_option("--out", c.out_path, "delta table (default stdout)");
  cmp->add_option("--margins", c.margins_path, "margin ranking output");
  cmp->add_option("--top", c.top, "rows in the margin ranking")->capture_default_str();
  cmp->add_flag("--compounds-only", c.compounds_only, "rank compound tokens only");

  auto* insp = app.add_subcommand("inspect", "print a model summary as JSON");
  insp->add_option("--model-file", c.model_path, "model file")->required();

  auto* voc = app.add_subcommand("vocab", "dump the vocabulary of a corpus");
  voc->add_option("--train", c.train_path, "corpus")->required();
  voc->add_option("--min-count", c.min_count, "pruning threshold")->capture_default_str();
  voc->add_option("--out", c.out_path, "output TSV (default stdout)");

  auto* arpa = app.add_subcommand("export-arpa", "write an mkn model in ARPA format");
  arpa->add_option("--model-file", c.model_path, "model file")->required();
  arpa->add_option("--out", c.out_path, "output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  }

  try {
    if (train->parsed()) return cmd_train(c, out, err);
    if (ppl->parsed()) return cmd_perplexity(c, out, err);
    if (bd->parsed()) return cmd_breakdown(c, out);
    if (cmp->parsed()) return cmd_compare(c, out, err);
    if (insp->parsed()) return cmd_inspect(c, out);
    if (voc->parsed()) return cmd_vocab(c, out);
    if (arpa->parsed()) return cmd_export_arpa(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::usage: return exit_usage;
      case ErrorKind::io: return exit_io;
      case ErrorKind::format: return exit_format;
    }
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return exit_internal;
  }
  return exit_usage;
}

}  // namespace hpyc
