#pragma once

// Per-token scoring, perplexity, hit-length / compound breakdowns and
// model-margin ranking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "hpyc/common.hpp"
#include "hpyc/corpus.hpp"
#include "hpyc/ngram_counts.hpp"

namespace hpyc {

struct TokenRecord {
  std::size_t sentence = 0;
  std::size_t position = 0;
  std::string token;
  double log2p = 0.0;
  int hit_length = 1;
  bool is_compound = false;
  bool is_oov = false;
  friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

struct EvalReport {
  std::vector<TokenRecord> records;
  int order = 1;
  /// Free-form model description carried into the footer.
  std::string model;
  /// False when probabilities are not normalized over the word vocabulary
  /// (unnormalized compound model); such reports are not comparable with
  /// normalized ones.
  bool normalized = true;

  std::size_t token_count() const noexcept { return records.size(); }
  double cross_entropy() const {
    double sum = 0.0;
    for (const TokenRecord& r : records) sum -= r.log2p;
    return records.empty() ? 0.0 : sum / static_cast<double>(records.size());
  }
  double perplexity() const { return std::exp2(cross_entropy()); }
};

/// Every surface k-gram (k = 1..n) of the training data, for hit lengths.
class HitLengthIndex {
 public:
  explicit HitLengthIndex(const NgramCounts& counts) : order_(counts.order()), grams_(static_cast<std::size_t>(order_)) {
    for (const auto& [g, c] : counts.map())
      for (std::size_t k = 1; k <= g.size(); ++k) grams_[k - 1].insert(g.suffix(k));
  }

  int order() const noexcept { return order_; }

  /// Largest k such that the last k-1 context words followed by w occurred
  /// in training; 1 when not even the unigram did.
  int hit_length(std::span<const WordId> context, WordId w) const {
    const std::size_t ctx_len = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
    int best = 1;
    for (std::size_t k = 1; k <= ctx_len + 1; ++k) {
      IdSeq probe(context.subspan(context.size() - (k - 1)));
      probe.push_back(w);
      if (!grams_[k - 1].count(probe)) break;
      best = static_cast<int>(k);
    }
    return best;
  }

 private:
  int order_;
  std::vector<std::unordered_set<IdSeq, IdSeqHash>> grams_;
};

/// Worker count for evaluation: HPYC_THREADS if set and positive, else the
/// hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("HPYC_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Scores every event of `test`. `prob(context, w)` must be safe to call
/// concurrently; `compound(w)` says whether a word is a compound. Output is
/// independent of the thread count.
template <class ProbFn, class CompoundFn>
EvalReport evaluate(const Corpus& test, const Vocabulary& vocab, int order, ProbFn&& prob, CompoundFn&& compound,
                    const HitLengthIndex* hits, unsigned threads = 1) {
  EvalReport report;
  report.order = order;
  std::vector<std::size_t> offset(test.sentences.size() + 1, 0);
  for (std::size_t s = 0; s < test.sentences.size(); ++s) offset[s + 1] = offset[s] + test.sentences[s].size() + 1;
  report.records.resize(offset.back());

  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      Corpus single;
      single.sentences.push_back(test.sentences[s]);
      for_each_event(single, order, [&](std::size_t, std::size_t i, const Event& e) {
        const double p = prob(e.context.view(), e.target);
        if (!(p > 0.0) || !std::isfinite(p))
          throw std::logic_error("non-positive probability for '" + vocab.decode(e.target) + "' in sentence " +
                                 std::to_string(s));
        TokenRecord& r = report.records[offset[s] + i];
        r.sentence = s;
        r.position = i;
        r.token = vocab.decode(e.target);
        r.log2p = std::log2(p);
        r.hit_length = hits ? hits->hit_length(e.context.view(), e.target) : 1;
        r.is_compound = compound(e.target);
        r.is_oov = e.target == Vocabulary::unk_id;
      });
    }
  };

  const std::size_t n = test.sentences.size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    score_range(0, n);
    return report;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = n * t / threads, end = n * (t + 1) / threads;
    pool.emplace_back([&, t, begin, end] {
      try {
        score_range(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return report;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string summary_line(const EvalReport& r) {
  std::ostringstream os;
  os << "tokens=" << r.token_count() << " xent=" << format_real(r.cross_entropy())
     << " ppl=" << format_real(r.perplexity());
  return os.str();
}

/// `sent pos token log2p h is_compound is_oov` per token, then a footer of
/// `#` lines.
inline void write_report(std::ostream& out, const EvalReport& r) {
  out << "#sent\tpos\ttoken\tlog2p\th\tis_compound\tis_oov\n";
  for (const TokenRecord& t : r.records)
    out << t.sentence << '\t' << t.position << '\t' << t.token << '\t' << format_real(t.log2p) << '\t' << t.hit_length
        << '\t' << int(t.is_compound) << '\t' << int(t.is_oov) << '\n';
  out << "# order=" << r.order << " normalized=" << int(r.normalized) << " model=" << r.model << '\n';
  out << "# " << summary_line(r) << '\n';
}

inline EvalReport read_report(std::istream& in) {
  EvalReport r;
  std::string line;
  std::size_t line_no = 0;
  bool order_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# order=", 0) == 0) {
        std::istringstream is(line.substr(2));
        std::string field;
        while (is >> field) {
          if (field.rfind("order=", 0) == 0) r.order = std::stoi(field.substr(6));
          else if (field.rfind("normalized=", 0) == 0) r.normalized = field.substr(11) == "1";
          else if (field.rfind("model=", 0) == 0) r.model = field.substr(6);
        }
        order_seen = true;
      }
      continue;
    }
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 7) throw format_error("report line " + std::to_string(line_no) + ": expected 7 fields");
    TokenRecord t;
    try {
      t.sentence = std::stoull(f[0]);
      t.position = std::stoull(f[1]);
      t.token = f[2];
      t.log2p = std::stod(f[3]);
      t.hit_length = std::stoi(f[4]);
    } catch (const std::exception&) {
      throw format_error("report line " + std::to_string(line_no) + ": bad number");
    }
    if ((f[5] != "0" && f[5] != "1") || (f[6] != "0" && f[6] != "1"))
      throw format_error("report line " + std::to_string(line_no) + ": bad flag");
    t.is_compound = f[5] == "1";
    t.is_oov = f[6] == "1";
    r.records.push_back(std::move(t));
  }
  if (in.bad()) throw io_error("read error in report");
  if (!order_seen) throw format_error("report footer missing");
  return r;
}

struct SubsetStats {
  std::size_t tokens = 0;
  double neg_log2_sum = 0.0;
  double cross_entropy() const { return tokens ? neg_log2_sum / static_cast<double>(tokens) : 0.0; }
  double perplexity() const { return std::exp2(cross_entropy()); }
};

/// Rows h = 1..n crossed with compound / non-compound (a partition of the
/// tokens), followed by one row over the OOV tokens.
struct Breakdown {
  struct Row {
    std::string subset;
    int hit_length = 0;  // 0 for the OOV row
    bool compound = false;
    SubsetStats stats;
  };
  std::vector<Row> rows;
  SubsetStats total;
};

inline Breakdown breakdown(const EvalReport& r) {
  Breakdown b;
  for (int h = 1; h <= r.order; ++h)
    for (bool c : {false, true})
      b.rows.push_back({"h=" + std::to_string(h) + (c ? ",compound" : ",non-compound"), h, c, {}});
  b.rows.push_back({"oov", 0, false, {}});
  for (const TokenRecord& t : r.records) {
    if (t.hit_length < 1 || t.hit_length > r.order)
      throw format_error("hit length " + std::to_string(t.hit_length) + " outside 1.." + std::to_string(r.order));
    auto& row = b.rows[static_cast<std::size_t>(2 * (t.hit_length - 1) + (t.is_compound ? 1 : 0))].stats;
    ++row.tokens;
    row.neg_log2_sum -= t.log2p;
    if (t.is_oov) {
      ++b.rows.back().stats.tokens;
      b.rows.back().stats.neg_log2_sum -= t.log2p;
    }
    ++b.total.tokens;
    b.total.neg_log2_sum -= t.log2p;
  }
  return b;
}

inline void write_breakdown(std::ostream& out, const Breakdown& b) {
  out << "subset\ttokens\txent\tppl\n";
  for (const auto& row : b.rows)
    out << row.subset << '\t' << row.stats.tokens << '\t' << format_real(row.stats.cross_entropy()) << '\t'
        << format_real(row.stats.perplexity()) << '\n';
  out << "# total\t" << b.total.tokens << '\t' << format_real(b.total.cross_entropy()) << '\t'
      << format_real(b.total.perplexity()) << '\n';
}

/// Throws unless both reports score the same token sequence.
inline void check_aligned(const EvalReport& a, const EvalReport& b) {
  if (a.records.size() != b.records.size())
    throw format_error("reports cover different test sets (" + std::to_string(a.records.size()) + " vs " +
                       std::to_string(b.records.size()) + " tokens)");
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const TokenRecord &x = a.records[i], &y = b.records[i];
    if (x.sentence != y.sentence || x.position != y.position || x.token != y.token)
      throw format_error("reports differ at token " + std::to_string(i));
  }
}

struct SubsetDelta {
  std::string subset;
  std::size_t tokens = 0;
  double xent_a = 0.0;
  double xent_b = 0.0;
  /// (xent_a - xent_b) / xent_b; 0 for empty subsets.
  double relative = 0.0;
};

/// Relative cross-entropy of `a` against `b` per breakdown subset; subsets
/// are taken from `a` (hit lengths and compound flags of the first report).
inline std::vector<SubsetDelta> compare(const EvalReport& a, const EvalReport& b) {
  check_aligned(a, b);
  EvalReport b_on_a = a;
  for (std::size_t i = 0; i < a.records.size(); ++i) b_on_a.records[i].log2p = b.records[i].log2p;
  const Breakdown ba = breakdown(a), bb = breakdown(b_on_a);
  std::vector<SubsetDelta> out;
  auto delta = [](const std::string& name, const SubsetStats& x, const SubsetStats& y) {
    SubsetDelta d{name, x.tokens, x.cross_entropy(), y.cross_entropy(), 0.0};
    if (x.tokens && x.neg_log2_sum != y.neg_log2_sum) d.relative = (d.xent_a - d.xent_b) / d.xent_b;
    return d;
  };
  for (std::size_t i = 0; i < ba.rows.size(); ++i) out.push_back(delta(ba.rows[i].subset, ba.rows[i].stats, bb.rows[i].stats));
  out.push_back(delta("total", ba.total, bb.total));
  return out;
}

inline void write_compare(std::ostream& out, const std::vector<SubsetDelta>& deltas) {
  out << "subset\ttokens\txent_a\txent_b\trel_delta\n";
  for (const auto& d : deltas)
    out << d.subset << '\t' << d.tokens << '\t' << format_real(d.xent_a) << '\t' << format_real(d.xent_b) << '\t'
        << format_real(d.relative) << '\n';
}

struct Margin {
  std::size_t index = 0;  // token index in the reports
  std::size_t sentence = 0;
  std::size_t position = 0;
  std::string token;
  double p_a = 0.0;
  double p_b = 0.0;
  double delta = 0.0;  // p_a - p_b
};

/// Tokens sorted by p_a - p_b, largest first; ties keep report order.
inline std::vector<Margin> margin_ranking(const EvalReport& a, const EvalReport& b, bool compounds_only) {
  check_aligned(a, b);
  std::vector<Margin> out;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const TokenRecord& t = a.records[i];
    if (compounds_only && !t.is_compound) continue;
    Margin m{i, t.sentence, t.position, t.token, std::exp2(t.log2p), std::exp2(b.records[i].log2p), 0.0};
    m.delta = m.p_a - m.p_b;
    out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(), [](const Margin& x, const Margin& y) { return x.delta > y.delta; });
  return out;
}

inline void write_margins(std::ostream& out, const std::vector<Margin>& margins, std::size_t limit) {
  out << "rank\tsent\tpos\ttoken\tp_a\tp_b\tdelta\n";
  for (std::size_t i = 0; i < margins.size() && i < limit; ++i) {
    const Margin& m = margins[i];
    out << i + 1 << '\t' << m.sentence << '\t' << m.position << '\t' << m.token << '\t' << format_real(m.p_a) << '\t'
        << format_real(m.p_b) << '\t' << format_real(m.delta) << '\n';
  }
}

}  // namespace hpyc
