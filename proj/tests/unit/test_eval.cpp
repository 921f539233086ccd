#include <gtest/gtest.h>

#include <sstream>

#include "hpyc/eval.hpp"
#include "hpyc/hpylm.hpp"

using namespace hpyc;

namespace {

Corpus corpus_of(const std::vector<std::vector<WordId>>& s) {
  Corpus c;
  c.sentences = s;
  return c;
}

Vocabulary small_vocab(int types) {
  Vocabulary v;
  for (int i = 0; i < types; ++i) v.add("w" + std::to_string(i), 1);
  return v;
}

auto never = [](WordId) { return false; };

EvalReport synthetic_report(Rng& rng, std::size_t n, int order) {
  EvalReport r;
  r.order = order;
  for (std::size_t i = 0; i < n; ++i) {
    TokenRecord t;
    t.sentence = i / 7;
    t.position = i % 7;
    t.token = "t" + std::to_string(rng.below(20));
    t.log2p = -1.0 - 10.0 * rng.uniform01();
    t.hit_length = 1 + static_cast<int>(rng.below(order));
    t.is_compound = rng.uniform01() < 0.3;
    t.is_oov = rng.uniform01() < 0.05;
    r.records.push_back(t);
  }
  return r;
}

}  // namespace

TEST(Eval, PerplexityOfKnownProbabilities) {
  EvalReport r;
  r.records.resize(2);
  r.records[0].log2p = std::log2(0.5);
  r.records[1].log2p = std::log2(0.125);
  EXPECT_DOUBLE_EQ(r.cross_entropy(), 2.0);
  EXPECT_DOUBLE_EQ(r.perplexity(), 4.0);
}

TEST(Eval, UniformModelHasPerplexityOfSupport) {
  Vocabulary v = small_vocab(6);  // support 8: unk, eos, w0..w5
  Corpus test = corpus_of({{3, 4, 5}, {8, 0}});
  auto uniform = [&](std::span<const WordId>, WordId) { return 1.0 / v.support_size(); };
  EvalReport r = evaluate(test, v, 3, uniform, never, nullptr);
  EXPECT_EQ(r.token_count(), 7u);
  EXPECT_NEAR(r.perplexity(), 8.0, 1e-12);
  EXPECT_TRUE(r.records[5].is_oov);
  EXPECT_FALSE(r.records[4].is_oov);
  EXPECT_EQ(r.records[2].token, "w2");
}

TEST(Eval, HitLengthOfPlantedNgrams) {
  // Training sees "w0 w1 w2"; the test asks for the same trigram, a bigram
  // continuation and a fresh word.
  Corpus train = corpus_of({{3, 4, 5}});
  NgramCounts counts = NgramCounts::from_events(ngram_stream(train, 3), 3);
  HitLengthIndex idx(counts);
  const IdSeq ab{3, 4}, xb{6, 4}, xx{6, 6};
  EXPECT_EQ(idx.hit_length(ab.view(), 5), 3);
  EXPECT_EQ(idx.hit_length(xb.view(), 5), 2);
  EXPECT_EQ(idx.hit_length(xx.view(), 5), 1);
  EXPECT_EQ(idx.hit_length(xx.view(), 7), 1);
  const IdSeq bos{Vocabulary::bos_id, Vocabulary::bos_id};
  EXPECT_EQ(idx.hit_length(bos.view(), 3), 3);
  EXPECT_EQ(idx.hit_length(IdSeq{4, 5}.view(), Vocabulary::eos_id), 3);
}

TEST(Eval, BreakdownPartitionsTokens) {
  Rng rng(1);
  for (int order : {1, 2, 4}) {
    EvalReport r = synthetic_report(rng, 500, order);
    Breakdown b = breakdown(r);
    ASSERT_EQ(b.rows.size(), static_cast<std::size_t>(2 * order + 1));
    std::size_t sum = 0;
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < b.rows.size(); ++i) {
      sum += b.rows[i].stats.tokens;
      mass += b.rows[i].stats.neg_log2_sum;
    }
    EXPECT_EQ(sum, r.token_count());
    EXPECT_EQ(b.total.tokens, r.token_count());
    EXPECT_NEAR(mass, b.total.neg_log2_sum, 1e-9);
    std::size_t oov = 0;
    for (const auto& t : r.records) oov += t.is_oov;
    EXPECT_EQ(b.rows.back().stats.tokens, oov);
  }
  EvalReport bad;
  bad.order = 2;
  bad.records.push_back(TokenRecord{0, 0, "x", -1.0, 3, false, false});
  EXPECT_THROW(breakdown(bad), Error);
}

TEST(Eval, SelfComparisonIsZero) {
  Rng rng(2);
  EvalReport r = synthetic_report(rng, 300, 3);
  for (const auto& d : compare(r, r)) {
    EXPECT_EQ(d.relative, 0.0) << d.subset;
    EXPECT_EQ(d.xent_a, d.xent_b);
  }
  for (const auto& m : margin_ranking(r, r, false)) EXPECT_EQ(m.delta, 0.0);
}

TEST(Eval, CompareRelativeDelta) {
  EvalReport a, b;
  a.order = b.order = 1;
  a.records = {TokenRecord{0, 0, "x", -2.0, 1, false, false}, TokenRecord{0, 1, "y", -4.0, 1, true, false}};
  b.records = a.records;
  b.records[0].log2p = -1.0;
  const auto d = compare(a, b);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_DOUBLE_EQ(d[0].relative, 1.0);  // h=1,non-compound: 2 vs 1
  EXPECT_DOUBLE_EQ(d[1].relative, 0.0);
  EXPECT_DOUBLE_EQ(d[3].relative, (3.0 - 2.5) / 2.5);
  EvalReport shorter = a;
  shorter.records.pop_back();
  EXPECT_THROW(compare(a, shorter), Error);
}

TEST(Eval, MarginRankingMatchesBruteForce) {
  Rng rng(3);
  EvalReport a = synthetic_report(rng, 200, 2), b = a;
  for (auto& t : b.records) t.log2p = -1.0 - 10.0 * rng.uniform01();
  // a few exact ties
  b.records[5].log2p = a.records[5].log2p;
  b.records[9].log2p = a.records[9].log2p;
  for (bool only : {false, true}) {
    const auto ranked = margin_ranking(a, b, only);
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < a.records.size(); ++i)
      if (!only || a.records[i].is_compound) remaining.push_back(i);
    ASSERT_EQ(ranked.size(), remaining.size());
    for (const Margin& m : ranked) {
      // brute force: first index with the largest delta among those left
      std::size_t best = 0;
      double best_delta = -2.0;
      for (std::size_t j = 0; j < remaining.size(); ++j) {
        const std::size_t i = remaining[j];
        const double d = std::exp2(a.records[i].log2p) - std::exp2(b.records[i].log2p);
        if (d > best_delta) best_delta = d, best = j;
      }
      EXPECT_EQ(m.index, remaining[best]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
  }
}

TEST(Eval, ReportRoundTrip) {
  Rng rng(4);
  EvalReport r = synthetic_report(rng, 50, 3);
  r.model = "hpylmc-ling";
  r.normalized = false;
  std::stringstream buf;
  write_report(buf, r);
  EvalReport back = read_report(buf);
  EXPECT_EQ(back.records, r.records);
  EXPECT_EQ(back.order, 3);
  EXPECT_EQ(back.model, r.model);
  EXPECT_FALSE(back.normalized);

  std::istringstream no_footer("#sent\tpos\ttoken\tlog2p\th\tis_compound\tis_oov\n0\t0\tx\t-1\t1\t0\t0\n");
  EXPECT_THROW(read_report(no_footer), Error);
  std::istringstream bad_flag("0\t0\tx\t-1\t1\t2\t0\n# order=1 normalized=1 model=x\n");
  EXPECT_THROW(read_report(bad_flag), Error);
}

TEST(Eval, ThreadCountDoesNotChangeResults) {
  Rng rng(5);
  Corpus train, test;
  for (int s = 0; s < 40; ++s) {
    std::vector<WordId> a, b;
    for (int i = 0; i < 6; ++i) {
      a.push_back(3 + static_cast<WordId>(rng.below(15)));
      const auto w = static_cast<WordId>(rng.below(18));
      b.push_back(w == Vocabulary::bos_id ? Vocabulary::unk_id : w);
    }
    train.sentences.push_back(a);
    test.sentences.push_back(b);
  }
  Vocabulary v = small_vocab(15);
  TrainOptions opt;
  opt.burn_in = 2;
  HpylmModel m = train_hpylm(train, v, 3, opt, rng);
  HitLengthIndex hits(m.training_counts());
  auto p = [&](std::span<const WordId> c, WordId w) { return m.prob(c, w); };
  auto odd = [](WordId w) { return w % 2 == 1; };
  EvalReport one = evaluate(test, v, 3, p, odd, &hits, 1);
  for (unsigned t : {2u, 3u, 7u, 64u}) {
    EvalReport many = evaluate(test, v, 3, p, odd, &hits, t);
    EXPECT_EQ(many.records, one.records) << t;
  }
}

TEST(Eval, ZeroProbabilityIsAnError) {
  Vocabulary v = small_vocab(2);
  auto zero = [](std::span<const WordId>, WordId) { return 0.0; };
  EXPECT_THROW(evaluate(corpus_of({{3}}), v, 2, zero, never, nullptr), std::logic_error);
}
