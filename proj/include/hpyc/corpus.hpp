#pragma once

// Vocabulary construction, corpus encoding and boundary-padded n-gram events.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hpyc/common.hpp"

namespace hpyc {

inline constexpr std::string_view kUnkSymbol = "<unk>";
inline constexpr std::string_view kBosSymbol = "<s>";
inline constexpr std::string_view kEosSymbol = "</s>";

/// True when `text` is well-formed UTF-8 (no overlongs, surrogates or code
/// points above U+10FFFF).
inline bool valid_utf8(std::string_view text) {
  std::size_t i = 0;
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len;
    std::uint32_t cp;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

using RawSentence = std::vector<std::string>;

/// Reads one sentence per line, tokens separated by spaces or tabs. Blank
/// lines are skipped. Invalid UTF-8 is a format error naming the line.
inline std::vector<RawSentence> read_sentences(std::istream& in) {
  std::vector<RawSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!valid_utf8(line)) throw format_error("invalid UTF-8 on line " + std::to_string(line_no));
    RawSentence tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) tokens.emplace_back(line, i, j - i);
      i = j;
    }
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  if (in.bad()) throw io_error("read error");
  return out;
}

/// Bidirectional word <-> id map. Ids 0, 1, 2 are always UNK, BOS and EOS.
class Vocabulary {
 public:
  static constexpr WordId unk_id = 0;
  static constexpr WordId bos_id = 1;
  static constexpr WordId eos_id = 2;

  Vocabulary() {
    for (std::string_view s : {kUnkSymbol, kBosSymbol, kEosSymbol}) {
      index_.emplace(std::string(s), static_cast<WordId>(symbols_.size()));
      symbols_.emplace_back(s);
      counts_.push_back(0);
    }
  }

  /// Id of `word`, adding it when absent. Special surface strings are
  /// reserved and return their fixed ids.
  WordId add(std::string_view word, std::uint64_t count = 0) {
    auto it = index_.find(std::string(word));
    if (it != index_.end()) {
      counts_[it->second] += count;
      return it->second;
    }
    auto id = static_cast<WordId>(symbols_.size());
    index_.emplace(std::string(word), id);
    symbols_.emplace_back(word);
    counts_.push_back(count);
    return id;
  }

  std::optional<WordId> find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  WordId encode(std::string_view word) const { return find(word).value_or(unk_id); }
  const std::string& decode(WordId id) const { return symbols_.at(id); }

  /// Number of stored symbols including the three specials.
  std::size_t size() const noexcept { return symbols_.size(); }
  /// Number of symbols a model can predict: everything except BOS.
  std::size_t support_size() const noexcept { return symbols_.size() - 1; }

  std::uint64_t count(WordId id) const { return counts_.at(id); }
  void set_count(WordId id, std::uint64_t c) { counts_.at(id) = c; }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  std::uint64_t min_count() const noexcept { return min_count_; }
  void set_min_count(std::uint64_t m) noexcept { min_count_ = m; }

  /// `token<TAB>id<TAB>count` per symbol, in id order.
  void write_tsv(std::ostream& out) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i) out << symbols_[i] << '\t' << i << '\t' << counts_[i] << '\n';
  }

  friend bool operator==(const Vocabulary& x, const Vocabulary& y) {
    return x.symbols_ == y.symbols_ && x.counts_ == y.counts_ && x.min_count_ == y.min_count_;
  }

 private:
  std::vector<std::string> symbols_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
  std::uint64_t min_count_ = 1;
};

inline bool is_special_symbol(std::string_view w) { return w == kUnkSymbol || w == kBosSymbol || w == kEosSymbol; }

/// Every type seen at least `min_count` times gets an id, in order of first
/// occurrence. Counts of pruned types accumulate on UNK; EOS counts sentences.
inline Vocabulary build_vocabulary(const std::vector<RawSentence>& sentences, std::uint64_t min_count) {
  std::unordered_map<std::string_view, std::uint64_t> freq;
  std::vector<std::string_view> order;
  for (const auto& s : sentences) {
    for (const auto& w : s) {
      if (w == kBosSymbol || w == kEosSymbol) throw format_error("reserved symbol '" + w + "' in corpus");
      auto [it, fresh] = freq.emplace(w, 0);
      if (fresh) order.push_back(it->first);
      ++it->second;
    }
  }
  Vocabulary vocab;
  vocab.set_min_count(min_count);
  std::uint64_t unk = 0;
  for (std::string_view w : order) {
    std::uint64_t c = freq[w];
    if (w == kUnkSymbol || c < min_count)
      unk += c;
    else
      vocab.add(w, c);
  }
  vocab.set_count(Vocabulary::unk_id, unk);
  vocab.set_count(Vocabulary::eos_id, sentences.size());
  return vocab;
}

/// Sentences as ids. Token counts exclude the EOS padding.
struct Corpus {
  std::vector<std::vector<WordId>> sentences;

  std::size_t sentence_count() const noexcept { return sentences.size(); }
  std::size_t token_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
  std::size_t type_count() const {
    std::unordered_set<WordId> types;
    for (const auto& s : sentences) types.insert(s.begin(), s.end());
    return types.size();
  }
};

inline Corpus encode_corpus(const std::vector<RawSentence>& raw, const Vocabulary& vocab) {
  Corpus c;
  c.sentences.reserve(raw.size());
  for (const auto& s : raw) {
    std::vector<WordId> ids;
    ids.reserve(s.size());
    for (const auto& w : s) {
      WordId id = vocab.encode(w);
      if (id == Vocabulary::bos_id || id == Vocabulary::eos_id) throw format_error("reserved symbol '" + w + "' in corpus");
      ids.push_back(id);
    }
    c.sentences.push_back(std::move(ids));
  }
  return c;
}

/// One prediction: `context` holds exactly n - 1 ids, BOS-padded on the left.
struct Event {
  IdSeq context;
  WordId target;
  friend bool operator==(const Event&, const Event&) = default;
};

/// Calls fn(sentence index, position, event) for each of the L + 1 events of
/// every sentence (targets w_1..w_L, then EOS).
template <class Fn>
void for_each_event(const Corpus& corpus, int order, Fn&& fn) {
  if (order < 1 || order > kMaxOrder) throw usage_error("order must be in [1, " + std::to_string(kMaxOrder) + "]");
  const std::size_t ctx_len = static_cast<std::size_t>(order - 1);
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto& sent = corpus.sentences[s];
    for (std::size_t i = 0; i <= sent.size(); ++i) {
      Event e;
      for (std::size_t k = ctx_len; k > 0; --k)
        e.context.push_back(i >= k ? sent[i - k] : Vocabulary::bos_id);
      e.target = i < sent.size() ? sent[i] : Vocabulary::eos_id;
      fn(s, i, e);
    }
  }
}

inline std::vector<Event> ngram_stream(const Corpus& corpus, int order) {
  std::vector<Event> events;
  events.reserve(corpus.token_count() + corpus.sentence_count());
  for_each_event(corpus, order, [&](std::size_t, std::size_t, const Event& e) { events.push_back(e); });
  return events;
}

}  // namespace hpyc
