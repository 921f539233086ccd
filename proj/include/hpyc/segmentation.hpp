#pragma once

// Precomputed compound segmentations: dictionary loading, linking-element
// handling, hyphen splitting and head-first component ordering.

#include <algorithm>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hpyc/common.hpp"
#include "hpyc/corpus.hpp"

namespace hpyc {

/// Where a linking element goes: appended to the preceding component,
/// prepended to the following one, or dropped.
enum class LinkScheme { merge_left, merge_right, drop };

/// Component generation order. `ling` generates the rightmost (head)
/// component first; `inv` generates left to right.
enum class Direction { ling, inv };

inline std::string_view to_string(LinkScheme s) {
  switch (s) {
    case LinkScheme::merge_left: return "merge-left";
    case LinkScheme::merge_right: return "merge-right";
    case LinkScheme::drop: return "delete";
  }
  return "?";
}
inline std::string_view to_string(Direction d) { return d == Direction::ling ? "ling" : "inv"; }

inline LinkScheme parse_link_scheme(std::string_view s) {
  if (s == "merge-left") return LinkScheme::merge_left;
  if (s == "merge-right") return LinkScheme::merge_right;
  if (s == "delete") return LinkScheme::drop;
  throw usage_error("unknown linking scheme '" + std::string(s) + "'");
}
inline Direction parse_direction(std::string_view s) {
  if (s == "ling") return Direction::ling;
  if (s == "inv") return Direction::inv;
  throw usage_error("unknown direction '" + std::string(s) + "'");
}
/// Linker attachment that matches a direction: left for ling, right for inv.
inline LinkScheme default_scheme(Direction d) {
  return d == Direction::ling ? LinkScheme::merge_left : LinkScheme::merge_right;
}

struct Segment {
  std::string text;
  bool is_linker = false;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Splits on '-' and drops the hyphens; empty pieces vanish. A token made
/// only of hyphens stays whole.
inline std::vector<std::string> split_hyphens(std::string_view word) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= word.size(); ++i) {
    if (i == word.size() || word[i] == '-') {
      if (i > start) parts.emplace_back(word.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.empty()) parts.emplace_back(word);
  return parts;
}

/// Applies the linking scheme to a raw segment list; the result contains no
/// bare linkers.
inline std::vector<std::string> merge_linkers(const std::vector<Segment>& segments, LinkScheme scheme) {
  std::vector<std::string> out;
  std::string pending;  // linker text waiting for the next component (merge-right)
  for (const Segment& seg : segments) {
    if (!seg.is_linker) {
      out.push_back(pending + seg.text);
      pending.clear();
      continue;
    }
    switch (scheme) {
      case LinkScheme::drop: break;
      case LinkScheme::merge_left:
        if (out.empty())
          pending += seg.text;
        else
          out.back() += seg.text;
        break;
      case LinkScheme::merge_right: pending += seg.text; break;
    }
  }
  if (!pending.empty()) {
    if (out.empty()) throw format_error("segmentation has no component");
    out.back() += pending;
  }
  return out;
}

class SegmentationDictionary {
 public:
  SegmentationDictionary(LinkScheme scheme = LinkScheme::merge_left, Direction direction = Direction::ling)
      : scheme_(scheme), direction_(direction) {}

  LinkScheme scheme() const noexcept { return scheme_; }
  Direction direction() const noexcept { return direction_; }
  std::size_t size() const noexcept { return raw_.size(); }

  /// Adds an entry; the segments must concatenate to the surface word.
  void add(const std::string& surface, std::vector<Segment> segments) {
    std::string joined;
    bool has_component = false;
    for (const Segment& s : segments) {
      if (s.text.empty()) throw format_error("empty segment for '" + surface + "'");
      joined += s.text;
      has_component |= !s.is_linker;
    }
    if (!has_component) throw format_error("no non-linker segment for '" + surface + "'");
    if (joined != surface)
      throw format_error("segments of '" + surface + "' concatenate to '" + joined + "'");
    std::vector<std::string> parts;
    for (const std::string& piece : merge_linkers(segments, scheme_))
      for (std::string& h : split_hyphens(piece)) parts.push_back(std::move(h));
    merged_[surface] = std::move(parts);
    raw_[surface] = std::move(segments);
  }

  const std::vector<Segment>* raw_entry(const std::string& surface) const {
    auto it = raw_.find(surface);
    return it == raw_.end() ? nullptr : &it->second;
  }

  /// Components of a surface word in surface order, after linker handling and
  /// hyphen splitting. Unlisted hyphen-free words are a single component.
  std::vector<std::string> components(std::string_view word) const {
    if (is_special_symbol(word)) return {std::string(word)};
    auto it = merged_.find(std::string(word));
    if (it != merged_.end()) return it->second;
    return split_hyphens(word);
  }

  /// Parses `surface<TAB>seg seg ...` lines; linker segments start with '+'
  /// and '#' starts a comment line.
  static SegmentationDictionary parse(std::istream& in, LinkScheme scheme, Direction direction) {
    SegmentationDictionary dict(scheme, direction);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const std::string where = "segmentation line " + std::to_string(line_no) + ": ";
      if (!valid_utf8(line)) throw format_error(where + "invalid UTF-8");
      auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0) throw format_error(where + "expected surface<TAB>segments");
      std::string surface = line.substr(0, tab);
      std::vector<Segment> segments;
      std::size_t i = tab + 1;
      while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j > i) {
          std::string tok = line.substr(i, j - i);
          bool linker = tok[0] == '+';
          if (linker) tok.erase(0, 1);
          if (tok.empty()) throw format_error(where + "empty linking element");
          segments.push_back(Segment{std::move(tok), linker});
        }
        i = j;
      }
      if (segments.empty()) throw format_error(where + "no segments");
      try {
        dict.add(surface, std::move(segments));
      } catch (const Error& e) {
        throw format_error(where + e.what());
      }
    }
    if (in.bad()) throw io_error("read error in segmentation dictionary");
    return dict;
  }

 private:
  LinkScheme scheme_;
  Direction direction_;
  std::unordered_map<std::string, std::vector<Segment>> raw_;
  std::unordered_map<std::string, std::vector<std::string>> merged_;
};

inline SegmentationDictionary load_dictionary(const std::string& path, LinkScheme scheme, Direction direction) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open segmentation dictionary '" + path + "'");
  return SegmentationDictionary::parse(in, scheme, direction);
}

/// A word as components over the component vocabulary. `lambda` holds the
/// 1-based surface positions in generation order; lambda[0] is the head.
struct CompoundWord {
  std::vector<WordId> components;
  std::vector<std::size_t> lambda;

  std::size_t length() const noexcept { return components.size(); }
  WordId head() const { return components[lambda.front() - 1]; }
  /// Components in generation order (head first).
  std::vector<WordId> ordered() const {
    std::vector<WordId> out;
    out.reserve(lambda.size());
    for (std::size_t pos : lambda) out.push_back(components[pos - 1]);
    return out;
  }
  friend bool operator==(const CompoundWord&, const CompoundWord&) = default;
};

inline std::vector<std::size_t> generation_order(std::size_t length, Direction direction) {
  std::vector<std::size_t> lambda(length);
  for (std::size_t i = 0; i < length; ++i) lambda[i] = direction == Direction::ling ? length - i : i + 1;
  return lambda;
}

/// Union of the components of every word type, ids assigned in word-id order.
/// Specials keep ids 0-2; counts are summed word frequencies.
inline Vocabulary build_component_vocabulary(const Vocabulary& words, const SegmentationDictionary& dict) {
  Vocabulary comps;
  comps.set_min_count(words.min_count());
  for (WordId w = 0; w < 3; ++w) comps.set_count(w, words.count(w));
  for (WordId w = 3; w < words.size(); ++w)
    for (const std::string& c : dict.components(words.decode(w))) comps.add(c, words.count(w));
  return comps;
}

inline CompoundWord decompose(WordId word, const Vocabulary& words, const SegmentationDictionary& dict,
                              const Vocabulary& components) {
  CompoundWord out;
  if (word < 3) {
    out.components = {word};
  } else {
    for (const std::string& c : dict.components(words.decode(word))) {
      auto id = components.find(c);
      if (!id) throw std::logic_error("component '" + c + "' missing from component vocabulary");
      out.components.push_back(*id);
    }
  }
  out.lambda = generation_order(out.components.size(), dict.direction());
  return out;
}

}  // namespace hpyc
