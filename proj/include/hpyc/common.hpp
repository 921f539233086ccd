#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace hpyc {

using WordId = std::uint32_t;

/// Highest supported n-gram order. Contexts hold at most kMaxOrder - 1 ids.
inline constexpr int kMaxOrder = 8;

/// Failure categories; the CLI maps each one to its own exit code.
enum class ErrorKind { usage, io, format };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return Error(ErrorKind::usage, what); }
inline Error io_error(const std::string& what) { return Error(ErrorKind::io, what); }
inline Error format_error(const std::string& what) { return Error(ErrorKind::format, what); }

/// Fixed-capacity id sequence used for contexts and n-grams. Value type,
/// hashable, ordered lexicographically by (size, ids).
class IdSeq {
 public:
  IdSeq() = default;
  IdSeq(std::initializer_list<WordId> ids) {
    for (WordId id : ids) push_back(id);
  }
  explicit IdSeq(std::span<const WordId> ids) {
    for (WordId id : ids) push_back(id);
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  WordId operator[](std::size_t i) const noexcept { return ids_[i]; }
  WordId& operator[](std::size_t i) noexcept { return ids_[i]; }
  WordId back() const noexcept { return ids_[size_ - 1]; }

  void push_back(WordId id) {
    if (size_ == ids_.size()) throw std::length_error("IdSeq capacity exceeded");
    ids_[size_++] = id;
  }

  std::span<const WordId> view() const noexcept { return {ids_.data(), size_}; }

  /// The last k ids (k <= size()).
  IdSeq suffix(std::size_t k) const noexcept {
    IdSeq out;
    for (std::size_t i = size_ - k; i < size_; ++i) out.ids_[out.size_++] = ids_[i];
    return out;
  }

  /// Appends one id to a copy.
  IdSeq extended(WordId id) const {
    IdSeq out = *this;
    out.push_back(id);
    return out;
  }

  friend bool operator==(const IdSeq& x, const IdSeq& y) noexcept {
    if (x.size_ != y.size_) return false;
    for (std::size_t i = 0; i < x.size_; ++i)
      if (x.ids_[i] != y.ids_[i]) return false;
    return true;
  }
  friend bool operator<(const IdSeq& x, const IdSeq& y) noexcept {
    if (x.size_ != y.size_) return x.size_ < y.size_;
    for (std::size_t i = 0; i < x.size_; ++i)
      if (x.ids_[i] != y.ids_[i]) return x.ids_[i] < y.ids_[i];
    return false;
  }

 private:
  std::array<WordId, kMaxOrder> ids_{};
  std::uint8_t size_ = 0;
};

inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Deterministic hashes: iteration order of hashed containers must not depend
// on the process, or seeded runs stop being byte-reproducible.
struct IdHash {
  std::size_t operator()(WordId id) const noexcept { return static_cast<std::size_t>(mix64(id + 0x9e3779b97f4a7c15ULL)); }
};

struct IdSeqHash {
  std::size_t operator()(const IdSeq& s) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL ^ s.size();
    for (std::size_t i = 0; i < s.size(); ++i) h = mix64(h ^ (s[i] + 0x9e3779b97f4a7c15ULL));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace hpyc
