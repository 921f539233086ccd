#pragma once

// Little-endian binary primitives for model files. Reals are stored as their
// IEEE-754 bit patterns so a round trip is value-exact.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "hpyc/common.hpp"
#include "hpyc/corpus.hpp"
#include "hpyc/crp.hpp"

namespace hpyc {

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void ids(const IdSeq& s) {
    u8(static_cast<std::uint8_t>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) u32(s[i]);
  }
  void params(const PypParams& p) {
    f64(p.discount);
    f64(p.strength);
  }

 private:
  template <class T>
  void put_le(T v) {
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, sizeof buf);
  }

  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint8_t u8() {
    char c;
    if (!in_.get(c)) throw format_error("truncated model file");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint64_t n = u64();
    if (n > (std::uint64_t{1} << 32)) throw format_error("corrupt string length in model file");
    std::string s(n, '\0');
    if (n && !in_.read(s.data(), static_cast<std::streamsize>(n))) throw format_error("truncated model file");
    return s;
  }
  IdSeq ids() {
    std::uint8_t n = u8();
    if (n > kMaxOrder) throw format_error("corrupt id sequence in model file");
    IdSeq s;
    for (std::uint8_t i = 0; i < n; ++i) s.push_back(u32());
    return s;
  }
  PypParams params() {
    PypParams p;
    p.discount = f64();
    p.strength = f64();
    if (!p.valid()) throw format_error("invalid hyperparameters in model file");
    return p;
  }

 private:
  template <class T>
  T get_le() {
    unsigned char buf[sizeof(T)];
    if (!in_.read(reinterpret_cast<char*>(buf), sizeof buf)) throw format_error("truncated model file");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }

  std::istream& in_;
};

template <class R>
void write_restaurant(BinaryWriter& w, const R& r) {
  w.u64(r.dish_count());
  for (const auto& e : r.dishes()) {
    w.u32(e.dish);
    w.u32(static_cast<std::uint32_t>(e.tables.buckets().size()));
    for (const auto& b : e.tables.buckets()) {
      w.u32(b.occupancy);
      w.u32(b.tables);
    }
  }
}

template <class R>
R read_restaurant(BinaryReader& rd) {
  R r;
  std::uint64_t dishes = rd.u64();
  for (std::uint64_t i = 0; i < dishes; ++i) {
    WordId dish = rd.u32();
    std::uint32_t buckets = rd.u32();
    if (buckets == 0) throw format_error("dish without tables in model file");
    for (std::uint32_t k = 0; k < buckets; ++k) {
      std::uint32_t occupancy = rd.u32();
      std::uint32_t tables = rd.u32();
      if (occupancy == 0 || tables == 0) throw format_error("empty table in model file");
      r.add_tables(dish, occupancy, tables);
    }
  }
  return r;
}

inline void write_vocabulary(BinaryWriter& w, const Vocabulary& v) {
  w.u64(v.min_count());
  w.u64(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    w.str(v.decode(static_cast<WordId>(i)));
    w.u64(v.count(static_cast<WordId>(i)));
  }
}

inline Vocabulary read_vocabulary(BinaryReader& rd) {
  Vocabulary v;
  v.set_min_count(rd.u64());
  std::uint64_t n = rd.u64();
  if (n < 3) throw format_error("vocabulary without special symbols");
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string sym = rd.str();
    std::uint64_t count = rd.u64();
    WordId id = i < 3 ? static_cast<WordId>(i) : v.add(sym);
    if (id != i || v.decode(id) != sym) throw format_error("corrupt vocabulary in model file");
    v.set_count(id, count);
  }
  return v;
}

}  // namespace hpyc
