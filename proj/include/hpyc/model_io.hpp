#pragma once

// Versioned model files: 8-byte magic, format version, model kind, payload.

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "hpyc/hpylm.hpp"
#include "hpyc/hpylmc.hpp"
#include "hpyc/mkn.hpp"
#include "hpyc/serialize.hpp"

namespace hpyc {

inline constexpr char kModelMagic[8] = {'H', 'P', 'Y', 'C', 'M', 'O', 'D', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

enum class ModelKind : std::uint8_t { mkn = 0, hpylm = 1, hpylmc = 2 };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::mkn: return "mkn";
    case ModelKind::hpylm: return "hpylm";
    case ModelKind::hpylmc: return "hpylmc";
  }
  return "?";
}
inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "mkn") return ModelKind::mkn;
  if (s == "hpylm") return ModelKind::hpylm;
  if (s == "hpylmc") return ModelKind::hpylmc;
  throw usage_error("unknown model kind '" + std::string(s) + "'");
}

using AnyModel = std::variant<MknModel, HpylmModel, CompoundModel>;

inline ModelKind kind_of(const AnyModel& m) { return static_cast<ModelKind>(m.index()); }

inline void write_model(std::ostream& out, const AnyModel& model) {
  out.write(kModelMagic, sizeof kModelMagic);
  BinaryWriter w(out);
  w.u32(kModelVersion);
  w.u8(static_cast<std::uint8_t>(kind_of(model)));
  std::visit([&](const auto& m) { m.write(w); }, model);
}

inline AnyModel read_model(std::istream& in) {
  char magic[sizeof kModelMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kModelMagic, sizeof magic) != 0)
    throw format_error("not a model file");
  BinaryReader rd(in);
  std::uint32_t version = rd.u32();
  if (version > kModelVersion)
    throw format_error("model file version " + std::to_string(version) + " is newer than supported version " +
                       std::to_string(kModelVersion));
  if (version == 0) throw format_error("invalid model file version 0");
  switch (rd.u8()) {
    case 0: return MknModel::read(rd);
    case 1: return HpylmModel::read(rd);
    case 2: return CompoundModel::read(rd);
    default: throw format_error("unknown model kind in model file");
  }
}

inline void save_model(const std::string& path, const AnyModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write model file '" + path + "'");
  write_model(out, model);
  out.flush();
  if (!out) throw io_error("write error on '" + path + "'");
}

inline AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open model file '" + path + "'");
  return read_model(in);
}

inline const Vocabulary& vocabulary_of(const AnyModel& m) {
  return std::visit([](const auto& x) -> const Vocabulary& { return x.vocabulary(); }, m);
}
inline int order_of(const AnyModel& m) {
  return std::visit([](const auto& x) { return x.order(); }, m);
}
inline const NgramCounts& training_counts_of(const AnyModel& m) {
  return std::visit([](const auto& x) -> const NgramCounts& { return x.training_counts(); }, m);
}

}  // namespace hpyc
