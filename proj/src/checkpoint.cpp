#include "kbgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kbgan {
namespace {

constexpr std::string_view kMagic = "KGE1";
constexpr std::uint32_t kFixedHeaderBytes = 6 * sizeof(std::uint32_t);

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_string(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointErrc::Truncated, std::string("checkpoint truncated while reading ") + what);
    }
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint32_t u32(const char* what) {
    auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

  std::string string(const char* what) {
    const auto n = u32(what);
    return std::string(take(n, what));
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  const auto& spec = p.spec;
  if (ckpt.vocab.num_entities() != p.num_entities() || ckpt.vocab.num_relations() != p.num_relations()) {
    throw CheckpointError(CheckpointErrc::CountMismatch, "vocabulary size does not match embedding tables");
  }
  for (const auto& t : p.tables) {
    if (t.cols() != spec.width()) {
      throw CheckpointError(CheckpointErrc::CountMismatch, "table width does not match model dimension");
    }
  }

  std::string out;
  out.append(kMagic);
  put_u32(out, kFixedHeaderBytes + static_cast<std::uint32_t>(ckpt.metadata.size()));
  put_u32(out, static_cast<std::uint32_t>(spec.kind));
  put_u32(out, static_cast<std::uint32_t>(spec.k));
  put_u32(out, static_cast<std::uint32_t>(p.num_entities()));
  put_u32(out, static_cast<std::uint32_t>(p.num_relations()));
  put_u32(out, static_cast<std::uint32_t>(spec.norm));
  put_string(out, ckpt.metadata);
  for (const auto& name : ckpt.vocab.entity_names()) put_string(out, name);
  for (const auto& name : ckpt.vocab.relation_names()) put_string(out, name);
  for (const auto& t : p.tables) {
    for (Eigen::Index i = 0; i < t.size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(t.data()[i]));
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError(CheckpointErrc::BadFormat, "bad format: missing KGE1 magic");
  }
  Reader in(bytes.substr(kMagic.size()));
  const auto header_len = in.u32("header length");
  const auto kind = in.u32("model kind");
  const auto k = in.u32("dimension");
  const auto n_ent = in.u32("entity count");
  const auto n_rel = in.u32("relation count");
  const auto norm = in.u32("norm flag");

  if (kind > static_cast<std::uint32_t>(ModelKind::ComplEx)) {
    throw CheckpointError(CheckpointErrc::BadFormat, "bad format: unknown model kind " + std::to_string(kind));
  }
  if (norm > static_cast<std::uint32_t>(Norm::L2)) {
    throw CheckpointError(CheckpointErrc::BadFormat, "bad format: unknown norm flag " + std::to_string(norm));
  }
  ModelSpec spec{static_cast<ModelKind>(kind), static_cast<Norm>(norm), static_cast<int>(k)};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointErrc::BadFormat, std::string("bad format: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.metadata = in.string("metadata");
  if (header_len != kFixedHeaderBytes + ckpt.metadata.size()) {
    throw CheckpointError(CheckpointErrc::BadFormat, "bad format: header length disagrees with header contents");
  }

  for (std::uint32_t i = 0; i < n_ent; ++i) {
    if (ckpt.vocab.add_entity(in.string("entity name")) != i) {
      throw CheckpointError(CheckpointErrc::CountMismatch, "duplicate entity name in vocabulary");
    }
  }
  for (std::uint32_t i = 0; i < n_rel; ++i) {
    if (ckpt.vocab.add_relation(in.string("relation name")) != i) {
      throw CheckpointError(CheckpointErrc::CountMismatch, "duplicate relation name in vocabulary");
    }
  }

  const std::uint64_t rows = spec.kind == ModelKind::TransD ? 2ull * (n_ent + n_rel) : 1ull * n_ent + n_rel;
  if (in.remaining() < rows * static_cast<std::uint64_t>(spec.width()) * 4) {
    throw CheckpointError(CheckpointErrc::Truncated, "checkpoint truncated: tables shorter than header counts");
  }
  ckpt.params = ModelParams<float>(spec, n_ent, n_rel);
  for (auto& t : ckpt.params.tables) {
    const auto n = static_cast<std::size_t>(t.size());
    auto raw = in.take(n * 4, "embedding table");
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t v = 0;
      for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
      t.data()[i] = std::bit_cast<float>(v);
    }
  }
  if (in.remaining() != 0) {
    throw CheckpointError(CheckpointErrc::CountMismatch,
                          "checkpoint has " + std::to_string(in.remaining()) + " bytes beyond the declared tables");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrc::Io, "cannot write checkpoint: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointErrc::Io, "failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrc::Io, "cannot open checkpoint: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace kbgan
