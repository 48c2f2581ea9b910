#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kbgan/kgdata.hpp"
#include "kbgan/models.hpp"

namespace kbgan {

/// On-disk model: header, vocabulary and every embedding table as 32-bit floats.
///
/// Layout (all integers u32 little-endian, all reals IEEE-754 binary32 little-endian):
///   "KGE1"
///   header_len
///   header: kind, k, |E|, |R|, norm, metadata_len, metadata bytes   (header_len bytes)
///   |E| entity names, then |R| relation names, each as len + UTF-8 bytes
///   tables in TableId order, each row-major, rows x width
struct Checkpoint {
  Vocabulary vocab;
  ModelParams<float> params;
  std::string metadata;
};

enum class CheckpointErrc { Io, BadFormat, Truncated, CountMismatch };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  CheckpointErrc code() const { return code_; }

 private:
  CheckpointErrc code_;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <class Scalar>
Checkpoint make_checkpoint(const Vocabulary& vocab, const ModelParams<Scalar>& params, std::string metadata = {}) {
  return {vocab, params.template cast<float>(), std::move(metadata)};
}

}  // namespace kbgan
