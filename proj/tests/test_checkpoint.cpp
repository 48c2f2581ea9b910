#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>

#include "kbgan/checkpoint.hpp"

using namespace kbgan;

namespace {

Checkpoint random_checkpoint(ModelSpec spec, std::size_t ne, std::size_t nr, std::uint64_t seed) {
  Vocabulary v;
  for (std::size_t i = 0; i < ne; ++i) v.add_entity("/m/ent_" + std::to_string(i) + (i % 3 ? "" : "\xc3\xa9"));
  for (std::size_t i = 0; i < nr; ++i) v.add_relation("rel/" + std::to_string(i));
  Rng rng(seed);
  return make_checkpoint(v, initialize_params<double>(spec, ne, nr, rng), "seed=" + std::to_string(seed));
}

void put_u32(std::string& bytes, std::size_t offset, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) bytes[offset + i] = static_cast<char>((value >> (8 * i)) & 0xff);
}

CheckpointErrc error_of(std::string_view bytes) {
  try {
    deserialize_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    return e.code();
  }
  FAIL("expected a checkpoint error");
  return CheckpointErrc::Io;
}

}  // namespace

TEST_CASE("round trip is bitwise over random shapes") {
  Rng shapes(1);
  std::uniform_int_distribution<int> ne(2, 40), nr(1, 6), k(1, 9), kind(0, 3), norm(1, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const auto kd = static_cast<ModelKind>(kind(shapes));
    const ModelSpec spec{kd, is_translational(kd) ? static_cast<Norm>(norm(shapes)) : Norm::None, k(shapes)};
    const auto a = random_checkpoint(spec, static_cast<std::size_t>(ne(shapes)), static_cast<std::size_t>(nr(shapes)),
                                     static_cast<std::uint64_t>(trial));
    const std::string bytes = serialize_checkpoint(a);
    const auto b = deserialize_checkpoint(bytes);
    CHECK(b.params.spec.kind == spec.kind);
    CHECK(b.params.spec.norm == spec.norm);
    CHECK(b.params.spec.k == spec.k);
    CHECK(b.vocab == a.vocab);
    CHECK(b.metadata == a.metadata);
    REQUIRE(b.params.tables.size() == a.params.tables.size());
    for (std::size_t t = 0; t < a.params.tables.size(); ++t) {
      CHECK(std::memcmp(a.params.tables[t].data(), b.params.tables[t].data(),
                        sizeof(float) * static_cast<std::size_t>(a.params.tables[t].size())) == 0);
    }
    CHECK(serialize_checkpoint(b) == bytes);
  }
}

TEST_CASE("header layout") {
  const auto c = random_checkpoint({ModelKind::TransD, Norm::L2, 7}, 5, 2, 3);
  const std::string bytes = serialize_checkpoint(c);
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
    return v;
  };
  CHECK(bytes.substr(0, 4) == "KGE1");
  CHECK(u32(4) == 24 + c.metadata.size());
  CHECK(u32(8) == 1);
  CHECK(u32(12) == 7);
  CHECK(u32(16) == 5);
  CHECK(u32(20) == 2);
  CHECK(u32(24) == 2);
  CHECK(u32(28) == c.metadata.size());
  // the last float is the final entry of the relation projection table
  float last;
  std::memcpy(&last, bytes.data() + bytes.size() - 4, 4);
  if constexpr (std::endian::native == std::endian::little) CHECK(last == c.params.tables[3](1, 6));
}

TEST_CASE("file round trip") {
  const auto c = random_checkpoint({ModelKind::ComplEx, Norm::None, 4}, 12, 3, 5);
  const auto path = std::filesystem::temp_directory_path() / "kbgan_test_ckpt.bin";
  save_checkpoint(path, c);
  const auto d = load_checkpoint(path);
  CHECK(d.params.tables[0] == c.params.tables[0]);
  CHECK(d.vocab == c.vocab);
  std::filesystem::remove(path);
  try {
    load_checkpoint(path);
    FAIL("expected an error");
  } catch (const CheckpointError& e) {
    CHECK(e.code() == CheckpointErrc::Io);
  }
}

TEST_CASE("corrupt inputs fail with a specific error") {
  const auto c = random_checkpoint({ModelKind::TransE, Norm::L1, 3}, 6, 2, 7);
  const std::string good = serialize_checkpoint(c);

  std::string bad_magic = good;
  bad_magic[3] = '2';
  CHECK(error_of(bad_magic) == CheckpointErrc::BadFormat);

  CHECK(error_of(good.substr(0, good.size() - 1)) == CheckpointErrc::Truncated);
  CHECK(error_of(good.substr(0, 10)) == CheckpointErrc::Truncated);
  CHECK(error_of("") == CheckpointErrc::BadFormat);

  std::string huge = good;
  put_u32(huge, 16, 0x7fffffff);
  CHECK(error_of(huge) == CheckpointErrc::Truncated);

  std::string kind = good;
  put_u32(kind, 8, 9);
  CHECK(error_of(kind) == CheckpointErrc::BadFormat);

  std::string hlen = good;
  put_u32(hlen, 4, 5);
  CHECK(error_of(hlen) == CheckpointErrc::BadFormat);

  CHECK(error_of(good + "x") == CheckpointErrc::CountMismatch);
}

TEST_CASE("saving a vocabulary that disagrees with the tables fails") {
  auto c = random_checkpoint({ModelKind::DistMult, Norm::None, 3}, 6, 2, 8);
  c.vocab.add_entity("extra");
  try {
    serialize_checkpoint(c);
    FAIL("expected an error");
  } catch (const CheckpointError& e) {
    CHECK(e.code() == CheckpointErrc::CountMismatch);
  }
}
