#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "kbgan/kgdata.hpp"

namespace kbgan::testing {

/// Uniformly random distinct triples, split into train/valid/test.
inline Dataset make_random_kg(std::size_t n_ent, std::size_t n_rel, std::size_t n_train, std::size_t n_valid,
                              std::size_t n_test, std::uint64_t seed) {
  Dataset ds;
  for (std::size_t i = 0; i < n_ent; ++i) ds.vocab.add_entity("e" + std::to_string(i));
  for (std::size_t i = 0; i < n_rel; ++i) ds.vocab.add_relation("r" + std::to_string(i));
  Rng rng(seed);
  std::uniform_int_distribution<EntityId> e(0, static_cast<EntityId>(n_ent - 1));
  std::uniform_int_distribution<RelationId> r(0, static_cast<RelationId>(n_rel - 1));
  std::unordered_set<Triple, TripleHash> seen;
  auto fill = [&](std::vector<Triple>& out, std::size_t n) {
    while (out.size() < n) {
      Triple x{e(rng), r(rng), e(rng)};
      if (seen.insert(x).second) out.push_back(x);
    }
  };
  fill(ds.triples.train, n_train);
  fill(ds.triples.valid, n_valid);
  fill(ds.triples.test, n_test);
  return ds;
}

struct PlantedKgOptions {
  // Defaults: 200 entities, 2,000 triples.
  std::size_t types = 10;
  std::size_t clusters_per_type = 10;
  std::size_t cluster_size = 2;
  std::size_t relations = 50;
  std::size_t tails_per_head = 2;  // drawn from the target cluster
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 1;
};

/// Typed graph with planted fine structure. Entities belong to a type and a
/// cluster within it; relation r maps heads of type A_r to tails of type B_r, and a
/// head in cluster c links only to entities of cluster pi_r(c). Uniform negatives
/// are mostly of the wrong type; the informative ones share the right type.
inline Dataset make_planted_kg(const PlantedKgOptions& o) {
  Dataset ds;
  Rng rng(o.seed);
  const std::size_t per_type = o.clusters_per_type * o.cluster_size;
  auto entity = [&](std::size_t type, std::size_t cluster, std::size_t i) {
    return static_cast<EntityId>(type * per_type + cluster * o.cluster_size + i);
  };
  for (std::size_t ty = 0; ty < o.types; ++ty) {
    for (std::size_t c = 0; c < o.clusters_per_type; ++c) {
      for (std::size_t i = 0; i < o.cluster_size; ++i) {
        ds.vocab.add_entity("type" + std::to_string(ty) + "_c" + std::to_string(c) + "_" + std::to_string(i));
      }
    }
  }

  std::vector<Triple> all;
  std::uniform_int_distribution<std::size_t> pick_type(0, o.types - 1);
  for (std::size_t r = 0; r < o.relations; ++r) {
    ds.vocab.add_relation("rel" + std::to_string(r));
    const std::size_t head_type = pick_type(rng);
    std::size_t tail_type = pick_type(rng);
    if (o.types > 1) {
      while (tail_type == head_type) tail_type = pick_type(rng);
    }
    std::vector<std::size_t> perm(o.clusters_per_type);
    for (std::size_t c = 0; c < perm.size(); ++c) perm[c] = c;
    std::shuffle(perm.begin(), perm.end(), rng);

    for (std::size_t c = 0; c < o.clusters_per_type; ++c) {
      for (std::size_t i = 0; i < o.cluster_size; ++i) {
        std::vector<std::size_t> members(o.cluster_size);
        for (std::size_t j = 0; j < members.size(); ++j) members[j] = j;
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t j = 0; j < std::min(o.tails_per_head, o.cluster_size); ++j) {
          all.push_back({entity(head_type, c, i), static_cast<RelationId>(r), entity(tail_type, perm[c], members[j])});
        }
      }
    }
  }
  std::shuffle(all.begin(), all.end(), rng);
  const auto n_valid = static_cast<std::size_t>(o.valid_fraction * static_cast<double>(all.size()));
  const auto n_test = static_cast<std::size_t>(o.test_fraction * static_cast<double>(all.size()));
  ds.triples.valid.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_valid));
  ds.triples.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_valid),
                         all.begin() + static_cast<std::ptrdiff_t>(n_valid + n_test));
  ds.triples.train.assign(all.begin() + static_cast<std::ptrdiff_t>(n_valid + n_test), all.end());
  return ds;
}

}  // namespace kbgan::testing
