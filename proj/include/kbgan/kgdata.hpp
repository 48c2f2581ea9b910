#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kbgan {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using Rng = std::mt19937_64;

struct Triple {
  EntityId h = 0;
  RelationId r = 0;
  EntityId t = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

enum class Side { Head, Tail };

inline const char* to_string(Side s) { return s == Side::Head ? "head" : "tail"; }

struct TripleHash {
  std::size_t operator()(const Triple& x) const noexcept {
    std::uint64_t k = (static_cast<std::uint64_t>(x.h) << 32) | x.t;
    k ^= static_cast<std::uint64_t>(x.r) * 0x9E3779B97F4A7C15ULL;
    k ^= k >> 29;
    k *= 0xBF58476D1CE4E5B9ULL;
    k ^= k >> 32;
    return static_cast<std::size_t>(k);
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Dense bidirectional name <-> id maps for entities and relations.
/// Ids are handed out in first-appearance order, so they always cover [0, size).
class Vocabulary {
 public:
  EntityId add_entity(std::string_view name);
  RelationId add_relation(std::string_view name);

  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;

  const std::string& entity_name(EntityId id) const { return entity_names_.at(id); }
  const std::string& relation_name(RelationId id) const { return relation_names_.at(id); }

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }

  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const { return relation_names_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entity_names_ == b.entity_names_ && a.relation_names_ == b.relation_names_;
  }

 private:
  static std::uint32_t intern(std::vector<std::string>& names,
                              std::unordered_map<std::string, std::uint32_t>& index,
                              std::string_view name);

  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
};

struct TripleStore {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
};

struct Dataset {
  Vocabulary vocab;
  TripleStore triples;
};

/// Parses a tab-separated head/relation/tail file, interning names into `vocab`.
std::vector<Triple> load_triples(const std::filesystem::path& path, Vocabulary& vocab);
std::vector<Triple> parse_triples(std::string_view text, Vocabulary& vocab,
                                  const std::string& source = "<memory>");

/// Loads `train.txt`, `valid.txt`, `test.txt` from `dir` into one shared vocabulary.
/// A pre-populated vocabulary (e.g. from a checkpoint) keeps its ids.
Dataset load_dataset(const std::filesystem::path& dir, Vocabulary vocab = {});

/// Every triple known to be true, across all splits.
class FilterIndex {
 public:
  FilterIndex() = default;
  explicit FilterIndex(const TripleStore& store);

  bool contains(const Triple& x) const { return all_.count(x) != 0; }
  std::size_t size() const { return all_.size(); }

  /// Known true tails for (h, r); empty if none.
  const std::vector<EntityId>& tails(EntityId h, RelationId r) const;
  /// Known true heads for (r, t); empty if none.
  const std::vector<EntityId>& heads(RelationId r, EntityId t) const;

 private:
  void insert(const Triple& x);
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  std::unordered_set<Triple, TripleHash> all_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;
  std::vector<EntityId> empty_;
};

inline FilterIndex build_filter_index(const TripleStore& store) { return FilterIndex(store); }

struct RelationBern {
  double tph = 1.0;  // mean distinct tails per head
  double hpt = 1.0;  // mean distinct heads per tail
  double p_replace_head = 0.5;
};

/// Per-relation "bern" corruption statistics, computed from the training split.
class BernStats {
 public:
  BernStats() = default;
  BernStats(std::size_t num_relations, const std::vector<Triple>& train);

  /// Throws std::out_of_range for relations that never occur in training.
  const RelationBern& at(RelationId r) const;
  bool has(RelationId r) const { return r < stats_.size() && present_[r]; }
  /// Probability of corrupting the head; unseen relations fall back to 0.5.
  double p_replace_head(RelationId r) const { return has(r) ? stats_[r].p_replace_head : 0.5; }
  std::size_t num_relations() const { return stats_.size(); }

 private:
  std::vector<RelationBern> stats_;
  std::vector<bool> present_;
};

BernStats compute_bern_stats(const std::vector<Triple>& train, std::size_t num_relations = 0);

struct CandidateSet {
  Triple positive;
  Side side = Side::Tail;
  std::vector<Triple> candidates;
};

/// Bernoulli(p_replace_head) side choice, then `ns` i.i.d. uniform replacement entities.
/// Candidates are not filtered against known truths.
CandidateSet sample_candidates(const Triple& positive, std::size_t ns, std::size_t num_entities,
                               const BernStats& bern, Rng& rng);

Side sample_side(RelationId r, const BernStats& bern, Rng& rng);

inline Triple corrupt(Triple x, Side side, EntityId e) {
  (side == Side::Head ? x.h : x.t) = e;
  return x;
}

}  // namespace kbgan
