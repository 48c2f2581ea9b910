#include "kbgan/kgdata.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kbgan {

std::uint32_t Vocabulary::intern(std::vector<std::string>& names,
                                 std::unordered_map<std::string, std::uint32_t>& index,
                                 std::string_view name) {
  auto [it, inserted] = index.try_emplace(std::string(name), static_cast<std::uint32_t>(names.size()));
  if (inserted) names.emplace_back(name);
  return it->second;
}

EntityId Vocabulary::add_entity(std::string_view name) {
  return intern(entity_names_, entity_index_, name);
}

RelationId Vocabulary::add_relation(std::string_view name) {
  return intern(relation_names_, relation_index_, name);
}

std::optional<EntityId> Vocabulary::find_entity(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocabulary::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Triple> parse_triples(std::string_view text, Vocabulary& vocab, const std::string& source) {
  std::vector<Triple> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::string_view fields[3];
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      std::string_view f = line.substr(start, tab == std::string_view::npos ? line.size() - start : tab - start);
      if (n < 3) fields[n] = f;
      ++n;
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (n != 3) {
      throw ParseError(source, line_no, "expected 3 tab-separated fields, found " + std::to_string(n));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw ParseError(source, line_no, "empty field");
    }
    Triple x;
    x.h = vocab.add_entity(fields[0]);
    x.r = vocab.add_relation(fields[1]);
    x.t = vocab.add_entity(fields[2]);
    out.push_back(x);
  }
  if (out.empty()) throw ParseError(source, 0, "no triples found (empty file)");
  return out;
}

std::vector<Triple> load_triples(const std::filesystem::path& path, Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open triple file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_triples(buf.str(), vocab, path.string());
}

Dataset load_dataset(const std::filesystem::path& dir, Vocabulary vocab) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("dataset directory not found: " + dir.string());
  }
  for (const char* name : {"train.txt", "valid.txt", "test.txt"}) {
    if (!std::filesystem::exists(dir / name)) {
      throw std::runtime_error("dataset file missing: " + (dir / name).string());
    }
  }
  Dataset ds;
  ds.vocab = std::move(vocab);
  ds.triples.train = load_triples(dir / "train.txt", ds.vocab);
  ds.triples.valid = load_triples(dir / "valid.txt", ds.vocab);
  ds.triples.test = load_triples(dir / "test.txt", ds.vocab);
  return ds;
}

FilterIndex::FilterIndex(const TripleStore& store) {
  for (const auto* split : {&store.train, &store.valid, &store.test}) {
    for (const Triple& x : *split) insert(x);
  }
}

void FilterIndex::insert(const Triple& x) {
  if (!all_.insert(x).second) return;
  tails_[key(x.h, x.r)].push_back(x.t);
  heads_[key(x.r, x.t)].push_back(x.h);
}

const std::vector<EntityId>& FilterIndex::tails(EntityId h, RelationId r) const {
  auto it = tails_.find(key(h, r));
  return it == tails_.end() ? empty_ : it->second;
}

const std::vector<EntityId>& FilterIndex::heads(RelationId r, EntityId t) const {
  auto it = heads_.find(key(r, t));
  return it == heads_.end() ? empty_ : it->second;
}

BernStats::BernStats(std::size_t num_relations, const std::vector<Triple>& train) {
  if (train.empty()) throw std::invalid_argument("bern statistics need a nonempty training split");
  for (const Triple& x : train) num_relations = std::max<std::size_t>(num_relations, x.r + 1);

  std::vector<std::vector<std::pair<EntityId, EntityId>>> pairs(num_relations);
  for (const Triple& x : train) pairs[x.r].emplace_back(x.h, x.t);

  stats_.assign(num_relations, RelationBern{});
  present_.assign(num_relations, false);
  for (std::size_t r = 0; r < num_relations; ++r) {
    auto& p = pairs[r];
    if (p.empty()) continue;
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());

    std::vector<EntityId> heads, tails;
    heads.reserve(p.size());
    tails.reserve(p.size());
    for (auto [h, t] : p) {
      heads.push_back(h);
      tails.push_back(t);
    }
    std::sort(heads.begin(), heads.end());
    std::sort(tails.begin(), tails.end());
    const auto n_heads = std::unique(heads.begin(), heads.end()) - heads.begin();
    const auto n_tails = std::unique(tails.begin(), tails.end()) - tails.begin();

    RelationBern& s = stats_[r];
    s.tph = static_cast<double>(p.size()) / static_cast<double>(n_heads);
    s.hpt = static_cast<double>(p.size()) / static_cast<double>(n_tails);
    s.p_replace_head = s.tph / (s.tph + s.hpt);
    present_[r] = true;
  }
}

const RelationBern& BernStats::at(RelationId r) const {
  if (!has(r)) throw std::out_of_range("relation " + std::to_string(r) + " does not occur in training data");
  return stats_[r];
}

BernStats compute_bern_stats(const std::vector<Triple>& train, std::size_t num_relations) {
  return BernStats(num_relations, train);
}

Side sample_side(RelationId r, const BernStats& bern, Rng& rng) {
  std::bernoulli_distribution head(bern.p_replace_head(r));
  return head(rng) ? Side::Head : Side::Tail;
}

CandidateSet sample_candidates(const Triple& positive, std::size_t ns, std::size_t num_entities,
                               const BernStats& bern, Rng& rng) {
  if (ns < 1) throw std::invalid_argument("candidate count must be at least 1");
  if (num_entities < 2) throw std::invalid_argument("need at least 2 entities to corrupt a triple");
  CandidateSet cs;
  cs.positive = positive;
  cs.side = sample_side(positive.r, bern, rng);
  std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(num_entities - 1));
  cs.candidates.reserve(ns);
  for (std::size_t i = 0; i < ns; ++i) cs.candidates.push_back(corrupt(positive, cs.side, pick(rng)));
  return cs;
}

}  // namespace kbgan
