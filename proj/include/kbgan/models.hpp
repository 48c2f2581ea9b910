#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbgan/kgdata.hpp"

namespace kbgan {

enum class ModelKind : std::uint32_t { TransE = 0, TransD = 1, DistMult = 2, ComplEx = 3 };
enum class Norm : std::uint32_t { None = 0, L1 = 1, L2 = 2 };

enum class TableId : std::uint32_t { Entity = 0, Relation = 1, EntityProj = 2, RelationProj = 3 };

inline bool is_translational(ModelKind kind) {
  return kind == ModelKind::TransE || kind == ModelKind::TransD;
}

std::string_view to_string(ModelKind kind);
std::string_view to_string(Norm norm);
ModelKind parse_model_kind(std::string_view name);
Norm parse_norm(std::string_view name);

/// Shape of a model. `k` is the embedding dimension; for ComplEx it is the
/// complex dimension, so each row stores 2k reals (real parts, then imaginary).
struct ModelSpec {
  ModelKind kind = ModelKind::TransE;
  Norm norm = Norm::L1;
  int k = 50;

  int width() const { return kind == ModelKind::ComplEx ? 2 * k : k; }
  std::size_t num_tables() const { return kind == ModelKind::TransD ? 4 : 2; }

  /// Throws if the distance norm is not present exactly for translation models.
  void validate() const {
    if (k < 1) throw std::invalid_argument("embedding dimension must be >= 1");
    if (is_translational(kind) != (norm != Norm::None)) {
      throw std::invalid_argument("distance norm must be set for TransE/TransD and only for them");
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

template <class Scalar>
using EmbeddingTable = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <class Scalar>
struct ModelParams {
  ModelSpec spec;
  std::vector<EmbeddingTable<Scalar>> tables;

  ModelParams() = default;
  ModelParams(const ModelSpec& s, std::size_t num_entities, std::size_t num_relations) : spec(s) {
    spec.validate();
    const auto w = spec.width();
    tables.resize(spec.num_tables());
    for (std::size_t i = 0; i < tables.size(); ++i) {
      const bool entity = i == 0 || i == 2;
      tables[i] = EmbeddingTable<Scalar>::Zero(static_cast<Eigen::Index>(entity ? num_entities : num_relations), w);
    }
  }

  std::size_t num_entities() const { return static_cast<std::size_t>(tables.at(0).rows()); }
  std::size_t num_relations() const { return static_cast<std::size_t>(tables.at(1).rows()); }

  EmbeddingTable<Scalar>& table(TableId id) { return tables.at(static_cast<std::size_t>(id)); }
  const EmbeddingTable<Scalar>& table(TableId id) const { return tables.at(static_cast<std::size_t>(id)); }

  auto row(TableId id, Eigen::Index i) { return table(id).row(i); }
  auto row(TableId id, Eigen::Index i) const { return table(id).row(i); }

  template <class Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    out.spec = spec;
    for (const auto& t : tables) out.tables.push_back(t.template cast<Other>());
    return out;
  }

  bool all_finite() const {
    for (const auto& t : tables) {
      if (!t.allFinite()) return false;
    }
    return true;
  }
};

/// Row-sparse gradient: (table, row) -> dense row gradient. Entries for the same
/// row accumulate.
template <class Scalar>
class SparseGradient {
 public:
  struct Key {
    TableId table;
    Eigen::Index row;
  };

  template <class Derived>
  void add(TableId table, Eigen::Index row, const Eigen::MatrixBase<Derived>& g, Scalar scale = Scalar(1)) {
    auto [it, inserted] = rows_.try_emplace(pack(table, row));
    if (inserted) {
      it->second = scale * g;
    } else {
      it->second += scale * g;
    }
  }

  void add(const SparseGradient& other, Scalar scale = Scalar(1)) {
    for (const auto& [k, g] : other.rows_) {
      auto [it, inserted] = rows_.try_emplace(k);
      if (inserted) {
        it->second = scale * g;
      } else {
        it->second += scale * g;
      }
    }
  }

  void scale(Scalar s) {
    for (auto& kv : rows_) kv.second *= s;
  }

  const RowVector<Scalar>* find(TableId table, Eigen::Index row) const {
    auto it = rows_.find(pack(table, row));
    return it == rows_.end() ? nullptr : &it->second;
  }

  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }
  void clear() { rows_.clear(); }

  bool touches(TableId table) const {
    for (const auto& kv : rows_) {
      if (unpack(kv.first).table == table) return true;
    }
    return false;
  }

  Scalar squared_norm() const {
    Scalar s = 0;
    for (const auto& kv : rows_) s += kv.second.squaredNorm();
    return s;
  }

  bool all_finite() const {
    for (const auto& kv : rows_) {
      if (!kv.second.allFinite()) return false;
    }
    return true;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [k, g] : rows_) fn(unpack(k), g);
  }

  static Key unpack(std::uint64_t k) {
    return {static_cast<TableId>(k >> 56), static_cast<Eigen::Index>(k & ((std::uint64_t{1} << 56) - 1))};
  }

 private:
  static std::uint64_t pack(TableId table, Eigen::Index row) {
    return (static_cast<std::uint64_t>(table) << 56) | static_cast<std::uint64_t>(row);
  }

  std::unordered_map<std::uint64_t, RowVector<Scalar>> rows_;
};

namespace detail {

template <class Derived>
typename Derived::Scalar distance(const Eigen::MatrixBase<Derived>& d, Norm norm) {
  return norm == Norm::L1 ? d.template lpNorm<1>() : d.norm();
}

/// d(norm)/d(d). L1 uses sign with sign(0) = 0; L2 is zero at the origin.
template <class Derived>
RowVector<typename Derived::Scalar> distance_gradient(const Eigen::MatrixBase<Derived>& d, Norm norm) {
  using Scalar = typename Derived::Scalar;
  if (norm == Norm::L1) {
    return d.unaryExpr([](Scalar x) { return Scalar((x > 0) - (x < 0)); });
  }
  const Scalar n = d.norm();
  if (n == Scalar(0)) return RowVector<Scalar>::Zero(d.size());
  return d / n;
}

/// TransD projection of an entity row: e + r_p (e_p . e).
template <class Scalar>
RowVector<Scalar> transd_project(const ModelParams<Scalar>& p, EntityId e, RelationId r) {
  const auto ev = p.row(TableId::Entity, e);
  return ev + p.row(TableId::RelationProj, r) * p.row(TableId::EntityProj, e).dot(ev);
}

/// h + r - t, with TransD projections applied when relevant.
template <class Scalar>
RowVector<Scalar> translation_residual(const ModelParams<Scalar>& p, const Triple& x) {
  if (p.spec.kind == ModelKind::TransD) {
    return transd_project(p, x.h, x.r) + p.row(TableId::Relation, x.r) - transd_project(p, x.t, x.r);
  }
  return p.row(TableId::Entity, x.h) + p.row(TableId::Relation, x.r) - p.row(TableId::Entity, x.t);
}

}  // namespace detail

/// Raw score of a triple: a distance for TransE/TransD, a bilinear product for
/// DistMult/ComplEx.
template <class Scalar>
Scalar score(const ModelParams<Scalar>& p, const Triple& x) {
  switch (p.spec.kind) {
    case ModelKind::TransE:
    case ModelKind::TransD:
      return detail::distance(detail::translation_residual(p, x), p.spec.norm);
    case ModelKind::DistMult:
      return p.row(TableId::Entity, x.h)
          .cwiseProduct(p.row(TableId::Relation, x.r))
          .dot(p.row(TableId::Entity, x.t));
    case ModelKind::ComplEx: {
      const int k = p.spec.k;
      const auto h = p.row(TableId::Entity, x.h);
      const auto r = p.row(TableId::Relation, x.r);
      const auto t = p.row(TableId::Entity, x.t);
      const auto a = h.head(k), b = h.tail(k);
      const auto c = r.head(k), d = r.tail(k);
      const auto e = t.head(k), f = t.tail(k);
      // Re(h r conj(t)) = (ac - bd) e + (ad + bc) f
      return (a.cwiseProduct(c) - b.cwiseProduct(d)).dot(e) + (a.cwiseProduct(d) + b.cwiseProduct(c)).dot(f);
    }
  }
  throw std::logic_error("unknown model kind");
}

/// Plausibility with a common orientation: higher means more likely true.
template <class Scalar>
Scalar goodness(const ModelParams<Scalar>& p, const Triple& x) {
  return is_translational(p.spec.kind) ? -score(p, x) : score(p, x);
}

/// Accumulates `scale * d score / d theta` into `out`. Touches exactly the
/// rows of h, r, t (and their projection rows for TransD).
template <class Scalar>
void accumulate_score_gradient(const ModelParams<Scalar>& p, const Triple& x, SparseGradient<Scalar>& out,
                               Scalar scale = Scalar(1)) {
  using Row = RowVector<Scalar>;
  switch (p.spec.kind) {
    case ModelKind::TransE: {
      const Row g = detail::distance_gradient(detail::translation_residual(p, x), p.spec.norm);
      out.add(TableId::Entity, x.h, g, scale);
      out.add(TableId::Relation, x.r, g, scale);
      out.add(TableId::Entity, x.t, g, -scale);
      return;
    }
    case ModelKind::TransD: {
      const Row g = detail::distance_gradient(detail::translation_residual(p, x), p.spec.norm);
      const auto h = p.row(TableId::Entity, x.h);
      const auto t = p.row(TableId::Entity, x.t);
      const auto hp = p.row(TableId::EntityProj, x.h);
      const auto tp = p.row(TableId::EntityProj, x.t);
      const auto rp = p.row(TableId::RelationProj, x.r);
      const Scalar rp_g = rp.dot(g);
      out.add(TableId::Entity, x.h, g + rp_g * hp, scale);
      out.add(TableId::EntityProj, x.h, rp_g * h, scale);
      out.add(TableId::Entity, x.t, g + rp_g * tp, -scale);
      out.add(TableId::EntityProj, x.t, rp_g * t, -scale);
      out.add(TableId::Relation, x.r, g, scale);
      out.add(TableId::RelationProj, x.r, g * (hp.dot(h) - tp.dot(t)), scale);
      return;
    }
    case ModelKind::DistMult: {
      const auto h = p.row(TableId::Entity, x.h);
      const auto r = p.row(TableId::Relation, x.r);
      const auto t = p.row(TableId::Entity, x.t);
      out.add(TableId::Entity, x.h, r.cwiseProduct(t), scale);
      out.add(TableId::Relation, x.r, h.cwiseProduct(t), scale);
      out.add(TableId::Entity, x.t, h.cwiseProduct(r), scale);
      return;
    }
    case ModelKind::ComplEx: {
      const int k = p.spec.k;
      const auto h = p.row(TableId::Entity, x.h);
      const auto r = p.row(TableId::Relation, x.r);
      const auto t = p.row(TableId::Entity, x.t);
      const auto a = h.head(k), b = h.tail(k);
      const auto c = r.head(k), d = r.tail(k);
      const auto e = t.head(k), f = t.tail(k);
      Row gh(2 * k), gr(2 * k), gt(2 * k);
      gh << c.cwiseProduct(e) + d.cwiseProduct(f), c.cwiseProduct(f) - d.cwiseProduct(e);
      gr << a.cwiseProduct(e) + b.cwiseProduct(f), a.cwiseProduct(f) - b.cwiseProduct(e);
      gt << a.cwiseProduct(c) - b.cwiseProduct(d), a.cwiseProduct(d) + b.cwiseProduct(c);
      out.add(TableId::Entity, x.h, gh, scale);
      out.add(TableId::Relation, x.r, gr, scale);
      out.add(TableId::Entity, x.t, gt, scale);
      return;
    }
  }
  throw std::logic_error("unknown model kind");
}

template <class Scalar>
SparseGradient<Scalar> grad_score(const ModelParams<Scalar>& p, const Triple& x) {
  SparseGradient<Scalar> g;
  accumulate_score_gradient(p, x, g);
  return g;
}

/// Accumulates `scale * d goodness / d theta`.
template <class Scalar>
void accumulate_goodness_gradient(const ModelParams<Scalar>& p, const Triple& x, SparseGradient<Scalar>& out,
                                  Scalar scale = Scalar(1)) {
  accumulate_score_gradient(p, x, out, is_translational(p.spec.kind) ? -scale : scale);
}

/// Rows read by the score of one triple.
inline std::vector<std::pair<TableId, EntityId>> touched_rows(ModelKind kind, const Triple& x) {
  std::vector<std::pair<TableId, EntityId>> rows{
      {TableId::Entity, x.h}, {TableId::Relation, x.r}, {TableId::Entity, x.t}};
  if (kind == ModelKind::TransD) {
    rows.insert(rows.end(), {{TableId::EntityProj, x.h}, {TableId::RelationProj, x.r}, {TableId::EntityProj, x.t}});
  }
  return rows;
}

template <class Derived>
void clip_to_unit_ball(Eigen::MatrixBase<Derived>&& row) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = row.norm();
  if (n > Scalar(1)) row /= n;
}

/// Rescales every constrained row with L2 norm above 1 back onto the unit sphere.
/// No-op for DistMult/ComplEx, which are regularized instead.
template <class Scalar>
void project_constraints(ModelParams<Scalar>& p) {
  if (!is_translational(p.spec.kind)) return;
  for (auto& t : p.tables) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) clip_to_unit_ball(t.row(i));
  }
}

/// Same as project_constraints, restricted to the rows present in `touched`.
template <class Scalar>
void project_constraints(ModelParams<Scalar>& p, const SparseGradient<Scalar>& touched) {
  if (!is_translational(p.spec.kind)) return;
  touched.for_each([&](auto key, const auto&) { clip_to_unit_ball(p.row(key.table, key.row)); });
}

/// Gradient of lambda * ||row||^2 (i.e. 2 lambda row) for each listed row, counted
/// once per appearance.
template <class Scalar>
SparseGradient<Scalar> l2_reg_gradient(const ModelParams<Scalar>& p,
                                       std::span<const std::pair<TableId, EntityId>> rows, Scalar lambda) {
  SparseGradient<Scalar> g;
  for (auto [table, row] : rows) g.add(table, row, p.row(table, row), Scalar(2) * lambda);
  return g;
}

template <class Scalar>
Scalar l2_penalty(const ModelParams<Scalar>& p, std::span<const std::pair<TableId, EntityId>> rows, Scalar lambda) {
  Scalar s = 0;
  for (auto [table, row] : rows) s += p.row(table, row).squaredNorm();
  return lambda * s;
}

/// Uniform(-6/sqrt(k), 6/sqrt(k)) per component, followed by one projection pass.
template <class Scalar>
ModelParams<Scalar> initialize_params(const ModelSpec& spec, std::size_t num_entities, std::size_t num_relations,
                                      Rng& rng) {
  ModelParams<Scalar> p(spec, num_entities, num_relations);
  const double bound = 6.0 / std::sqrt(static_cast<double>(spec.k));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& t : p.tables) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = static_cast<Scalar>(u(rng));
    }
  }
  project_constraints(p);
  return p;
}

}  // namespace kbgan
