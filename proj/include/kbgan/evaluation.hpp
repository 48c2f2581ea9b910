#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "kbgan/kgdata.hpp"
#include "kbgan/models.hpp"

namespace kbgan {

template <class Scalar>
using ScoreVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Goodness of every substitution of `side` in `x`, indexed by entity id.
/// Equivalent to calling goodness() |E| times, computed as one pass over the table.
template <class Scalar>
ScoreVector<Scalar> goodness_all(const ModelParams<Scalar>& p, const Triple& x, Side side) {
  const auto& E = p.table(TableId::Entity);
  const auto r = p.row(TableId::Relation, x.r);
  const bool tail = side == Side::Tail;

  auto distances = [&](const auto& residuals) -> ScoreVector<Scalar> {
    if (p.spec.norm == Norm::L1) return -residuals.cwiseAbs().rowwise().sum();
    return -residuals.rowwise().norm();
  };

  switch (p.spec.kind) {
    case ModelKind::TransE: {
      if (tail) {
        const RowVector<Scalar> q = p.row(TableId::Entity, x.h) + r;
        return distances(((-E).rowwise() + q).eval());
      }
      const RowVector<Scalar> q = r - p.row(TableId::Entity, x.t);
      return distances((E.rowwise() + q).eval());
    }
    case ModelKind::TransD: {
      const auto& Ep = p.table(TableId::EntityProj);
      const auto rp = p.row(TableId::RelationProj, x.r);
      const ScoreVector<Scalar> s = Ep.cwiseProduct(E).rowwise().sum();
      const EmbeddingTable<Scalar> projected = E + s * rp;
      if (tail) {
        const RowVector<Scalar> q = detail::transd_project(p, x.h, x.r) + r;
        return distances(((-projected).rowwise() + q).eval());
      }
      const RowVector<Scalar> q = r - detail::transd_project(p, x.t, x.r);
      return distances((projected.rowwise() + q).eval());
    }
    case ModelKind::DistMult: {
      const auto other = p.row(TableId::Entity, tail ? x.h : x.t);
      return E * r.cwiseProduct(other).transpose();
    }
    case ModelKind::ComplEx: {
      const int k = p.spec.k;
      const auto o = p.row(TableId::Entity, tail ? x.h : x.t);
      const auto c = r.head(k), d = r.tail(k);
      RowVector<Scalar> coeff(2 * k);
      if (tail) {
        const auto a = o.head(k), b = o.tail(k);
        coeff << a.cwiseProduct(c) - b.cwiseProduct(d), a.cwiseProduct(d) + b.cwiseProduct(c);
      } else {
        const auto e = o.head(k), f = o.tail(k);
        coeff << c.cwiseProduct(e) + d.cwiseProduct(f), c.cwiseProduct(f) - d.cwiseProduct(e);
      }
      return E * coeff.transpose();
    }
  }
  throw std::logic_error("unknown model kind");
}

struct RankResult {
  Triple triple;
  Side side = Side::Tail;
  std::size_t rank = 1;      // filtered, optimistic: 1 + #strictly better survivors
  std::size_t raw_rank = 1;  // same rule without filtering
  std::size_t ties = 0;      // surviving candidates with exactly equal goodness
};

struct EvalReport {
  double mrr = 0.0;
  double hits_at_10 = 0.0;
  std::size_t ties = 0;
  std::vector<RankResult> ranks;

  std::size_t count() const { return ranks.size(); }
};

/// Filtered rank of the true entity on `side` among all |E| substitutions.
/// Known-true competitors (per `filter`) other than the test entity are removed.
template <class Scalar>
RankResult rank_triple(const ModelParams<Scalar>& p, const Triple& x, Side side, const FilterIndex& filter) {
  const ScoreVector<Scalar> g = goodness_all(p, x, side);
  const EntityId truth = side == Side::Head ? x.h : x.t;
  const Scalar target = g(truth);

  std::size_t better = 0, equal = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g(i) > target) {
      ++better;
    } else if (g(i) == target) {
      ++equal;
    }
  }
  --equal;  // the test entity itself

  RankResult res{x, side, 1, 1 + better, 0};
  const auto& known = side == Side::Head ? filter.heads(x.r, x.t) : filter.tails(x.h, x.r);
  for (EntityId e : known) {
    if (e == truth) continue;
    if (g(e) > target) {
      --better;
    } else if (g(e) == target) {
      --equal;
    }
  }
  res.rank = 1 + better;
  res.ties = equal;
  return res;
}

/// MRR and Hits@10 over a list of ranks.
inline void summarize(EvalReport& rep) {
  double rr = 0.0;
  std::size_t hits = 0, ties = 0;
  for (const auto& r : rep.ranks) {
    rr += 1.0 / static_cast<double>(r.rank);
    hits += r.rank <= 10;
    ties += r.ties;
  }
  const auto n = static_cast<double>(rep.ranks.size());
  rep.mrr = rep.ranks.empty() ? 0.0 : rr / n;
  rep.hits_at_10 = rep.ranks.empty() ? 0.0 : static_cast<double>(hits) / n;
  rep.ties = ties;
}

inline EvalReport summarize_ranks(std::span<const std::size_t> ranks) {
  EvalReport rep;
  for (std::size_t r : ranks) rep.ranks.push_back(RankResult{{}, Side::Tail, r, r, 0});
  summarize(rep);
  return rep;
}

/// Ranks both sides of every triple in `split`.
template <class Scalar>
EvalReport evaluate(const ModelParams<Scalar>& p, std::span<const Triple> split, const FilterIndex& filter) {
  EvalReport rep;
  rep.ranks.reserve(2 * split.size());
  for (const Triple& x : split) {
    rep.ranks.push_back(rank_triple(p, x, Side::Head, filter));
    rep.ranks.push_back(rank_triple(p, x, Side::Tail, filter));
  }
  summarize(rep);
  return rep;
}

}  // namespace kbgan
